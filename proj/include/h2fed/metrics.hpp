#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "h2fed/data.hpp"
#include "h2fed/model.hpp"

namespace h2fed {

// One row of the metrics CSV. Optional cells stay empty in the file.
struct RoundRecord {
  int round = 0;
  double global_acc = 0.0;
  double delta_acc = 0.0;  // global_acc - ACC_pre
  std::optional<double> aed;
  std::optional<double> mse_running;
  std::int64_t wall_ms = 0;
  std::vector<double> per_rsu_csr;  // realized connected/participant ratios
  std::vector<bool> stale_rsus;
};

struct RunHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
  double acc_pre = 0.0;
  std::string framework;
  int n_rsus = 0;
  std::string to_json() const;
  static RunHeader from_json(const std::string& text);
};

struct RunSeries {
  RunHeader header;
  std::vector<RoundRecord> records;

  std::vector<double> accuracies() const;
};

// AED at one round: (dACC_pos - dACC_zero) / dACC_zero. Empty when the
// denominator is exactly zero (skipped, never fabricated).
std::optional<double> aed(const RunSeries& series_mu_pos, const RunSeries& series_mu_zero,
                          int round);

// AED over all shared rounds past the warm-up point (first round where the
// mu1=0 series exceeds warmup_delta).
struct AedPoint {
  int round;
  double value;
};
std::vector<AedPoint> aed_series(const RunSeries& series_mu_pos, const RunSeries& series_mu_zero,
                                 double warmup_delta = 0.01);

struct CentralizedResult {
  ParamVector params;
  std::vector<double> acc_series;  // index 0 = initial accuracy, then one per epoch
};

// Plain SGD over the pooled examples with the agents' architecture and
// hyperparameters; the accuracy series aligns index-for-index with global
// rounds.
CentralizedResult centralized_train(const LabeledDataset& train,
                                    const std::vector<std::uint32_t>& pooled,
                                    const LabeledDataset& test, const ModelArchitecture& arch,
                                    int epochs, double lr, std::size_t batch_size,
                                    std::uint64_t seed,
                                    const ParamVector* init = nullptr);

// Mean over aligned rounds of (acc_fed - acc_cen)^2, truncated to the
// shorter series.
double mse_to_centralized(const RunSeries& fed, const std::vector<double>& centralized);

struct StabilityStats {
  double post_convergence_std = 0.0;  // population std over the window
  double max_drawdown = 0.0;          // max peak-to-trough within the window
};
StabilityStats stability_stats(const RunSeries& series, std::size_t window);
StabilityStats stability_stats(const std::vector<double>& acc, std::size_t window);

// CSV persistence. Values are printed with round-trip precision so that
// recomputing metrics from a file reproduces in-run values exactly.
std::string series_to_csv(const RunSeries& series);
void append_record_csv(std::string& csv, const RoundRecord& rec, int n_rsus);
std::string csv_header_line(int n_rsus);
RunSeries series_from_csv(const std::string& csv, const RunHeader& header);

}  // namespace h2fed

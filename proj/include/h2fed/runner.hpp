#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "h2fed/config.hpp"
#include "h2fed/data.hpp"
#include "h2fed/federation.hpp"
#include "h2fed/metrics.hpp"
#include "h2fed/model.hpp"

namespace h2fed {

// Train/test pair resolved from a RunConfig's dataset section. For the
// synthetic source the set is split 10:1 train:test.
struct DataBundle {
  LabeledDataset train;
  LabeledDataset test;
};
DataBundle load_data(const RunConfig& cfg);

struct PretrainResult {
  ParamVector params;
  double acc_pre = 0.0;
  int epochs_run = 0;
  bool plateau_warning = false;  // stopped below 0.5 accuracy
  std::vector<double> acc_series;
  std::vector<std::uint32_t> used_indices;  // reserved from federated plans
};

// Centralized training on the pooled pretraining shards until the test
// accuracy plateaus (gain below plateau_epsilon over plateau_window epochs)
// or the epoch cap.
PretrainResult run_pretrain(const RunConfig& cfg, const DataBundle& data);

// Maps cfg.framework to a FrameworkPreset. "custom" takes the config's mu
// and lar literally; named baselines fill their required positive values
// from the config (falling back to mu1=0.001, mu2=0.005, lar=3 when the
// config leaves them at non-qualifying defaults).
FrameworkPreset resolve_framework(const RunConfig& cfg);

struct FederatedRunInputs {
  const RunConfig* cfg = nullptr;
  const DataBundle* data = nullptr;
  const PartitionPlan* plan = nullptr;
  ParamVector init;
  double acc_pre = 0.0;
  std::uint64_t seed = 0;
  FrameworkPreset framework;
  // Optional centralized accuracy series; enables the mse_running column.
  const std::vector<double>* centralized = nullptr;
  // Called after every appended record; lets the CLI persist incrementally.
  std::function<void(const RoundRecord&)> on_record;
  // Optional per-round model sink (round, params).
  std::function<void(int, const ParamVector&)> on_model;
};

// The full hierarchical loop: per round, resample connectivity, run every
// RSU's pre-aggregation rounds, aggregate at the cloud, evaluate. Aborts
// with RuntimeAbort naming the first offending round and RSU if aggregated
// parameters go non-finite.
RunSeries run_federated(const FederatedRunInputs& in);

// Builds the label-skew plan for the federated agents, reserving the
// pretraining examples.
PartitionPlan build_federated_plan(const RunConfig& cfg, const LabeledDataset& train,
                                   const std::vector<std::uint32_t>& reserved);

struct SweepPoint {
  double value = 0.0;
  std::uint64_t seed = 0;
  RunSeries series;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepPoint> points;
  // Per (value>0, seed): AED against the value==0 run of the same seed.
  struct AedRow {
    double value;
    std::uint64_t seed;
    int round;
    double aed;
  };
  std::vector<AedRow> aed_table;
};

// One run per (value, seed) with a shared pretrained model. axis is "mu1"
// or "mu2". A mu1 sweep requires 0 among the values (AED is undefined
// otherwise).
SweepResult run_sweep(const RunConfig& cfg, const DataBundle& data,
                      const PretrainResult& pre, const std::string& axis,
                      const std::vector<double>& values,
                      const std::function<void(const std::string&)>& log = {});

}  // namespace h2fed

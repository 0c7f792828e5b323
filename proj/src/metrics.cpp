#include "h2fed/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <format>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "h2fed/errors.hpp"
#include "h2fed/kernels.hpp"

namespace h2fed {

using nlohmann::json;

std::string RunHeader::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["acc_pre"] = acc_pre;
  j["framework"] = framework;
  j["n_rsus"] = n_rsus;
  return j.dump(2);
}

RunHeader RunHeader::from_json(const std::string& text) {
  json j = json::parse(text);
  RunHeader h;
  h.config_hash = j.at("config_hash").get<std::string>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.acc_pre = j.at("acc_pre").get<double>();
  h.framework = j.value("framework", "");
  h.n_rsus = j.at("n_rsus").get<int>();
  return h;
}

std::vector<double> RunSeries::accuracies() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.global_acc);
  return out;
}

namespace {

const RoundRecord* find_round(const RunSeries& s, int round) {
  for (const auto& r : s.records) {
    if (r.round == round) return &r;
  }
  return nullptr;
}

}  // namespace

std::optional<double> aed(const RunSeries& series_mu_pos, const RunSeries& series_mu_zero,
                          int round) {
  const RoundRecord* pos = find_round(series_mu_pos, round);
  const RoundRecord* zero = find_round(series_mu_zero, round);
  if (!pos || !zero) throw ConfigError(std::format("aed: round {} missing from a series", round));
  if (zero->delta_acc == 0.0) return std::nullopt;
  return (pos->delta_acc - zero->delta_acc) / zero->delta_acc;
}

std::vector<AedPoint> aed_series(const RunSeries& series_mu_pos, const RunSeries& series_mu_zero,
                                 double warmup_delta) {
  std::vector<AedPoint> out;
  bool warmed = false;
  for (const auto& zr : series_mu_zero.records) {
    if (!warmed) {
      if (zr.delta_acc > warmup_delta) warmed = true;
      else continue;
    }
    const RoundRecord* pr = find_round(series_mu_pos, zr.round);
    if (!pr || zr.delta_acc == 0.0) continue;
    out.push_back({zr.round, (pr->delta_acc - zr.delta_acc) / zr.delta_acc});
  }
  return out;
}

CentralizedResult centralized_train(const LabeledDataset& train,
                                    const std::vector<std::uint32_t>& pooled,
                                    const LabeledDataset& test, const ModelArchitecture& arch,
                                    int epochs, double lr, std::size_t batch_size,
                                    std::uint64_t seed, const ParamVector* init) {
  if (epochs < 0) throw ConfigError("centralized_train: epochs must be >= 0");
  if (pooled.empty()) throw ConfigError("centralized_train: pooled index set is empty");
  CentralizedResult res;
  res.params = init ? *init : init_params(arch, seed);
  res.acc_series.push_back(evaluate(res.params, test));
  Rng rng(mix_seed({seed, 0xce7au}));
  const ParamVector anchor = res.params;  // unused: prox = (0,0)
  for (int e = 0; e < epochs; ++e) {
    res.params = sgd_epoch(res.params, train, pooled, anchor, anchor, ProximalSpec{}, lr,
                           batch_size, rng);
    res.acc_series.push_back(evaluate(res.params, test));
  }
  return res;
}

double mse_to_centralized(const RunSeries& fed, const std::vector<double>& centralized) {
  const std::size_t n = std::min(fed.records.size(), centralized.size());
  if (n == 0) throw ConfigError("mse_to_centralized: empty series");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = fed.records[i].global_acc - centralized[i];
    acc += d * d;
  }
  return acc / static_cast<double>(n);
}

StabilityStats stability_stats(const std::vector<double>& acc, std::size_t window) {
  if (acc.empty() || window == 0) throw ConfigError("stability_stats: empty window");
  const std::size_t n = std::min(window, acc.size());
  const double* tail = acc.data() + (acc.size() - n);

  StabilityStats st;
  const double mean = kernels::sum(tail, n) / static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = tail[i] - mean;
    var += d * d;
  }
  st.post_convergence_std = std::sqrt(var / static_cast<double>(n));

  double peak = tail[0];
  for (std::size_t i = 0; i < n; ++i) {
    peak = std::max(peak, tail[i]);
    st.max_drawdown = std::max(st.max_drawdown, peak - tail[i]);
  }
  return st;
}

StabilityStats stability_stats(const RunSeries& series, std::size_t window) {
  return stability_stats(series.accuracies(), window);
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  return std::strtod(s.c_str(), nullptr);
}

}  // namespace

std::string csv_header_line(int n_rsus) {
  std::string h = "round,global_acc,delta_acc,aed,mse_running,wall_ms";
  for (int k = 0; k < n_rsus; ++k) h += std::format(",csr_{}", k);
  for (int k = 0; k < n_rsus; ++k) h += std::format(",stale_{}", k);
  h += "\n";
  return h;
}

void append_record_csv(std::string& csv, const RoundRecord& rec, int n_rsus) {
  if (static_cast<int>(rec.per_rsu_csr.size()) != n_rsus ||
      static_cast<int>(rec.stale_rsus.size()) != n_rsus) {
    throw ConfigError("append_record_csv: per-RSU column count mismatch");
  }
  csv += std::format("{},{},{}", rec.round, fmt_double(rec.global_acc), fmt_double(rec.delta_acc));
  csv += ',';
  if (rec.aed) csv += fmt_double(*rec.aed);
  csv += ',';
  if (rec.mse_running) csv += fmt_double(*rec.mse_running);
  csv += std::format(",{}", rec.wall_ms);
  for (double c : rec.per_rsu_csr) csv += std::format(",{}", fmt_double(c));
  for (bool s : rec.stale_rsus) csv += s ? ",1" : ",0";
  csv += '\n';
}

std::string series_to_csv(const RunSeries& series) {
  std::string out = csv_header_line(series.header.n_rsus);
  for (const auto& r : series.records) append_record_csv(out, r, series.header.n_rsus);
  return out;
}

RunSeries series_from_csv(const std::string& csv, const RunHeader& header) {
  RunSeries series;
  series.header = header;
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("series_from_csv: missing header row");
  if (line != csv_header_line(header.n_rsus).substr(0, line.size()) ||
      split_csv_line(line).size() != 6 + 2 * static_cast<std::size_t>(header.n_rsus)) {
    throw ConfigError("series_from_csv: header row does not match the schema");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 6 + 2 * static_cast<std::size_t>(header.n_rsus)) {
      throw ConfigError("series_from_csv: wrong column count");
    }
    RoundRecord r;
    r.round = std::stoi(cells[0]);
    r.global_acc = parse_double(cells[1]);
    r.delta_acc = parse_double(cells[2]);
    if (!cells[3].empty()) r.aed = parse_double(cells[3]);
    if (!cells[4].empty()) r.mse_running = parse_double(cells[4]);
    r.wall_ms = std::stoll(cells[5]);
    for (int k = 0; k < header.n_rsus; ++k) r.per_rsu_csr.push_back(parse_double(cells[6 + k]));
    for (int k = 0; k < header.n_rsus; ++k) {
      r.stale_rsus.push_back(cells[6 + header.n_rsus + k] == "1");
    }
    series.records.push_back(std::move(r));
  }
  return series;
}

}  // namespace h2fed

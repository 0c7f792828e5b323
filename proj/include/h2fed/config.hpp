#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "h2fed/data.hpp"
#include "h2fed/heterogeneity.hpp"
#include "h2fed/model.hpp"

namespace h2fed {

struct DatasetConfig {
  std::string type = "synthetic";  // "synthetic" | "mnist"
  std::string dir;                 // IDX directory for mnist
  std::size_t n = 11000;           // synthetic example count
  std::uint64_t seed = 1;
};

struct PretrainConfig {
  int agents = 10;
  std::set<int> excluded_labels = {7, 8, 9};
  int epoch_cap = 40;
  int plateau_window = 3;
  double plateau_epsilon = 0.002;  // accuracy gain per window below which we stop
};

struct TrainingConfig {
  int epochs = 2;  // E
  double lr = 0.01;
  std::size_t batch_size = 32;
};

struct ProxConfig {
  double mu1 = 0.0;
  double mu2 = 0.0;
};

struct RunConfig {
  DatasetConfig dataset;
  ModelArchitecture arch;
  int agents = 100;
  int rsus = 10;
  std::vector<int> agents_per_rsu;  // empty = balanced
  PretrainConfig pretrain;
  Scenario scenario = Scenario::ScenarioI;
  int labels_per_unit = 2;
  HeterogeneityConfig het;                      // defaults for every RSU
  std::map<int, HeterogeneityConfig> het_rsu;   // per-RSU overrides
  ProxConfig prox;
  std::map<int, ProxConfig> prox_rsu;
  TrainingConfig training;
  int rounds = 60;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "out";
  std::string framework = "H2Fed";
  bool dump_models = false;

  void validate() const;
  std::vector<int> resolved_agents_per_rsu() const;
  HeterogeneityConfig het_for(int rsu) const;
  ProxConfig prox_for(int rsu) const;

  // Canonical JSON of the resolved config; hashing it gives run provenance.
  std::string to_json() const;
  std::string hash() const;
};

// Strict parser: unknown keys anywhere are errors.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);

// Named experiment presets mirroring the evaluation setups: scenario1,
// scenario2, mu1-sweep, mu2-sweep, baselines.
struct ScenarioPreset {
  std::string name;
  std::string description;
};
std::vector<ScenarioPreset> preset_catalog();
void apply_preset(RunConfig& cfg, const std::string& preset_name);

}  // namespace h2fed

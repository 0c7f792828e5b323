#include "h2fed/config.hpp"

#include <format>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "h2fed/errors.hpp"
#include "h2fed/snapshot.hpp"

namespace h2fed {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::format("config section '{}' must be an object", where));
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError(std::format("unknown config key '{}.{}'", where, key));
  }
}

HeterogeneityConfig parse_het(const json& j, const std::string& where,
                              const HeterogeneityConfig& base) {
  require_keys(j, where, {"csr", "scd", "fsr", "lar", "per_rsu", "rsu"});
  HeterogeneityConfig h = base;
  if (j.contains("csr")) h.csr = j["csr"].get<double>();
  if (j.contains("scd")) h.scd_seconds = j["scd"].get<int>();
  if (j.contains("fsr")) h.fsr = j["fsr"].get<double>();
  if (j.contains("lar")) h.lar = j["lar"].get<int>();
  return h;
}

ProxConfig parse_prox(const json& j, const std::string& where, const ProxConfig& base) {
  require_keys(j, where, {"mu1", "mu2", "per_rsu", "rsu"});
  ProxConfig p = base;
  if (j.contains("mu1")) p.mu1 = j["mu1"].get<double>();
  if (j.contains("mu2")) p.mu2 = j["mu2"].get<double>();
  return p;
}

}  // namespace

void RunConfig::validate() const {
  if (!arch.valid()) throw ConfigError("arch dimensions must be >= 1");
  if (rsus < 1 || agents < rsus) throw ConfigError("need agents >= rsus >= 1");
  if (agents_per_rsu.empty()) {
    if (agents % rsus != 0) {
      throw ConfigError("agents must divide evenly across rsus (or set agents_per_rsu)");
    }
  } else {
    if (static_cast<int>(agents_per_rsu.size()) != rsus) {
      throw ConfigError("agents_per_rsu length must equal rsus");
    }
    int total = 0;
    for (int a : agents_per_rsu) {
      if (a < 1) throw ConfigError("each RSU needs >= 1 agent");
      total += a;
    }
    if (total != agents) throw ConfigError("agents_per_rsu must sum to agents");
  }
  if (labels_per_unit < 1 || labels_per_unit > arch.output_dim) {
    throw ConfigError("labels_per_unit out of range");
  }
  if (pretrain.agents < 0) throw ConfigError("pretrain.agents must be >= 0");
  if (static_cast<int>(pretrain.excluded_labels.size()) >= arch.output_dim) {
    throw ConfigError("pretrain cannot exclude every label");
  }
  for (int l : pretrain.excluded_labels) {
    if (l < 0 || l >= arch.output_dim) throw ConfigError("excluded label out of range");
  }
  het.validate();
  for (const auto& [k, h] : het_rsu) {
    if (k < 0 || k >= rsus) throw ConfigError("het per_rsu index out of range");
    h.validate();
  }
  for (const auto& [k, p] : prox_rsu) {
    if (k < 0 || k >= rsus) throw ConfigError("prox per_rsu index out of range");
    if (p.mu1 < 0 || p.mu2 < 0) throw ConfigError("mu must be >= 0");
  }
  if (prox.mu1 < 0 || prox.mu2 < 0) throw ConfigError("mu must be >= 0");
  if (training.epochs < 1) throw ConfigError("training.epochs must be >= 1");
  if (training.lr < 0) throw ConfigError("training.lr must be >= 0");
  if (training.batch_size < 1) throw ConfigError("training.batch_size must be >= 1");
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  if (seeds.empty()) throw ConfigError("need at least one seed");
  if (dataset.type != "synthetic" && dataset.type != "mnist") {
    throw ConfigError(std::format("unknown dataset.type '{}'", dataset.type));
  }
  if (dataset.type == "mnist" && dataset.dir.empty()) {
    throw ConfigError("dataset.dir required for mnist");
  }
}

std::vector<int> RunConfig::resolved_agents_per_rsu() const {
  if (!agents_per_rsu.empty()) return agents_per_rsu;
  return std::vector<int>(rsus, agents / rsus);
}

HeterogeneityConfig RunConfig::het_for(int rsu) const {
  auto it = het_rsu.find(rsu);
  return it != het_rsu.end() ? it->second : het;
}

ProxConfig RunConfig::prox_for(int rsu) const {
  auto it = prox_rsu.find(rsu);
  return it != prox_rsu.end() ? it->second : prox;
}

std::string RunConfig::to_json() const {
  json j;
  j["dataset"] = {{"type", dataset.type}, {"dir", dataset.dir}, {"n", dataset.n}, {"seed", dataset.seed}};
  j["arch"] = {{"input", arch.input_dim}, {"hidden", arch.hidden_dim}, {"output", arch.output_dim}};
  j["agents"] = agents;
  j["rsus"] = rsus;
  if (!agents_per_rsu.empty()) j["agents_per_rsu"] = agents_per_rsu;
  j["pretrain"] = {{"agents", pretrain.agents},
                   {"excluded_labels", pretrain.excluded_labels},
                   {"epoch_cap", pretrain.epoch_cap},
                   {"plateau_window", pretrain.plateau_window},
                   {"plateau_epsilon", pretrain.plateau_epsilon}};
  j["scenario"] = scenario_name(scenario);
  j["labels_per_unit"] = labels_per_unit;
  json het_j = {{"csr", het.csr}, {"scd", het.scd_seconds}, {"fsr", het.fsr}, {"lar", het.lar}};
  if (!het_rsu.empty()) {
    het_j["per_rsu"] = json::array();
    for (const auto& [k, h] : het_rsu) {
      het_j["per_rsu"].push_back({{"rsu", k}, {"csr", h.csr}, {"scd", h.scd_seconds},
                                  {"fsr", h.fsr}, {"lar", h.lar}});
    }
  }
  j["heterogeneity"] = het_j;
  json prox_j = {{"mu1", prox.mu1}, {"mu2", prox.mu2}};
  if (!prox_rsu.empty()) {
    prox_j["per_rsu"] = json::array();
    for (const auto& [k, p] : prox_rsu) {
      prox_j["per_rsu"].push_back({{"rsu", k}, {"mu1", p.mu1}, {"mu2", p.mu2}});
    }
  }
  j["prox"] = prox_j;
  j["training"] = {{"epochs", training.epochs}, {"lr", training.lr}, {"batch_size", training.batch_size}};
  j["rounds"] = rounds;
  j["seeds"] = seeds;
  j["output_dir"] = output_dir;
  j["framework"] = framework;
  j["dump_models"] = dump_models;
  return j.dump(2);
}

std::string RunConfig::hash() const {
  const std::string canon = to_json();
  return bytes_hash(canon.data(), canon.size());
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::format("config is not valid JSON: {}", e.what()));
  }
  require_keys(j, "", {"dataset", "arch", "agents", "rsus", "agents_per_rsu", "pretrain",
                       "scenario", "labels_per_unit", "heterogeneity", "prox", "training",
                       "rounds", "seeds", "output_dir", "framework", "dump_models"});
  RunConfig cfg;
  if (j.contains("dataset")) {
    const auto& d = j["dataset"];
    require_keys(d, "dataset", {"type", "dir", "n", "seed"});
    if (d.contains("type")) cfg.dataset.type = d["type"].get<std::string>();
    if (d.contains("dir")) cfg.dataset.dir = d["dir"].get<std::string>();
    if (d.contains("n")) cfg.dataset.n = d["n"].get<std::size_t>();
    if (d.contains("seed")) cfg.dataset.seed = d["seed"].get<std::uint64_t>();
  }
  if (j.contains("arch")) {
    const auto& a = j["arch"];
    require_keys(a, "arch", {"input", "hidden", "output"});
    if (a.contains("input")) cfg.arch.input_dim = a["input"].get<int>();
    if (a.contains("hidden")) cfg.arch.hidden_dim = a["hidden"].get<int>();
    if (a.contains("output")) cfg.arch.output_dim = a["output"].get<int>();
  }
  if (j.contains("agents")) cfg.agents = j["agents"].get<int>();
  if (j.contains("rsus")) cfg.rsus = j["rsus"].get<int>();
  if (j.contains("agents_per_rsu")) cfg.agents_per_rsu = j["agents_per_rsu"].get<std::vector<int>>();
  if (j.contains("pretrain")) {
    const auto& p = j["pretrain"];
    require_keys(p, "pretrain", {"agents", "excluded_labels", "epoch_cap", "plateau_window",
                                 "plateau_epsilon"});
    if (p.contains("agents")) cfg.pretrain.agents = p["agents"].get<int>();
    if (p.contains("excluded_labels")) {
      cfg.pretrain.excluded_labels.clear();
      for (int l : p["excluded_labels"]) cfg.pretrain.excluded_labels.insert(l);
    }
    if (p.contains("epoch_cap")) cfg.pretrain.epoch_cap = p["epoch_cap"].get<int>();
    if (p.contains("plateau_window")) cfg.pretrain.plateau_window = p["plateau_window"].get<int>();
    if (p.contains("plateau_epsilon")) cfg.pretrain.plateau_epsilon = p["plateau_epsilon"].get<double>();
  }
  if (j.contains("scenario")) {
    const std::string s = j["scenario"].get<std::string>();
    if (s == "scenario1") cfg.scenario = Scenario::ScenarioI;
    else if (s == "scenario2") cfg.scenario = Scenario::ScenarioII;
    else throw ConfigError(std::format("unknown scenario '{}'", s));
  }
  if (j.contains("labels_per_unit")) cfg.labels_per_unit = j["labels_per_unit"].get<int>();
  if (j.contains("heterogeneity")) {
    const auto& h = j["heterogeneity"];
    cfg.het = parse_het(h, "heterogeneity", cfg.het);
    if (h.contains("per_rsu")) {
      for (const auto& o : h["per_rsu"]) {
        if (!o.contains("rsu")) throw ConfigError("heterogeneity.per_rsu entries need 'rsu'");
        cfg.het_rsu[o["rsu"].get<int>()] = parse_het(o, "heterogeneity.per_rsu", cfg.het);
      }
    }
  }
  if (j.contains("prox")) {
    const auto& p = j["prox"];
    cfg.prox = parse_prox(p, "prox", cfg.prox);
    if (p.contains("per_rsu")) {
      for (const auto& o : p["per_rsu"]) {
        if (!o.contains("rsu")) throw ConfigError("prox.per_rsu entries need 'rsu'");
        cfg.prox_rsu[o["rsu"].get<int>()] = parse_prox(o, "prox.per_rsu", cfg.prox);
      }
    }
  }
  if (j.contains("training")) {
    const auto& t = j["training"];
    require_keys(t, "training", {"epochs", "lr", "batch_size"});
    if (t.contains("epochs")) cfg.training.epochs = t["epochs"].get<int>();
    if (t.contains("lr")) cfg.training.lr = t["lr"].get<double>();
    if (t.contains("batch_size")) cfg.training.batch_size = t["batch_size"].get<std::size_t>();
  }
  if (j.contains("rounds")) cfg.rounds = j["rounds"].get<int>();
  if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("framework")) cfg.framework = j["framework"].get<std::string>();
  if (j.contains("dump_models")) cfg.dump_models = j["dump_models"].get<bool>();
  cfg.validate();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(std::format("cannot open config file: {}", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::vector<ScenarioPreset> preset_catalog() {
  return {
      {"scenario1", "RSU-level label skew at CSR=0.1, SCD=1"},
      {"scenario2", "agent-level label skew at CSR=0.1, SCD=1"},
      {"mu1-sweep", "mu1 in {0, 0.001} at CSR=0.2, mu2=0, AED table"},
      {"mu2-sweep", "mu2 in {0, 0.001, 0.005} at CSR=0.1, stability comparison"},
      {"baselines", "FedAvg/FedProx/HierFAVG/H2Fed at CSR=0.1, SCD=1"},
  };
}

void apply_preset(RunConfig& cfg, const std::string& preset_name) {
  if (preset_name == "scenario1") {
    cfg.scenario = Scenario::ScenarioI;
    cfg.het.csr = 0.1;
    cfg.het.scd_seconds = 1;
  } else if (preset_name == "scenario2") {
    cfg.scenario = Scenario::ScenarioII;
    cfg.het.csr = 0.1;
    cfg.het.scd_seconds = 1;
  } else if (preset_name == "mu1-sweep") {
    cfg.het.csr = 0.2;
    cfg.het.scd_seconds = 1;
    cfg.prox.mu2 = 0.0;
  } else if (preset_name == "mu2-sweep") {
    cfg.het.csr = 0.1;
    cfg.het.scd_seconds = 1;
    cfg.prox.mu1 = 0.001;
  } else if (preset_name == "baselines") {
    cfg.het.csr = 0.1;
    cfg.het.scd_seconds = 1;
  } else {
    throw ConfigError(std::format("unknown preset '{}'", preset_name));
  }
}

}  // namespace h2fed

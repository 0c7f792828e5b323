#include "h2fed/data.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <format>
#include <fstream>

#include <nlohmann/json.hpp>

#include "h2fed/errors.hpp"

namespace h2fed {

using nlohmann::json;

Batch LabeledDataset::make_batch(std::span<const std::uint32_t> indices) const {
  Batch b;
  b.rows = indices.size();
  b.cols = feature_dim;
  b.inputs.resize(b.rows * b.cols);
  b.labels.resize(b.rows);
  for (std::size_t r = 0; r < b.rows; ++r) {
    const float* src = features.data() + static_cast<std::size_t>(indices[r]) * feature_dim;
    double* dst = b.inputs.data() + r * feature_dim;
    for (std::size_t c = 0; c < feature_dim; ++c) dst[c] = src[c];
    b.labels[r] = labels[indices[r]];
  }
  return b;
}

Batch LabeledDataset::make_batch_range(std::size_t begin, std::size_t end) const {
  Batch b;
  b.rows = end - begin;
  b.cols = feature_dim;
  b.inputs.resize(b.rows * b.cols);
  b.labels.resize(b.rows);
  for (std::size_t r = 0; r < b.rows; ++r) {
    const float* src = features.data() + (begin + r) * feature_dim;
    double* dst = b.inputs.data() + r * feature_dim;
    for (std::size_t c = 0; c < feature_dim; ++c) dst[c] = src[c];
    b.labels[r] = labels[begin + r];
  }
  return b;
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::ScenarioI: return "scenario1";
    case Scenario::ScenarioII: return "scenario2";
    case Scenario::PretrainSkew: return "pretrain";
  }
  return "unknown";
}

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;  // 2051
constexpr std::uint32_t kLabelsMagic = 0x00000801;  // 2049

std::uint32_t read_be32(std::ifstream& f, const std::string& path) {
  std::array<unsigned char, 4> buf;
  if (!f.read(reinterpret_cast<char*>(buf.data()), 4)) {
    throw DatasetError(std::format("truncated IDX file: {}", path));
  }
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DatasetError(std::format("cannot open IDX file: {}", path));
  return f;
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  auto fi = open_binary(images_path);
  const std::uint32_t magic_i = read_be32(fi, images_path);
  if (magic_i != kImagesMagic) {
    throw DatasetError(std::format("wrong magic in images file {}: got {}, want {}",
                                   images_path, magic_i, kImagesMagic));
  }
  const std::uint32_t n_images = read_be32(fi, images_path);
  const std::uint32_t rows = read_be32(fi, images_path);
  const std::uint32_t cols = read_be32(fi, images_path);

  auto fl = open_binary(labels_path);
  const std::uint32_t magic_l = read_be32(fl, labels_path);
  if (magic_l != kLabelsMagic) {
    throw DatasetError(std::format("wrong magic in labels file {}: got {}, want {}",
                                   labels_path, magic_l, kLabelsMagic));
  }
  const std::uint32_t n_labels = read_be32(fl, labels_path);

  if (n_images != n_labels) {
    throw DatasetError(std::format("image/label count mismatch: {} images vs {} labels",
                                   n_images, n_labels));
  }
  if (n_images == 0) throw DatasetError(std::format("empty dataset: {}", images_path));

  LabeledDataset ds;
  ds.name = images_path;
  ds.feature_dim = static_cast<std::size_t>(rows) * cols;
  ds.num_classes = 10;

  std::vector<unsigned char> raw(static_cast<std::size_t>(n_images) * ds.feature_dim);
  if (!fi.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw DatasetError(std::format("truncated IDX file: {}", images_path));
  }
  ds.features.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    ds.features[i] = static_cast<float>(raw[i]) * (1.0f / 255.0f);
  }

  ds.labels.resize(n_labels);
  if (!fl.read(reinterpret_cast<char*>(ds.labels.data()), n_labels)) {
    throw DatasetError(std::format("truncated IDX file: {}", labels_path));
  }
  for (auto y : ds.labels) {
    if (y > 9) throw DatasetError(std::format("label {} out of range in {}", int(y), labels_path));
  }
  return ds;
}

LabeledDataset synth_dataset(std::size_t n, std::uint64_t seed) {
  constexpr int kClasses = 10;
  constexpr std::size_t kDim = 784;
  if (n < kClasses) throw ConfigError("synth_dataset: n must be >= 10");

  Rng rng(mix_seed({seed, 0x5f17c0de}));
  std::vector<double> centers(kClasses * kDim);
  for (double& c : centers) c = rng.uniform(0.2, 0.8);

  LabeledDataset ds;
  ds.name = std::format("synthetic(n={},seed={})", n, seed);
  ds.feature_dim = kDim;
  ds.num_classes = kClasses;
  ds.features.resize(n * kDim);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % kClasses);
    ds.labels[i] = static_cast<std::uint8_t>(label);
    const double* c = centers.data() + static_cast<std::size_t>(label) * kDim;
    float* dst = ds.features.data() + i * kDim;
    for (std::size_t d = 0; d < kDim; ++d) {
      dst[d] = static_cast<float>(std::clamp(c[d] + 0.08 * rng.normal(), 0.0, 1.0));
    }
  }
  return ds;
}

namespace {

// Unified skew machinery: every (rsu, agent) pair gets a label subset;
// Scenario I keys the subset on the RSU, Scenario II on the agent slot
// (rotated per RSU so each RSU still covers the whole label space).
std::vector<int> subset_for(Scenario scenario, int rsu, int agent_slot, int lpu,
                            int classes, const std::vector<int>& perm) {
  std::vector<int> out(lpu);
  const int base = scenario == Scenario::ScenarioI ? rsu * lpu : agent_slot * lpu + rsu;
  for (int j = 0; j < lpu; ++j) out[j] = perm[(base + j) % classes];
  return out;
}

}  // namespace

PartitionPlan partition_label_skew(const LabeledDataset& ds, int n_agents, int n_rsus,
                                   Scenario scenario, int labels_per_unit,
                                   std::uint64_t seed,
                                   const std::vector<std::uint32_t>& excluded_indices) {
  const int classes = ds.num_classes;
  if (n_rsus < 1 || n_agents < n_rsus || n_agents % n_rsus != 0) {
    throw ConfigError("partition_label_skew: n_agents must be a positive multiple of n_rsus");
  }
  if (labels_per_unit < 1 || labels_per_unit > classes) {
    throw ConfigError(std::format("partition_label_skew: labels_per_unit must be in [1, {}]", classes));
  }
  if (scenario == Scenario::PretrainSkew) {
    throw ConfigError("partition_label_skew: use pretrain_split for the pretraining shards");
  }
  const int per = n_agents / n_rsus;

  Rng rng(mix_seed({seed, 0x9a27u}));
  std::vector<int> perm(classes);
  for (int c = 0; c < classes; ++c) perm[c] = c;
  rng.shuffle(perm);

  std::vector<char> excluded(ds.size(), 0);
  for (std::uint32_t i : excluded_indices) {
    if (i >= ds.size()) throw ConfigError("partition_label_skew: excluded index out of range");
    excluded[i] = 1;
  }

  std::vector<std::vector<std::uint32_t>> pools(classes);
  for (std::uint32_t i = 0; i < ds.size(); ++i) {
    if (!excluded[i]) pools[ds.labels[i]].push_back(i);
  }
  for (auto& pool : pools) rng.shuffle(pool);

  // Uniform per-agent-per-label quota, capped by the scarcest label.
  std::vector<std::size_t> demand(classes, 0);
  for (int r = 0; r < n_rsus; ++r) {
    for (int a = 0; a < per; ++a) {
      for (int l : subset_for(scenario, r, a, labels_per_unit, classes, perm)) ++demand[l];
    }
  }
  std::size_t quota = SIZE_MAX;
  for (int l = 0; l < classes; ++l) {
    if (demand[l] == 0) continue;
    quota = std::min(quota, pools[l].size() / demand[l]);
  }
  if (quota == 0 || quota == SIZE_MAX) {
    for (int l = 0; l < classes; ++l) {
      if (demand[l] > 0 && pools[l].size() < demand[l]) {
        throw DatasetError(std::format(
            "partition_label_skew: not enough examples of label {} ({} available, {} agents need it)",
            l, pools[l].size(), demand[l]));
      }
    }
    throw DatasetError("partition_label_skew: not enough examples for the requested skew");
  }

  PartitionPlan plan;
  plan.scenario = scenario;
  plan.seed = seed;
  std::vector<std::size_t> cursor(classes, 0);
  for (int r = 0; r < n_rsus; ++r) {
    for (int a = 0; a < per; ++a) {
      Partition part;
      part.agent_id = r * per + a;
      part.rsu_id = r;
      for (int l : subset_for(scenario, r, a, labels_per_unit, classes, perm)) {
        for (std::size_t k = 0; k < quota; ++k) {
          part.example_indices.push_back(pools[l][cursor[l]++]);
        }
        part.label_profile.insert(l);
      }
      plan.partitions.push_back(std::move(part));
    }
  }
  return plan;
}

PartitionPlan pretrain_split(const LabeledDataset& ds, int n_pretrain_agents,
                             const std::set<int>& excluded_labels, std::uint64_t seed,
                             std::size_t per_agent_size) {
  if (n_pretrain_agents < 1) throw ConfigError("pretrain_split: need at least one agent");
  if (per_agent_size < 1) throw ConfigError("pretrain_split: per_agent_size must be >= 1");
  std::vector<int> allowed;
  for (int c = 0; c < ds.num_classes; ++c) {
    if (!excluded_labels.contains(c)) allowed.push_back(c);
  }
  if (allowed.empty()) throw ConfigError("pretrain_split: all labels excluded");

  Rng rng(mix_seed({seed, 0x93e7u}));
  std::vector<std::vector<std::uint32_t>> pools(ds.num_classes);
  for (std::uint32_t i = 0; i < ds.size(); ++i) {
    const int y = ds.labels[i];
    if (!excluded_labels.contains(y)) pools[y].push_back(i);
  }
  for (auto& pool : pools) rng.shuffle(pool);

  // Per-agent draw balanced over allowed labels; the first (size % labels)
  // labels absorb the remainder.
  const std::size_t base = per_agent_size / allowed.size();
  const std::size_t extra = per_agent_size % allowed.size();
  for (std::size_t j = 0; j < allowed.size(); ++j) {
    const std::size_t need = (base + (j < extra ? 1 : 0)) * n_pretrain_agents;
    if (pools[allowed[j]].size() < need) {
      throw DatasetError(std::format("pretrain_split: not enough examples of label {}", allowed[j]));
    }
  }

  PartitionPlan plan;
  plan.scenario = Scenario::PretrainSkew;
  plan.seed = seed;
  std::vector<std::size_t> cursor(ds.num_classes, 0);
  for (int a = 0; a < n_pretrain_agents; ++a) {
    Partition part;
    part.agent_id = a;
    part.rsu_id = -1;
    for (std::size_t j = 0; j < allowed.size(); ++j) {
      const int l = allowed[j];
      const std::size_t take = base + (j < extra ? 1 : 0);
      for (std::size_t k = 0; k < take; ++k) {
        part.example_indices.push_back(pools[l][cursor[l]++]);
      }
      if (take > 0) part.label_profile.insert(l);
    }
    plan.partitions.push_back(std::move(part));
  }
  return plan;
}

std::string PartitionPlan::to_json() const {
  json j;
  j["scenario"] = scenario_name(scenario);
  j["seed"] = seed;
  j["partitions"] = json::array();
  for (const auto& p : partitions) {
    json jp;
    jp["agent_id"] = p.agent_id;
    jp["rsu_id"] = p.rsu_id;
    jp["n_points"] = p.n_points();
    jp["indices"] = p.example_indices;
    jp["label_profile"] = p.label_profile;
    j["partitions"].push_back(std::move(jp));
  }
  return j.dump(2);
}

PartitionPlan PartitionPlan::from_json(const std::string& text) {
  json j = json::parse(text);
  PartitionPlan plan;
  const std::string sc = j.at("scenario").get<std::string>();
  if (sc == "scenario1") plan.scenario = Scenario::ScenarioI;
  else if (sc == "scenario2") plan.scenario = Scenario::ScenarioII;
  else if (sc == "pretrain") plan.scenario = Scenario::PretrainSkew;
  else throw ConfigError(std::format("unknown scenario in plan: {}", sc));
  plan.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& jp : j.at("partitions")) {
    Partition p;
    p.agent_id = jp.at("agent_id").get<int>();
    p.rsu_id = jp.at("rsu_id").get<int>();
    p.example_indices = jp.at("indices").get<std::vector<std::uint32_t>>();
    for (int l : jp.at("label_profile")) p.label_profile.insert(l);
    if (jp.contains("n_points") && jp["n_points"].get<std::size_t>() != p.example_indices.size()) {
      throw ConfigError("partition plan: n_points does not match indices length");
    }
    plan.partitions.push_back(std::move(p));
  }
  return plan;
}

}  // namespace h2fed

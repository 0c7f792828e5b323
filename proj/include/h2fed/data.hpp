#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "h2fed/model.hpp"

namespace h2fed {

// Features are stored as float32 to keep MNIST-sized sets compact; batches
// widen to double on assembly.
struct LabeledDataset {
  std::string name;
  std::size_t feature_dim = 0;
  int num_classes = 10;
  std::vector<float> features;  // n x feature_dim, values in [0, 1]
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  Batch make_batch(std::span<const std::uint32_t> indices) const;
  Batch make_batch_range(std::size_t begin, std::size_t end) const;
};

struct Partition {
  int agent_id = -1;
  int rsu_id = -1;
  std::vector<std::uint32_t> example_indices;
  std::set<int> label_profile;

  std::size_t n_points() const { return example_indices.size(); }
};

enum class Scenario { ScenarioI, ScenarioII, PretrainSkew };

const char* scenario_name(Scenario s);

struct PartitionPlan {
  std::vector<Partition> partitions;
  Scenario scenario = Scenario::ScenarioI;
  std::uint64_t seed = 0;

  std::string to_json() const;
  static PartitionPlan from_json(const std::string& text);
};

// IDX-format reader (big-endian magic + dims, raw bytes). Pixels are
// normalized by 1/255.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Ten well-separated Gaussian blobs in the unit cube, balanced labels.
// Deterministic per seed; a stand-in for MNIST in fast tests.
LabeledDataset synth_dataset(std::size_t n, std::uint64_t seed);

// Label-skew partitioner.
//   ScenarioI:  each RSU owns a labels_per_unit-sized label subset; all of
//               its agents sample from that subset.
//   ScenarioII: every RSU sees all labels; each agent is restricted to
//               labels_per_unit labels.
// Per-agent shard sizes are uniform (capped at what the scarcest label can
// supply). excluded_indices are never assigned (used to reserve the
// pretraining examples).
PartitionPlan partition_label_skew(const LabeledDataset& ds, int n_agents, int n_rsus,
                                   Scenario scenario, int labels_per_unit,
                                   std::uint64_t seed,
                                   const std::vector<std::uint32_t>& excluded_indices = {});

// Pretraining shards: n_pretrain_agents balanced partitions drawn only from
// labels outside excluded_labels, per_agent_size examples each.
PartitionPlan pretrain_split(const LabeledDataset& ds, int n_pretrain_agents,
                             const std::set<int>& excluded_labels, std::uint64_t seed,
                             std::size_t per_agent_size);

}  // namespace h2fed

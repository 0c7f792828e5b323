#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "h2fed/rng.hpp"

namespace h2fed {

// Per-RSU connectivity and computation knobs.
//   csr: probability an agent is connected for the current SCD window
//   scd_seconds: how many global rounds a connection state persists
//   fsr: probability a connected agent completes all requested epochs
//   lar: RSU pre-aggregation rounds per global round
struct HeterogeneityConfig {
  double csr = 1.0;
  int scd_seconds = 1;
  double fsr = 1.0;
  int lar = 1;

  void validate() const;
};

struct RsuCensus {
  int connected = 0;
  int participants = 0;  // all registered agents at the RSU
  double ratio() const { return participants > 0 ? double(connected) / participants : 0.0; }
};

// Bernoulli-with-holding connectivity model. Each RSU owns an independent
// rng stream keyed by (seed, rsu_id); per-agent states are redrawn only on
// SCD window boundaries and are immutable snapshots in between. Epoch
// budgets are pure functions of (seed, round, rsu, agent), so reads are
// safe from parallel workers.
class ConnectivityOracle {
 public:
  ConnectivityOracle(std::uint64_t seed, std::vector<HeterogeneityConfig> per_rsu,
                     std::vector<int> agents_per_rsu);

  // Advances to `round` (0-based). Redraws the states of RSU k when
  // round % scd(k) == 0.
  void resample_connectivity(int round);

  bool connected(int rsu, int agent_slot) const { return states_[rsu][agent_slot] != 0; }
  std::vector<int> connected_slots(int rsu) const;

  // Epochs the agent manages to finish this round: requested_e with
  // probability fsr, otherwise uniform in [1, requested_e - 1]. Never 0; an
  // agent that would finish nothing is modeled as disconnected instead.
  int epoch_budget(int rsu, int agent_slot, int requested_e) const;

  std::vector<RsuCensus> census() const;

  int num_rsus() const { return static_cast<int>(configs_.size()); }
  const HeterogeneityConfig& config(int rsu) const { return configs_[rsu]; }

  // Test hook: overwrite one agent's state until the next resample.
  void force_state(int rsu, int agent_slot, bool connected) {
    states_[rsu][agent_slot] = connected ? 1 : 0;
  }

 private:
  std::uint64_t seed_;
  std::vector<HeterogeneityConfig> configs_;
  std::vector<int> agents_per_rsu_;
  std::vector<Rng> streams_;               // one per RSU
  std::vector<std::vector<char>> states_;  // [rsu][agent_slot]
  int round_ = -1;
};

}  // namespace h2fed

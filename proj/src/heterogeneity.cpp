#include "h2fed/heterogeneity.hpp"

#include <format>

#include "h2fed/errors.hpp"

namespace h2fed {

void HeterogeneityConfig::validate() const {
  if (csr < 0.0 || csr > 1.0) throw ConfigError("csr must be in [0, 1]");
  if (fsr <= 0.0 || fsr > 1.0) throw ConfigError("fsr must be in (0, 1]");
  if (scd_seconds < 1) throw ConfigError("scd_seconds must be >= 1");
  if (lar < 1) throw ConfigError("lar must be >= 1");
}

ConnectivityOracle::ConnectivityOracle(std::uint64_t seed,
                                       std::vector<HeterogeneityConfig> per_rsu,
                                       std::vector<int> agents_per_rsu)
    : seed_(seed), configs_(std::move(per_rsu)), agents_per_rsu_(std::move(agents_per_rsu)) {
  if (configs_.size() != agents_per_rsu_.size() || configs_.empty()) {
    throw ConfigError("connectivity oracle: per-RSU config/agent counts mismatch");
  }
  for (std::size_t k = 0; k < configs_.size(); ++k) {
    configs_[k].validate();
    if (agents_per_rsu_[k] < 1) throw ConfigError("connectivity oracle: each RSU needs >= 1 agent");
    streams_.emplace_back(mix_seed({seed_, 0xc599u, static_cast<std::uint64_t>(k)}));
    states_.emplace_back(agents_per_rsu_[k], 0);
  }
}

void ConnectivityOracle::resample_connectivity(int round) {
  if (round < 0) throw ConfigError("resample_connectivity: round must be >= 0");
  round_ = round;
  for (std::size_t k = 0; k < configs_.size(); ++k) {
    if (round % configs_[k].scd_seconds != 0) continue;  // state persists
    for (auto& s : states_[k]) s = streams_[k].bernoulli(configs_[k].csr) ? 1 : 0;
  }
}

std::vector<int> ConnectivityOracle::connected_slots(int rsu) const {
  std::vector<int> out;
  for (int a = 0; a < agents_per_rsu_[rsu]; ++a) {
    if (states_[rsu][a]) out.push_back(a);
  }
  return out;
}

int ConnectivityOracle::epoch_budget(int rsu, int agent_slot, int requested_e) const {
  if (requested_e < 1) throw ConfigError("epoch_budget: requested epochs must be >= 1");
  const double fsr = configs_[rsu].fsr;
  if (fsr >= 1.0 || requested_e == 1) return requested_e;
  Rng draw(mix_seed({seed_, 0xf52u, static_cast<std::uint64_t>(rsu),
                     static_cast<std::uint64_t>(round_), static_cast<std::uint64_t>(agent_slot)}));
  if (draw.bernoulli(fsr)) return requested_e;
  return 1 + static_cast<int>(draw.uniform_int(static_cast<std::uint64_t>(requested_e - 1)));
}

std::vector<RsuCensus> ConnectivityOracle::census() const {
  std::vector<RsuCensus> out(configs_.size());
  for (std::size_t k = 0; k < configs_.size(); ++k) {
    out[k].participants = agents_per_rsu_[k];
    for (auto s : states_[k]) out[k].connected += s ? 1 : 0;
  }
  return out;
}

}  // namespace h2fed

#include "h2fed/federation.hpp"

#include <cmath>
#include <format>

#include "h2fed/errors.hpp"
#include "h2fed/kernels.hpp"

namespace h2fed {

SelectionSet make_selection(int rsu_id, int round, const std::vector<int>& agent_ids,
                            const std::vector<std::size_t>& shard_sizes) {
  if (agent_ids.size() != shard_sizes.size()) {
    throw ConfigError("make_selection: ids/sizes length mismatch");
  }
  SelectionSet sel;
  sel.rsu_id = rsu_id;
  sel.round = round;
  std::size_t total = 0;
  for (std::size_t s : shard_sizes) total += s;
  if (total == 0 && !agent_ids.empty()) {
    throw ConfigError("make_selection: selected agents hold no data");
  }
  for (std::size_t i = 0; i < agent_ids.size(); ++i) {
    sel.selected_agent_ids.push_back(agent_ids[i]);
    sel.weights[agent_ids[i]] = static_cast<double>(shard_sizes[i]) / static_cast<double>(total);
  }
  return sel;
}

std::uint64_t agent_stream_seed(std::uint64_t run_seed, int round, int agent_id, int inner_round) {
  return mix_seed({run_seed, 0xa6e47u, static_cast<std::uint64_t>(round),
                   static_cast<std::uint64_t>(agent_id), static_cast<std::uint64_t>(inner_round)});
}

ParamVector agent_round(const AgentState& agent, const LabeledDataset& ds,
                        const ParamVector& w_k, const ParamVector& w, int epochs,
                        std::uint64_t run_seed, int round, int inner_round) {
  if (!w_k.same_layout(w)) throw ConfigError("agent_round: anchor layouts differ");
  if (epochs < 1) throw ConfigError("agent_round: epochs must be >= 1");
  Rng rng(agent_stream_seed(run_seed, round, agent.agent_id, inner_round));
  ParamVector params = w_k;  // w_{i,k} <- received roadside model
  for (int e = 0; e < epochs; ++e) {
    params = sgd_epoch(params, ds, agent.shard, w_k, w, agent.prox, agent.lr,
                       agent.batch_size, rng);
  }
  return params;
}

ParamVector rsu_aggregate(const std::map<int, ParamVector>& models, const SelectionSet& sel) {
  if (sel.selected_agent_ids.empty()) {
    throw ConfigError("rsu_aggregate: no connected agents in selection");
  }
  double wsum = 0.0;
  for (const auto& [id, weight] : sel.weights) wsum += weight;
  if (std::abs(wsum - 1.0) > 1e-12) {
    throw ConfigError(std::format("rsu_aggregate: weights sum to {} (want 1)", wsum));
  }

  const ParamVector* first = nullptr;
  for (int id : sel.selected_agent_ids) {
    auto it = models.find(id);
    if (it == models.end()) {
      throw ConfigError(std::format("rsu_aggregate: model for agent {} missing", id));
    }
    if (!first) {
      first = &it->second;
    } else if (!first->same_layout(it->second)) {
      throw ConfigError("rsu_aggregate: model layouts differ");
    }
  }

  ParamVector out(first->arch);
  // Fold in ascending agent-id order (std::map order) so parallel training
  // upstream cannot perturb the floating-point sum.
  for (int id : sel.selected_agent_ids) {
    kernels::axpy(sel.weights.at(id), models.at(id).data(), out.data(), out.size());
  }
  return out;
}

RsuRoundResult rsu_round(const RsuState& rsu, const std::vector<AgentState>& agents,
                         const LabeledDataset& ds, const ParamVector& w,
                         const ConnectivityOracle& oracle, std::uint64_t run_seed, int round) {
  RsuRoundResult out;
  out.w_k = rsu.roadside_params;

  const std::vector<int> slots = oracle.connected_slots(rsu.rsu_id);
  if (slots.empty()) {
    out.stale = true;
    return out;
  }

  for (int inner = 0; inner < rsu.het.lar; ++inner) {
    std::map<int, ParamVector> models;
    std::vector<int> ids;
    std::vector<std::size_t> sizes;
    for (int slot : slots) {
      const AgentState& agent = agents[slot];
      const int budget = oracle.epoch_budget(rsu.rsu_id, slot, agent.epochs);
      models.emplace(agent.agent_id,
                     agent_round(agent, ds, out.w_k, w, budget, run_seed, round, inner));
      ids.push_back(agent.agent_id);
      sizes.push_back(agent.shard.size());
    }
    const SelectionSet sel = make_selection(rsu.rsu_id, round, ids, sizes);
    out.w_k = rsu_aggregate(models, sel);
  }
  return out;
}

ParamVector cloud_aggregate(const std::map<int, ParamVector>& rsu_models,
                            const std::map<int, double>& rsu_weights) {
  if (rsu_models.empty()) throw ConfigError("cloud_aggregate: no RSU models");
  double wsum = 0.0;
  for (const auto& [id, weight] : rsu_weights) {
    if (!rsu_models.contains(id)) {
      throw ConfigError(std::format("cloud_aggregate: model for RSU {} missing", id));
    }
    wsum += weight;
  }
  if (std::abs(wsum - 1.0) > 1e-12) {
    throw ConfigError(std::format("cloud_aggregate: weights sum to {} (want 1)", wsum));
  }
  ParamVector out(rsu_models.begin()->second.arch);
  for (const auto& [id, model] : rsu_models) {
    kernels::axpy(rsu_weights.at(id), model.data(), out.data(), out.size());
  }
  return out;
}

FrameworkPreset make_baseline(const std::string& name, double base_mu1, double base_mu2,
                              int base_lar) {
  const auto need_mu = [&](double v, const char* which) {
    if (v <= 0.0) throw ConfigError(std::format("make_baseline: {} needs {} > 0", name, which));
    return v;
  };
  const auto need_lar = [&] {
    if (base_lar <= 1) throw ConfigError(std::format("make_baseline: {} needs lar > 1", name));
    return base_lar;
  };
  FrameworkPreset p;
  p.name = name;
  if (name == "FedAvg") {
    p.mu1 = 0.0; p.mu2 = 0.0; p.lar = 1;
  } else if (name == "FedProx") {
    // Single-layer proximal: lar = 1 makes w_k == w at round start, so the
    // one active anchor is the global model.
    p.mu1 = 0.0; p.mu2 = need_mu(base_mu2, "mu2"); p.lar = 1;
  } else if (name == "HierFAVG") {
    p.mu1 = 0.0; p.mu2 = 0.0; p.lar = need_lar();
  } else if (name == "H2Fed") {
    p.mu1 = need_mu(base_mu1, "mu1"); p.mu2 = need_mu(base_mu2, "mu2"); p.lar = need_lar();
  } else {
    throw ConfigError(std::format("make_baseline: unknown framework '{}'", name));
  }
  return p;
}

}  // namespace h2fed

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "h2fed/data.hpp"
#include "h2fed/heterogeneity.hpp"
#include "h2fed/model.hpp"

namespace h2fed {

// Static description of one traffic agent: its home RSU, shard, and
// training hyperparameters.
struct AgentState {
  int agent_id = -1;
  int rsu_id = -1;
  std::vector<std::uint32_t> shard;
  ProximalSpec prox;
  int epochs = 1;       // requested E
  double lr = 0.01;
  std::size_t batch_size = 32;
};

struct RsuState {
  int rsu_id = -1;
  ParamVector roadside_params;  // w_k
  std::vector<int> agent_ids;
  HeterogeneityConfig het;
};

struct CloudState {
  ParamVector global_params;  // w
  std::vector<int> rsu_ids;
  int round = 0;
};

// The agents an RSU heard from this round, with shard-size weights
// renormalized over the connected subset.
struct SelectionSet {
  int rsu_id = -1;
  int round = 0;
  std::vector<int> selected_agent_ids;
  std::map<int, double> weights;  // agent_id -> n_{i,k} / n_k(selected)
};

SelectionSet make_selection(int rsu_id, int round, const std::vector<int>& agent_ids,
                            const std::vector<std::size_t>& shard_sizes);

// Seed derivation shared with test oracles so an independent flat
// implementation can reproduce the exact agent training streams.
std::uint64_t agent_stream_seed(std::uint64_t run_seed, int round, int agent_id, int inner_round);

// One agent round: re-initializes from the received w_k and runs `epochs`
// passes with both anchors frozen at their received values.
ParamVector agent_round(const AgentState& agent, const LabeledDataset& ds,
                        const ParamVector& w_k, const ParamVector& w, int epochs,
                        std::uint64_t run_seed, int round, int inner_round);

// Shard-size weighted mean of the received agent models.
ParamVector rsu_aggregate(const std::map<int, ParamVector>& models, const SelectionSet& sel);

struct RsuRoundResult {
  ParamVector w_k;
  bool stale = false;  // connected set empty, previous w_k re-uploaded
};

// `lar` pre-aggregation rounds: the cloud anchor w stays fixed, the RSU
// anchor refreshes after each aggregate. With an empty selection the round
// is flagged stale and the incoming w_k is returned unchanged.
RsuRoundResult rsu_round(const RsuState& rsu, const std::vector<AgentState>& agents,
                         const LabeledDataset& ds, const ParamVector& w,
                         const ConnectivityOracle& oracle, std::uint64_t run_seed, int round);

// n_k / n weighted mean over all RSUs; weights are fixed at plan time from
// registered shard sizes and must sum to 1.
ParamVector cloud_aggregate(const std::map<int, ParamVector>& rsu_models,
                            const std::map<int, double>& rsu_weights);

// Framework family: the baselines are parameter settings of the same
// machinery.
struct FrameworkPreset {
  std::string name;
  double mu1 = 0.0;
  double mu2 = 0.0;
  int lar = 1;
};

// FedAvg: mu = 0, lar = 1. FedProx: mu1 = 0, mu2 > 0, lar = 1 (single
// proximal anchor = the global model). HierFAVG: mu = 0, lar > 1.
// H2Fed: both mu > 0, lar > 1. Base values supply the positive mu / lar.
FrameworkPreset make_baseline(const std::string& name, double base_mu1 = 0.001,
                              double base_mu2 = 0.005, int base_lar = 3);

}  // namespace h2fed

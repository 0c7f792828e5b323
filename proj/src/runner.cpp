#include "h2fed/runner.hpp"

#include <algorithm>
#include <chrono>
#include <format>
#include <numeric>

#include "h2fed/errors.hpp"
#include "h2fed/kernels.hpp"
#include "h2fed/thread_pool.hpp"

namespace h2fed {

namespace {

using Clock = std::chrono::steady_clock;

// Test-set evaluation split into pool-sized chunks; the correct counts are
// integers, so the fold is order-independent.
double parallel_evaluate(const ParamVector& params, const LabeledDataset& test) {
  ThreadPool& pool = ThreadPool::shared();
  const std::size_t chunks = std::min<std::size_t>(pool.size() * 2, test.size());
  if (chunks <= 1) return evaluate(params, test);
  std::vector<std::size_t> correct(chunks, 0);
  const std::size_t step = (test.size() + chunks - 1) / chunks;
  pool.parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * step;
    const std::size_t end = std::min(test.size(), begin + step);
    if (begin >= end) return;
    Batch b = test.make_batch_range(begin, end);
    correct[c] = static_cast<std::size_t>(evaluate(params, b) * static_cast<double>(b.rows) + 0.5);
  });
  const std::size_t total = std::accumulate(correct.begin(), correct.end(), std::size_t{0});
  return static_cast<double>(total) / static_cast<double>(test.size());
}

}  // namespace

DataBundle load_data(const RunConfig& cfg) {
  DataBundle out;
  if (cfg.dataset.type == "mnist") {
    out.train = load_idx(cfg.dataset.dir + "/train-images-idx3-ubyte",
                         cfg.dataset.dir + "/train-labels-idx1-ubyte");
    out.test = load_idx(cfg.dataset.dir + "/t10k-images-idx3-ubyte",
                        cfg.dataset.dir + "/t10k-labels-idx1-ubyte");
  } else {
    // 10:1 train:test split of one deterministic synthetic set.
    const std::size_t total = cfg.dataset.n + cfg.dataset.n / 10;
    LabeledDataset all = synth_dataset(total, cfg.dataset.seed);
    const std::size_t n_train = cfg.dataset.n;
    out.train.name = all.name + "/train";
    out.train.feature_dim = all.feature_dim;
    out.train.num_classes = all.num_classes;
    out.train.features.assign(all.features.begin(),
                              all.features.begin() + n_train * all.feature_dim);
    out.train.labels.assign(all.labels.begin(), all.labels.begin() + n_train);
    out.test.name = all.name + "/test";
    out.test.feature_dim = all.feature_dim;
    out.test.num_classes = all.num_classes;
    out.test.features.assign(all.features.begin() + n_train * all.feature_dim, all.features.end());
    out.test.labels.assign(all.labels.begin() + n_train, all.labels.end());
  }
  if (out.train.feature_dim != static_cast<std::size_t>(cfg.arch.input_dim)) {
    throw ConfigError(std::format("dataset feature dim {} != arch input dim {}",
                                  out.train.feature_dim, cfg.arch.input_dim));
  }
  return out;
}

PretrainResult run_pretrain(const RunConfig& cfg, const DataBundle& data) {
  PretrainResult res;
  if (cfg.pretrain.agents == 0) {
    res.params = init_params(cfg.arch, cfg.seeds.front());
    res.acc_pre = parallel_evaluate(res.params, data.test);
    res.acc_series.push_back(res.acc_pre);
    return res;
  }

  // Every agent, pretraining or federated, holds an equal share of the
  // training set.
  const std::size_t per_agent = data.train.size() / (cfg.agents + cfg.pretrain.agents);
  if (per_agent == 0) throw ConfigError("run_pretrain: dataset too small for the agent count");
  PartitionPlan plan = pretrain_split(data.train, cfg.pretrain.agents,
                                      cfg.pretrain.excluded_labels, cfg.seeds.front(), per_agent);

  std::vector<std::uint32_t> pooled;
  for (const auto& p : plan.partitions) {
    pooled.insert(pooled.end(), p.example_indices.begin(), p.example_indices.end());
  }
  std::sort(pooled.begin(), pooled.end());
  res.used_indices = pooled;

  ParamVector params = init_params(cfg.arch, cfg.seeds.front());
  res.acc_series.push_back(parallel_evaluate(params, data.test));
  Rng rng(mix_seed({cfg.seeds.front(), 0x93e7u, 0x17u}));
  const ProximalSpec no_prox;
  for (int e = 0; e < cfg.pretrain.epoch_cap; ++e) {
    params = sgd_epoch(params, data.train, pooled, params, params, no_prox, cfg.training.lr,
                       cfg.training.batch_size, rng);
    res.acc_series.push_back(parallel_evaluate(params, data.test));
    res.epochs_run = e + 1;
    const int w = cfg.pretrain.plateau_window;
    if (e + 1 > w) {
      const double gain = res.acc_series.back() - res.acc_series[res.acc_series.size() - 1 - w];
      if (gain < cfg.pretrain.plateau_epsilon) break;
    }
  }
  res.params = std::move(params);
  res.acc_pre = res.acc_series.back();
  res.plateau_warning = res.acc_pre < 0.5;
  return res;
}

FrameworkPreset resolve_framework(const RunConfig& cfg) {
  if (cfg.framework == "custom") {
    return {"custom", cfg.prox.mu1, cfg.prox.mu2, cfg.het.lar};
  }
  const double mu1 = cfg.prox.mu1 > 0.0 ? cfg.prox.mu1 : 0.001;
  const double mu2 = cfg.prox.mu2 > 0.0 ? cfg.prox.mu2 : 0.005;
  const int lar = cfg.het.lar > 1 ? cfg.het.lar : 3;
  return make_baseline(cfg.framework, mu1, mu2, lar);
}

PartitionPlan build_federated_plan(const RunConfig& cfg, const LabeledDataset& train,
                                   const std::vector<std::uint32_t>& reserved) {
  if (!cfg.agents_per_rsu.empty()) {
    throw ConfigError("unbalanced agents_per_rsu plans are built via partition_label_skew directly");
  }
  return partition_label_skew(train, cfg.agents, cfg.rsus, cfg.scenario, cfg.labels_per_unit,
                              cfg.dataset.seed, reserved);
}

RunSeries run_federated(const FederatedRunInputs& in) {
  const RunConfig& cfg = *in.cfg;
  const DataBundle& data = *in.data;
  const PartitionPlan& plan = *in.plan;

  const std::vector<int> per_rsu = cfg.resolved_agents_per_rsu();
  const int n_rsus = cfg.rsus;

  // Group agents by home RSU, slot order = ascending agent id.
  std::vector<std::vector<AgentState>> agents(n_rsus);
  for (const auto& part : plan.partitions) {
    if (part.rsu_id < 0 || part.rsu_id >= n_rsus) {
      throw ConfigError("run_federated: partition references unknown RSU");
    }
    AgentState a;
    a.agent_id = part.agent_id;
    a.rsu_id = part.rsu_id;
    a.shard = part.example_indices;
    // Per-RSU prox overrides beat the framework-wide values.
    if (auto it = cfg.prox_rsu.find(part.rsu_id); it != cfg.prox_rsu.end()) {
      a.prox = {it->second.mu1, it->second.mu2};
    } else {
      a.prox = {in.framework.mu1, in.framework.mu2};
    }
    a.epochs = cfg.training.epochs;
    a.lr = cfg.training.lr;
    a.batch_size = cfg.training.batch_size;
    agents[part.rsu_id].push_back(std::move(a));
  }
  std::vector<HeterogeneityConfig> het(n_rsus);
  std::vector<int> agent_counts(n_rsus);
  for (int k = 0; k < n_rsus; ++k) {
    std::sort(agents[k].begin(), agents[k].end(),
              [](const AgentState& a, const AgentState& b) { return a.agent_id < b.agent_id; });
    if (agents[k].empty()) throw ConfigError(std::format("run_federated: RSU {} has no agents", k));
    het[k] = cfg.het_for(k);
    // Named baselines pin LAR everywhere; custom runs keep per-RSU values.
    if (in.framework.name != "custom") het[k].lar = in.framework.lar;
    agent_counts[k] = static_cast<int>(agents[k].size());
  }

  // Cloud weights are fixed at plan time from registered shard sizes.
  std::map<int, double> cloud_weights;
  {
    double total = 0.0;
    std::vector<double> nk(n_rsus, 0.0);
    for (int k = 0; k < n_rsus; ++k) {
      for (const auto& a : agents[k]) nk[k] += static_cast<double>(a.shard.size());
      total += nk[k];
    }
    for (int k = 0; k < n_rsus; ++k) cloud_weights[k] = nk[k] / total;
  }

  ConnectivityOracle oracle(in.seed, het, agent_counts);
  ThreadPool& pool = ThreadPool::shared();

  RunSeries series;
  series.header.config_hash = cfg.hash();
  series.header.seed = in.seed;
  series.header.acc_pre = in.acc_pre;
  series.header.framework = in.framework.name;
  series.header.n_rsus = n_rsus;

  double sq_err_sum = 0.0;
  const auto emit = [&](RoundRecord rec) {
    if (in.centralized && rec.round < static_cast<int>(in.centralized->size())) {
      const double d = rec.global_acc - (*in.centralized)[rec.round];
      sq_err_sum += d * d;
      rec.mse_running = sq_err_sum / static_cast<double>(rec.round + 1);
    }
    series.records.push_back(rec);
    if (in.on_record) in.on_record(series.records.back());
  };

  ParamVector w = in.init;
  {
    RoundRecord r0;
    r0.round = 0;
    const auto t0 = Clock::now();
    r0.global_acc = parallel_evaluate(w, data.test);
    r0.delta_acc = r0.global_acc - in.acc_pre;
    r0.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
    r0.per_rsu_csr.assign(n_rsus, 0.0);
    r0.stale_rsus.assign(n_rsus, false);
    emit(r0);
    if (in.on_model) in.on_model(0, w);
  }

  for (int t = 1; t <= cfg.rounds; ++t) {
    const auto t0 = Clock::now();
    oracle.resample_connectivity(t - 1);
    const auto census = oracle.census();

    std::vector<RsuRoundResult> uploads(n_rsus);
    std::vector<std::string> failures(n_rsus);
    pool.parallel_for(static_cast<std::size_t>(n_rsus), [&](std::size_t k) {
      try {
        RsuState rsu;
        rsu.rsu_id = static_cast<int>(k);
        rsu.roadside_params = w;  // broadcast: old roadside model replaced
        rsu.het = het[k];
        for (const auto& a : agents[k]) rsu.agent_ids.push_back(a.agent_id);
        uploads[k] = rsu_round(rsu, agents[k], data.train, w, oracle, in.seed, t);
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    });
    for (int k = 0; k < n_rsus; ++k) {
      if (!failures[k].empty()) {
        throw RuntimeAbort(std::format("round {}, RSU {}: {}", t, k, failures[k]));
      }
      if (!uploads[k].w_k.all_finite()) {
        throw RuntimeAbort(std::format(
            "non-finite aggregated parameters first appeared at round {}, RSU {}", t, k));
      }
    }

    std::map<int, ParamVector> rsu_models;
    for (int k = 0; k < n_rsus; ++k) rsu_models.emplace(k, std::move(uploads[k].w_k));
    w = cloud_aggregate(rsu_models, cloud_weights);
    if (!w.all_finite()) {
      throw RuntimeAbort(std::format(
          "non-finite aggregated parameters first appeared at round {} (cloud step)", t));
    }

    RoundRecord rec;
    rec.round = t;
    rec.global_acc = parallel_evaluate(w, data.test);
    rec.delta_acc = rec.global_acc - in.acc_pre;
    for (int k = 0; k < n_rsus; ++k) {
      rec.per_rsu_csr.push_back(census[k].ratio());
      rec.stale_rsus.push_back(uploads[k].stale);
    }
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
    emit(rec);
    if (in.on_model) in.on_model(t, w);
  }
  return series;
}

SweepResult run_sweep(const RunConfig& cfg, const DataBundle& data, const PretrainResult& pre,
                      const std::string& axis, const std::vector<double>& values,
                      const std::function<void(const std::string&)>& log) {
  if (axis != "mu1" && axis != "mu2") {
    throw ConfigError(std::format("run_sweep: unknown axis '{}' (want mu1 or mu2)", axis));
  }
  if (values.empty()) throw ConfigError("run_sweep: no values");
  const bool is_mu1 = axis == "mu1";
  if (is_mu1 && std::find(values.begin(), values.end(), 0.0) == values.end()) {
    throw ConfigError("run_sweep: a mu1 sweep must include 0 (AED is undefined without it)");
  }

  PartitionPlan plan = build_federated_plan(cfg, data.train, pre.used_indices);

  SweepResult out;
  out.axis = axis;
  for (double v : values) {
    for (std::uint64_t seed : cfg.seeds) {
      FederatedRunInputs in;
      in.cfg = &cfg;
      in.data = &data;
      in.plan = &plan;
      in.init = pre.params;
      in.acc_pre = pre.acc_pre;
      in.seed = seed;
      in.framework.name = std::format("{}={}", axis, v);
      in.framework.mu1 = is_mu1 ? v : cfg.prox.mu1;
      in.framework.mu2 = is_mu1 ? cfg.prox.mu2 : v;
      in.framework.lar = cfg.het.lar;
      if (log) log(std::format("sweep {}={} seed={} ...", axis, v, seed));
      out.points.push_back({v, seed, run_federated(in)});
    }
  }

  if (is_mu1) {
    for (const auto& p : out.points) {
      if (p.value == 0.0) continue;
      const SweepPoint* zero = nullptr;
      for (const auto& q : out.points) {
        if (q.value == 0.0 && q.seed == p.seed) {
          zero = &q;
          break;
        }
      }
      for (const auto& [round, value] : aed_series(p.series, zero->series)) {
        out.aed_table.push_back({p.value, p.seed, round, value});
      }
    }
  }
  return out;
}

}  // namespace h2fed

#include <cstdio>
#include <filesystem>
#include <format>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "h2fed/config.hpp"
#include "h2fed/errors.hpp"
#include "h2fed/kernels.hpp"
#include "h2fed/metrics.hpp"
#include "h2fed/runner.hpp"
#include "h2fed/snapshot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw h2fed::ConfigError(std::format("cannot open {}", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw h2fed::ConfigError(std::format("cannot write {}", path.string()));
  f << text;
}

void ensure_run_dir(const fs::path& dir, bool overwrite) {
  if (fs::exists(dir)) {
    if (!overwrite && !fs::is_empty(dir)) {
      throw h2fed::ConfigError(std::format(
          "output directory {} already exists; pass --overwrite to reuse it", dir.string()));
    }
  }
  fs::create_directories(dir);
}

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string framework;
  std::string model_path;
  std::string output_dir;
  bool overwrite = false;
};

h2fed::RunConfig load_cfg(const CommonArgs& args) {
  h2fed::RunConfig cfg = h2fed::load_config_file(args.config_path);
  if (!args.preset.empty()) h2fed::apply_preset(cfg, args.preset);
  if (!args.framework.empty()) cfg.framework = args.framework;
  if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
  cfg.validate();
  return cfg;
}

// One federated run per seed, persisted incrementally under
// <dir>/<framework>/seed<N>/.
std::vector<h2fed::RunSeries> run_all_seeds(const h2fed::RunConfig& cfg,
                                            const h2fed::DataBundle& data,
                                            const h2fed::PretrainResult& pre,
                                            const h2fed::FrameworkPreset& fw,
                                            const fs::path& base, bool overwrite) {
  h2fed::PartitionPlan plan = h2fed::build_federated_plan(cfg, data.train, pre.used_indices);
  std::vector<h2fed::RunSeries> out;
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path dir = base / fw.name / std::format("seed{}", seed);
    ensure_run_dir(dir, overwrite);
    write_file(dir / "config.json", cfg.to_json());
    write_file(dir / "plan.json", plan.to_json());

    std::ofstream csv(dir / "metrics.csv", std::ios::trunc);
    csv << h2fed::csv_header_line(cfg.rsus);
    csv.flush();

    h2fed::FederatedRunInputs in;
    in.cfg = &cfg;
    in.data = &data;
    in.plan = &plan;
    in.init = pre.params;
    in.acc_pre = pre.acc_pre;
    in.seed = seed;
    in.framework = fw;
    in.on_record = [&](const h2fed::RoundRecord& rec) {
      std::string row;
      h2fed::append_record_csv(row, rec, cfg.rsus);
      csv << row;
      csv.flush();  // interrupted runs keep a valid prefix
      std::printf("[%s seed=%llu] round %d acc=%.4f%s\n", fw.name.c_str(),
                  static_cast<unsigned long long>(seed), rec.round, rec.global_acc,
                  rec.round == cfg.rounds ? " (final)" : "");
      std::fflush(stdout);
    };
    if (cfg.dump_models) {
      fs::create_directories(dir / "models");
      in.on_model = [&, dir](int round, const h2fed::ParamVector& params) {
        h2fed::save_model(params, (dir / "models" / std::format("round{:04d}.bin", round)).string());
      };
    }

    h2fed::RunSeries series = h2fed::run_federated(in);
    write_file(dir / "header.json", series.header.to_json());
    out.push_back(std::move(series));
  }
  return out;
}

int cmd_pretrain(const CommonArgs& args) {
  h2fed::RunConfig cfg = load_cfg(args);
  const fs::path dir = cfg.output_dir;
  ensure_run_dir(dir, args.overwrite);

  h2fed::DataBundle data = h2fed::load_data(cfg);
  h2fed::PretrainResult pre = h2fed::run_pretrain(cfg, data);
  if (pre.plateau_warning) {
    std::fprintf(stderr, "warning: pretraining plateaued below 0.5 accuracy (%.4f)\n", pre.acc_pre);
  }

  const fs::path model_path = dir / "pretrained.bin";
  h2fed::save_model(pre.params, model_path.string());

  json j;
  j["acc_pre"] = pre.acc_pre;
  j["epochs_run"] = pre.epochs_run;
  j["acc_series"] = pre.acc_series;
  j["config_hash"] = cfg.hash();
  j["model_hash"] = h2fed::file_hash(model_path.string());
  j["model_size_bytes"] = cfg.arch.model_size_bytes();
  j["used_indices"] = pre.used_indices;
  write_file(dir / "pretrain.json", j.dump(2));
  write_file(dir / "config.json", cfg.to_json());

  std::printf("pretrained %d epochs, ACC_pre=%.4f, model=%s (%zu params, %zu bytes as f32)\n",
              pre.epochs_run, pre.acc_pre, model_path.c_str(), cfg.arch.param_count(),
              cfg.arch.model_size_bytes());
  return kExitOk;
}

h2fed::PretrainResult load_pretrained(const h2fed::RunConfig& cfg, const std::string& model_path) {
  h2fed::PretrainResult pre;
  pre.params = h2fed::load_model(model_path);
  const fs::path meta = fs::path(model_path).parent_path() / "pretrain.json";
  if (fs::exists(meta)) {
    json j = json::parse(slurp(meta.string()));
    pre.acc_pre = j.at("acc_pre").get<double>();
    pre.used_indices = j.at("used_indices").get<std::vector<std::uint32_t>>();
    const std::string want = j.value("model_hash", "");
    if (!want.empty() && want != h2fed::file_hash(model_path)) {
      throw h2fed::ConfigError("pretrained model hash does not match pretrain.json");
    }
  } else {
    throw h2fed::ConfigError(
        std::format("missing {} next to the model (needed for ACC_pre and reserved indices)",
                    meta.string()));
  }
  return pre;
}

int cmd_run(const CommonArgs& args) {
  h2fed::RunConfig cfg = load_cfg(args);
  if (args.model_path.empty()) throw h2fed::ConfigError("run: --model is required");
  h2fed::DataBundle data = h2fed::load_data(cfg);
  h2fed::PretrainResult pre = load_pretrained(cfg, args.model_path);
  const h2fed::FrameworkPreset fw = h2fed::resolve_framework(cfg);

  const fs::path base = cfg.output_dir;
  fs::create_directories(base);
  auto series = run_all_seeds(cfg, data, pre, fw, base, args.overwrite);

  double mean_final = 0.0;
  for (const auto& s : series) mean_final += s.records.back().global_acc;
  mean_final /= static_cast<double>(series.size());
  std::printf("%s: mean final accuracy over %zu seed(s) = %.4f (ACC_pre %.4f)\n",
              fw.name.c_str(), series.size(), mean_final, pre.acc_pre);
  return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::string& axis, std::vector<double> values) {
  h2fed::RunConfig cfg = load_cfg(args);
  if (args.model_path.empty()) throw h2fed::ConfigError("sweep: --model is required");
  h2fed::DataBundle data = h2fed::load_data(cfg);
  h2fed::PretrainResult pre = load_pretrained(cfg, args.model_path);

  const fs::path base = cfg.output_dir;
  ensure_run_dir(base, args.overwrite);

  h2fed::SweepResult res = h2fed::run_sweep(
      cfg, data, pre, axis, values,
      [](const std::string& line) { std::printf("%s\n", line.c_str()); std::fflush(stdout); });

  for (const auto& p : res.points) {
    const fs::path dir = base / std::format("{}_{:g}", axis, p.value) / std::format("seed{}", p.seed);
    fs::create_directories(dir);
    write_file(dir / "metrics.csv", h2fed::series_to_csv(p.series));
    write_file(dir / "header.json", p.series.header.to_json());
  }
  write_file(base / "config.json", cfg.to_json());

  if (!res.aed_table.empty()) {
    std::string csv = "value,seed,round,aed\n";
    for (const auto& r : res.aed_table) {
      csv += std::format("{:g},{},{},{:.17g}\n", r.value, r.seed, r.round, r.aed);
    }
    write_file(base / "aed_table.csv", csv);
  }

  const std::size_t window = std::max<std::size_t>(1, (cfg.rounds + 1) / 4);
  for (double v : values) {
    double mstd = 0.0, mfinal = 0.0;
    int n = 0;
    for (const auto& p : res.points) {
      if (p.value != v) continue;
      mstd += h2fed::stability_stats(p.series, window).post_convergence_std;
      mfinal += p.series.records.back().global_acc;
      ++n;
    }
    std::printf("%s=%g: mean final=%.4f, mean post-convergence std=%.5f (%d seeds)\n", axis.c_str(),
                v, mfinal / n, mstd / n, n);
  }
  return kExitOk;
}

int cmd_report(const std::string& run_dir) {
  // Recompute metrics from persisted CSVs and check the ACC identity.
  int checked = 0;
  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (entry.path().filename() != "metrics.csv") continue;
    const fs::path dir = entry.path().parent_path();
    h2fed::RunHeader header = h2fed::RunHeader::from_json(slurp((dir / "header.json").string()));
    h2fed::RunSeries series = h2fed::series_from_csv(slurp(entry.path().string()), header);
    for (const auto& rec : series.records) {
      if (rec.delta_acc != rec.global_acc - header.acc_pre) {
        throw h2fed::RuntimeAbort(std::format("{}: delta_acc identity violated at round {}",
                                              entry.path().string(), rec.round));
      }
    }
    const std::size_t window = std::max<std::size_t>(1, series.records.size() / 4);
    const auto st = h2fed::stability_stats(series, window);
    std::printf("%s [%s seed=%llu]: rounds=%zu final=%.4f dACC=%.4f std=%.5f drawdown=%.5f\n",
                dir.string().c_str(), header.framework.c_str(),
                static_cast<unsigned long long>(header.seed), series.records.size() - 1,
                series.records.back().global_acc, series.records.back().delta_acc,
                st.post_convergence_std, st.max_drawdown);
    ++checked;
  }
  if (checked == 0) throw h2fed::ConfigError(std::format("no metrics.csv under {}", run_dir));
  std::printf("report: %d series verified\n", checked);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical federated learning simulator for C-ITS (H2-Fed family)"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string axis = "mu1";
  std::vector<double> values;
  std::string report_dir;

  auto add_common = [&](CLI::App* sub, bool needs_model) {
    sub->add_option("-c,--config", args.config_path, "run config JSON")->required();
    sub->add_option("-p,--preset", args.preset,
                    "experiment preset: scenario1 scenario2 mu1-sweep mu2-sweep baselines");
    sub->add_option("-o,--output", args.output_dir, "override output directory");
    sub->add_flag("--overwrite", args.overwrite, "reuse an existing output directory");
    if (needs_model) {
      sub->add_option("-m,--model", args.model_path, "pretrained model binary")->required();
    }
  };

  CLI::App* pre = app.add_subcommand("pretrain", "centrally pretrain the label-excluded model");
  add_common(pre, false);

  CLI::App* run = app.add_subcommand("run", "federated run (one per seed)");
  add_common(run, true);
  run->add_option("-f,--framework", args.framework, "FedAvg | FedProx | HierFAVG | H2Fed | custom");

  CLI::App* sweep = app.add_subcommand("sweep", "sweep mu1 or mu2 across runs, emit AED table");
  add_common(sweep, true);
  sweep->add_option("--axis", axis, "mu1 or mu2")->required();
  sweep->add_option("--values", values, "sweep values")->required()->delimiter(',');

  CLI::App* report = app.add_subcommand("report", "recompute metrics from persisted CSVs");
  report->add_option("-d,--dir", report_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (pre->parsed()) return cmd_pretrain(args);
    if (run->parsed()) return cmd_run(args);
    if (sweep->parsed()) return cmd_sweep(args, axis, values);
    if (report->parsed()) return cmd_report(report_dir);
  } catch (const h2fed::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const h2fed::DatasetError& e) {
    std::fprintf(stderr, "dataset error: %s\n", e.what());
    return kExitConfig;
  } catch (const h2fed::RuntimeAbort& e) {
    std::fprintf(stderr, "runtime abort: %s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

// Experiment driver: scenario generation, baseline simulation, training,
// noise ablation and metrics plotting.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "rowrl/csv.hpp"
#include "rowrl/experiment.hpp"
#include "rowrl/svg.hpp"

namespace fs = std::filesystem;
using namespace rowrl;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return ExperimentConfig{};
  return parse_config(read_text(path));
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stoull(tok));
  return out;
}

int cmd_gen(const ExperimentConfig& cfg, const std::string& out_dir) {
  RoadNetwork net;
  try {
    net = cfg.build_network();  // validates the scenario geometry
  } catch (const DomainError& e) {
    std::cerr << "invalid scenario: " << e.what() << "\n";
    return kExitUsage;
  }
  const DemandSchedule sched =
      synth_demand(net, cfg.demand_profile(), cfg.slots, cfg.schedule_seed);
  const fs::path dir = run_directory(cfg, out_dir);
  write_text_atomic(dir / "network.csv", export_edge_list(net));
  write_text_atomic(dir / "demand.csv", export_demand(sched));

  long veh = 0, ped = 0;
  for (const auto& row : sched.veh_trips)
    for (int c : row) veh += c;
  for (const auto& row : sched.ped_trips)
    for (int c : row) ped += c;
  const double hours = cfg.slots * cfg.slot_seconds / 3600.0;
  std::printf("scenario %s: |K| = %d edges, |T| = %d slots, %zu OD pairs\n",
              cfg.kind.c_str(), net.edge_count(), cfg.slots, sched.ods.size());
  std::printf("mean rates per OD: %.2f veh/h, %.2f ped/h\n",
              veh / (hours * sched.ods.size()), ped / (hours * sched.ods.size()));
  std::printf("wrote %s and %s\n", (dir / "network.csv").c_str(),
              (dir / "demand.csv").c_str());
  return 0;
}

int cmd_baseline(const ExperimentConfig& cfg, const std::string& out_dir,
                 bool trace) {
  std::string trace_text = trace_header();
  const EpochMetrics m = run_baseline(cfg, trace ? &trace_text : nullptr);
  const fs::path dir = run_directory(cfg, out_dir);
  write_text_atomic(dir / "baseline.csv",
                    std::string(kMetricsHeader) + "\n" + format_metrics_row(m) +
                        "\n");
  if (trace) write_text_atomic(dir / "baseline_trace.csv", trace_text);
  std::printf("%s\n%s\n", kMetricsHeader, format_metrics_row(m).c_str());
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& out_dir,
              bool trace, bool quiet) {
  const TrainResult result = run_train_experiment(
      cfg, out_dir, trace, [&](const EpochMetrics& m) {
        if (!quiet) std::printf("%s\n", format_metrics_row(m).c_str());
      });
  std::printf("wrote %s (%zu epochs, %.1f ms)\n", result.metrics_csv.c_str(),
              result.rows.size(), result.wall_ms_total);
  return 0;
}

int cmd_ablate(ExperimentConfig cfg, const std::string& out_dir,
               const std::vector<double>& sigmas,
               const std::vector<std::uint64_t>& seeds) {
  if (sigmas.size() < 2) {
    std::cerr << "ablate-noise needs at least two sigma values\n";
    return kExitUsage;
  }
  std::string combined = std::string(kMetricsHeader) + "\n";
  std::string summary = "algo,sigma0,seed,epochs_to_95pct,final_reward\n";
  for (double sigma : sigmas) {
    for (std::uint64_t seed : seeds) {
      cfg.sigma0 = sigma;
      cfg.train_seed = seed;
      const TrainResult r = run_train_experiment(cfg, out_dir, false);
      std::vector<double> rewards;
      for (const EpochMetrics& m : r.rows) {
        combined += format_metrics_row(m) + "\n";
        rewards.push_back(m.epoch_reward);
      }
      double final_level = 0.0;
      const int tail = std::min<int>(10, rewards.size());
      for (int i = static_cast<int>(rewards.size()) - tail;
           i < static_cast<int>(rewards.size()); ++i)
        final_level += rewards[i];
      final_level /= tail;
      char line[160];
      std::snprintf(line, sizeof line, "%s,%.9g,%llu,%d,%.9g\n",
                    cfg.algo.c_str(), sigma,
                    static_cast<unsigned long long>(seed),
                    epochs_to_fraction_of_final(rewards), final_level);
      summary += line;
      std::printf("sigma0 %.2f seed %llu: epochs_to_95pct = %d\n", sigma,
                  static_cast<unsigned long long>(seed),
                  epochs_to_fraction_of_final(rewards));
    }
  }
  const fs::path dir = fs::path(out_dir) / ("ablate-" + config_hash(cfg));
  write_text_atomic(dir / "ablation.csv", combined);
  write_text_atomic(dir / "summary.csv", summary);
  std::printf("wrote %s\n", (dir / "ablation.csv").c_str());
  return 0;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out,
             const std::string& metric) {
  if (inputs.empty()) {
    std::cerr << "plot needs at least one metrics CSV\n";
    return kExitUsage;
  }
  std::vector<PlotSeries> series;
  for (const std::string& path : inputs) {
    const CsvTable t = parse_csv(read_text(path));
    if (t.rows.empty()) {
      std::cerr << path << ": no data rows\n";
      return kExitUsage;
    }
    const int epoch_col = t.column("epoch");
    const int val_col = t.column(metric);
    const int algo_col = t.column("algo");
    const int sigma_col = t.column("sigma0");
    PlotSeries s;
    s.label = t.rows[0][algo_col] + " sigma0=" + t.rows[0][sigma_col];
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      s.points.emplace_back(t.number(r, epoch_col), t.number(r, val_col));
    series.push_back(std::move(s));
  }
  write_text_atomic(out, render_line_chart(series, "epoch", metric));
  std::printf("wrote %s (%zu series)\n", out.c_str(), series.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic right-of-way control experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, out_dir = "runs";
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "experiment config file");
  app.add_option("--seed", seed, "override the training seed");
  app.add_option("--out-dir", out_dir, "output directory");

  auto* gen = app.add_subcommand("gen", "write network and demand files");

  auto* baseline =
      app.add_subcommand("baseline", "simulate the fixed template layout");
  bool baseline_trace = false;
  baseline->add_flag("--trace", baseline_trace, "write per-slot observations");

  auto* train = app.add_subcommand("train", "run DDPG or MADDPG training");
  std::string algo;
  std::optional<double> sigma0;
  std::optional<int> epochs;
  bool train_trace = false, quiet = false;
  train->add_option("--algo", algo, "ddpg or maddpg");
  train->add_option("--sigma0", sigma0, "initial noise standard deviation");
  train->add_option("--epochs", epochs, "override epoch count");
  train->add_flag("--trace", train_trace, "write per-slot observations");
  train->add_flag("--quiet", quiet, "suppress per-epoch rows");

  auto* ablate =
      app.add_subcommand("ablate-noise", "train across a sigma0 grid");
  std::string sigmas_text = "0.2,0.4,0.6", seeds_text = "1";
  std::optional<int> ablate_epochs;
  std::string ablate_algo;
  ablate->add_option("--sigmas", sigmas_text, "comma-separated sigma0 values");
  ablate->add_option("--seeds", seeds_text, "comma-separated training seeds");
  ablate->add_option("--epochs", ablate_epochs, "override epoch count");
  ablate->add_option("--algo", ablate_algo, "ddpg or maddpg");

  auto* plot = app.add_subcommand("plot", "render metrics CSVs as an SVG");
  std::vector<std::string> plot_inputs;
  std::string plot_out = "plot.svg", plot_metric = "epoch_reward";
  plot->add_option("inputs", plot_inputs, "metrics CSV files");
  plot->add_option("--out", plot_out, "output SVG path");
  plot->add_option("--metric", plot_metric, "column to plot");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.train_seed = *seed;
    if (gen->parsed()) return cmd_gen(cfg, out_dir);
    if (baseline->parsed()) return cmd_baseline(cfg, out_dir, baseline_trace);
    if (train->parsed()) {
      if (!algo.empty()) cfg.algo = algo;
      if (sigma0) cfg.sigma0 = *sigma0;
      if (epochs) cfg.epochs = *epochs;
      cfg.parse_algo();  // validate before any work
      return cmd_train(cfg, out_dir, train_trace, quiet);
    }
    if (ablate->parsed()) {
      if (!ablate_algo.empty()) cfg.algo = ablate_algo;
      if (ablate_epochs) cfg.epochs = *ablate_epochs;
      cfg.parse_algo();
      return cmd_ablate(cfg, out_dir, parse_double_list(sigmas_text),
                        parse_seed_list(seeds_text));
    }
    if (plot->parsed()) return cmd_plot(plot_inputs, plot_out, plot_metric);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rowrl/config.hpp"
#include "rowrl/trainer.hpp"

namespace rowrl {

// Write-then-rename so interrupted runs never leave torn files.
inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  if (!path.parent_path().empty())
    std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::filesystem::path run_directory(const ExperimentConfig& cfg,
                                           const std::string& out_dir) {
  return std::filesystem::path(out_dir) /
         (config_hash(cfg) + "-s" + std::to_string(cfg.train_seed));
}

inline std::string trace_header() {
  return "slot,edge,h,veh_count,ped_count,veh_ratio_sum,ped_ratio_sum\n";
}

inline void append_trace_rows(std::string& out, const SlotSummary& sum) {
  char line[160];
  for (const auto& per_edge : sum.per_edge) {
    for (const ObservationRecord& r : per_edge) {
      std::snprintf(line, sizeof line, "%d,%d,%d,%d,%d,%.9g,%.9g\n", sum.slot,
                    r.edge, r.h, r.veh_count, r.ped_count,
                    r.veh_speed_ratio_sum, r.ped_speed_ratio_sum);
      out += line;
    }
  }
}

struct TrainResult {
  std::filesystem::path dir;
  std::filesystem::path metrics_csv;
  std::vector<EpochMetrics> rows;
  double wall_ms_total = 0.0;
};

// The full train pipeline: scenario from config, seeded schedule, training,
// metrics CSV plus checkpoints under the run directory.
inline TrainResult run_train_experiment(
    const ExperimentConfig& cfg, const std::string& out_dir,
    bool write_trace = false,
    const std::function<void(const EpochMetrics&)>& on_epoch = nullptr) {
  const RoadNetwork net = cfg.build_network();
  const DemandSchedule sched =
      synth_demand(net, cfg.demand_profile(), cfg.slots, cfg.schedule_seed);
  Trainer trainer(cfg.parse_algo(), net, sched, cfg.env_params(),
                  cfg.hyperparams());

  std::string trace = trace_header();
  if (write_trace) {
    trainer.set_step_observer([&trace](const RowEnv::StepResult& step) {
      append_trace_rows(trace, step.summary);
    });
  }

  TrainResult result;
  const auto t0 = std::chrono::steady_clock::now();
  result.rows = trainer.run_training(on_epoch);
  result.wall_ms_total = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

  result.dir = run_directory(cfg, out_dir);
  std::string csv = std::string(kMetricsHeader) + "\n";
  for (const EpochMetrics& m : result.rows) csv += format_metrics_row(m) + "\n";
  result.metrics_csv = result.dir / "metrics.csv";
  write_text_atomic(result.metrics_csv, csv);
  write_text_atomic(result.dir / "config.ini", serialize_config(cfg));
  for (const auto& [name, content] : trainer.checkpoints())
    write_text_atomic(result.dir / name, content);
  if (write_trace) write_text_atomic(result.dir / "trace.csv", trace);
  return result;
}

// Fixed-layout comparator: simulates the whole horizon with the template's
// initial ROW split and reports one metrics row.
inline EpochMetrics run_baseline(const ExperimentConfig& cfg,
                                 std::string* trace_out = nullptr) {
  const RoadNetwork net = cfg.build_network();
  const DemandSchedule sched =
      synth_demand(net, cfg.demand_profile(), cfg.slots, cfg.schedule_seed);
  RowEnv env(net, sched, cfg.env_params());
  const auto t0 = std::chrono::steady_clock::now();
  env.reset(0);
  const int n = env.edge_count();
  std::vector<std::vector<double>> rewards(n);
  double veh_ratio = 0.0, ped_ratio = 0.0;
  long veh_obs = 0, ped_obs = 0;
  double lane_sum = 0.0;
  bool done = false;
  while (!done) {
    const RowEnv::StepResult step = env.step(nullptr);
    for (int k = 0; k < n; ++k) {
      rewards[k].push_back(step.rewards[k].amplified);
      lane_sum += env.world().edge(k).lanes;
      for (const ObservationRecord& r : step.summary.per_edge[k]) {
        veh_ratio += r.veh_speed_ratio_sum;
        ped_ratio += r.ped_speed_ratio_sum;
        veh_obs += r.veh_count;
        ped_obs += r.ped_count;
      }
    }
    if (trace_out) append_trace_rows(*trace_out, step.summary);
    done = step.done;
  }
  EpochMetrics m;
  m.epoch = 0;
  m.algo = "baseline";
  m.scenario = cfg.kind;
  m.seed = cfg.train_seed;
  m.sigma0 = 0.0;
  m.start_slot = 0;
  m.epoch_reward = epoch_reward(rewards, 0, cfg.slots);
  m.mean_action = 0.0;  // no controlled actions in baseline mode
  m.mean_lanes = lane_sum / (static_cast<double>(cfg.slots) * n);
  m.mean_drive_speed_mps = veh_obs ? kMaxVehicleSpeed * veh_ratio / veh_obs : 0.0;
  m.mean_walk_speed_mps = ped_obs ? kMaxWalkSpeed * ped_ratio / ped_obs : 0.0;
  m.mean_critic_loss = 0.0;
  if (cfg.hyperparams().record_wall) {
    m.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  }
  return m;
}

// First epoch whose reward reaches `frac` of the final level (the mean over
// the trailing `tail` epochs); the epoch count if never reached.
inline int epochs_to_fraction_of_final(const std::vector<double>& rewards,
                                       double frac = 0.95, int tail = 10) {
  if (rewards.empty()) throw DomainError("epochs_to_fraction: no rewards");
  const int n = static_cast<int>(rewards.size());
  const int t = std::min(tail, n);
  double final_level = 0.0;
  for (int i = n - t; i < n; ++i) final_level += rewards[i];
  final_level /= t;
  const double threshold = frac * final_level;
  for (int i = 0; i < n; ++i)
    if (rewards[i] >= threshold) return i;
  return n;
}

}  // namespace rowrl

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "rowrl/common.hpp"
#include "rowrl/sim.hpp"

namespace rowrl {

// ---- Action mapping ---------------------------------------------------------
// A raw policy output is clipped to the feasible sidewalk-proportion interval,
// converted to the largest lane count the residual carriageway can hold, and
// then snapped so the leftover width returns to the sidewalk.

inline double clip_lower_bound(double w) { return kMinSidewalk / w; }
inline double clip_upper_bound(double w, double psi) {
  return 1.0 - psi - (kLaneWidth + kLaneBuffer) / w;
}

inline double clip_action(double raw, double w, double psi) {
  const double lo = clip_lower_bound(w);
  const double hi = clip_upper_bound(w, psi);
  if (lo > hi + kFeasibilityEps)
    throw DomainError("clip_action: edge too narrow for any feasible split");
  return std::min(std::max(raw, lo), hi);
}

// Largest lane count whose required width (3.5 l + 0.5) fits the carriageway
// left by sidewalk proportion `a`; at least one lane is always kept.
inline int choose_lanes(double a, double w, double psi) {
  const double carriageway = (1.0 - a - psi) * w;
  const int l = static_cast<int>(
      std::floor((carriageway - kLaneBuffer + kFeasibilityEps) / kLaneWidth));
  return std::max(1, l);
}

// All residual width after lanes and the marking buffer goes to the sidewalk.
inline double snap_beta(int lanes, double w, double psi) {
  if (lanes < 1) throw DomainError("snap_beta: lanes must be >= 1");
  const double beta = 1.0 - psi - (kLaneWidth * lanes + kLaneBuffer) / w;
  if (beta < kMinSidewalk / w - kFeasibilityEps)
    throw DomainError("snap_beta: sidewalk below minimum width");
  return beta;
}

struct RowAction {
  int edge = 0;
  double raw = 0.0;
  double clipped = 0.0;
  int lanes = 1;
  double snapped_beta = 0.0;
};

inline RowAction resolve_action(int edge_id, double raw, const EdgeSpec& spec) {
  RowAction a;
  a.edge = edge_id;
  a.raw = raw;
  a.clipped = clip_action(raw, spec.width_m, spec.facility_ratio);
  a.lanes = choose_lanes(a.clipped, spec.width_m, spec.facility_ratio);
  a.snapped_beta = snap_beta(a.lanes, spec.width_m, spec.facility_ratio);
  return a;
}

// ---- State aggregation ------------------------------------------------------

struct RowState {
  int edge = 0;
  double mean_veh_count = 0.0;
  double mean_ped_count = 0.0;
};

inline RowState aggregate_state(const std::vector<ObservationRecord>& records) {
  if (records.empty()) throw DomainError("aggregate_state: no observations");
  RowState s;
  s.edge = records.front().edge;
  for (const ObservationRecord& r : records) {
    s.mean_veh_count += r.veh_count;
    s.mean_ped_count += r.ped_count;
  }
  s.mean_veh_count /= static_cast<double>(records.size());
  s.mean_ped_count /= static_cast<double>(records.size());
  return s;
}

// ---- Rewards ----------------------------------------------------------------

enum class RewardVariant { squared, as_printed };

struct RewardBreakdown {
  int edge = 0;
  double g_veh = 0.0;
  double g_ped = 0.0;
  double g_act = 0.0;
  double g = 0.0;
  double amplified = 0.0;
};

// Immediate reward for one edge over one slot's observations. A speed-ratio
// term with no observed agents evaluates to 1 (nobody was impeded).
inline RewardBreakdown immediate_reward(
    const std::vector<ObservationRecord>& records, double beta, int lanes,
    double psi, RewardVariant variant = RewardVariant::squared,
    double amplifier = 1000.0) {
  if (records.empty()) throw DomainError("immediate_reward: no observations");
  double veh_ratio = 0.0, ped_ratio = 0.0;
  long veh_obs = 0, ped_obs = 0;
  for (const ObservationRecord& r : records) {
    veh_ratio += r.veh_speed_ratio_sum;
    ped_ratio += r.ped_speed_ratio_sum;
    veh_obs += r.veh_count;
    ped_obs += r.ped_count;
  }
  const double m_veh = veh_obs > 0 ? veh_ratio / veh_obs : 1.0;
  const double m_ped = ped_obs > 0 ? ped_ratio / ped_obs : 1.0;

  RewardBreakdown r;
  r.edge = records.front().edge;
  if (variant == RewardVariant::squared) {
    r.g_veh = m_veh * m_veh;
    r.g_ped = m_ped * m_ped;
  } else {
    r.g_veh = m_veh * beta * lanes;
    r.g_ped = m_ped * beta * lanes;
  }
  r.g_act = beta + psi;
  r.g = r.g_veh + r.g_ped + r.g_act;
  r.amplified = amplifier * r.g;
  return r;
}

enum class RewardMode { centralised, distributive };

// Centralised learning rewards every edge with the network-wide mean;
// distributive learning leaves per-edge rewards untouched.
inline std::vector<double> redistribute_rewards(std::vector<double> rewards,
                                                RewardMode mode) {
  if (rewards.empty())
    throw DomainError("redistribute_rewards: empty reward list");
  if (mode == RewardMode::centralised) {
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    for (double& r : rewards) r = mean;
  }
  return rewards;
}

// ---- Episode management -----------------------------------------------------

struct EpisodeSpec {
  int epoch = 0;
  int start_slot = 0;
  int horizon = 48;
  double discount = 0.99;
};

// First 20 epochs start at slot 0; later ones at a random slot in
// [1, horizon-2] so state-space exploration is not biased to one opening.
inline int reset_start_slot(int epoch, int horizon, std::mt19937_64& rng) {
  if (horizon < 3) throw DomainError("reset_start_slot: horizon must be >= 3");
  if (epoch < 20) return 0;
  return uniform_int(rng, 1, horizon - 2);
}

// Mean amplified reward over all edges and the slots actually simulated.
inline double epoch_reward(
    const std::vector<std::vector<double>>& per_edge_slot_rewards,
    int start_slot, int horizon) {
  if (per_edge_slot_rewards.empty())
    throw DomainError("epoch_reward: no edges");
  const std::size_t expected = static_cast<std::size_t>(horizon - start_slot);
  double total = 0.0;
  for (const auto& row : per_edge_slot_rewards) {
    if (row.size() != expected)
      throw DomainError("epoch_reward: incomplete slot coverage");
    for (double r : row) total += r;
  }
  return total / (static_cast<double>(expected) * per_edge_slot_rewards.size());
}

// ---- Environment ------------------------------------------------------------

struct EnvParams {
  int slot_seconds = 1800;
  int obs_interval_seconds = 10;
  double veh_norm = 50.0;   // state normalizers
  double ped_norm = 100.0;
  RewardVariant reward_variant = RewardVariant::squared;
  double amplifier = 1000.0;
  int horizon = 48;
};

// Slot-level control loop around the simulator: actions in, aggregated
// states and rewards out.
class RowEnv {
 public:
  RowEnv(const RoadNetwork& net, DemandSchedule schedule, EnvParams params = {},
         SimParams sim_params = {})
      : world_(net, sim_params), sched_(std::move(schedule)), par_(params) {
    if (sched_.slots != par_.horizon)
      throw DomainError("RowEnv: schedule horizon mismatch");
  }

  int edge_count() const { return world_.edge_count(); }
  const EnvParams& params() const { return par_; }
  const World& world() const { return world_; }
  int current_slot() const { return slot_; }

  using StateVec = std::array<double, 2>;

  StateVec normalize(const RowState& s) const {
    return {s.mean_veh_count / par_.veh_norm, s.mean_ped_count / par_.ped_norm};
  }

  // Begin an episode at `start_slot` on an empty network.
  std::vector<StateVec> reset(int start_slot) {
    if (start_slot < 0 || start_slot >= par_.horizon)
      throw DomainError("RowEnv::reset: start slot out of range");
    world_.reset();
    slot_ = start_slot;
    return std::vector<StateVec>(world_.edge_count(), StateVec{0.0, 0.0});
  }

  struct StepResult {
    std::vector<StateVec> next_states;
    std::vector<RowState> raw_states;
    std::vector<RowAction> actions;
    std::vector<RewardBreakdown> rewards;
    SlotSummary summary;
    bool done = false;
  };

  // Simulates the current slot. With `raw_actions == nullptr` the current
  // layout is held (baseline mode); otherwise actions are resolved through
  // clip / choose_lanes / snap_beta and applied at the slot boundary.
  StepResult step(const std::vector<double>* raw_actions) {
    if (slot_ >= par_.horizon) throw DomainError("RowEnv::step: episode over");
    const int n = world_.edge_count();
    StepResult out;
    std::vector<RowConfig> configs;
    if (raw_actions) {
      if (static_cast<int>(raw_actions->size()) != n)
        throw DomainError("RowEnv::step: one action per edge required");
      for (int k = 0; k < n; ++k) {
        const RowAction a =
            resolve_action(k, (*raw_actions)[k], world_.network().edges[k]);
        out.actions.push_back(a);
        configs.push_back(RowConfig{a.snapped_beta, a.lanes});
      }
    }
    out.summary = world_.run_slot(sched_, slot_, raw_actions ? &configs : nullptr,
                                  par_.slot_seconds, par_.obs_interval_seconds);
    for (int k = 0; k < n; ++k) {
      const RowState s = aggregate_state(out.summary.per_edge[k]);
      out.raw_states.push_back(s);
      out.next_states.push_back(normalize(s));
      const EdgeRuntime& e = world_.edge(k);
      out.rewards.push_back(immediate_reward(
          out.summary.per_edge[k], e.sidewalk_ratio, e.lanes,
          e.spec->facility_ratio, par_.reward_variant, par_.amplifier));
    }
    out.done = (slot_ == par_.horizon - 1);
    slot_ += 1;
    return out;
  }

 private:
  World world_;
  DemandSchedule sched_;
  EnvParams par_;
  int slot_ = 0;
};

}  // namespace rowrl

#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rowrl/common.hpp"
#include "rowrl/env.hpp"
#include "rowrl/mlp.hpp"
#include "rowrl/noise.hpp"
#include "rowrl/replay.hpp"
#include "rowrl/thread_pool.hpp"

namespace rowrl {

enum class Algo { ddpg, maddpg };

inline std::string algo_name(Algo a) {
  return a == Algo::ddpg ? "ddpg" : "maddpg";
}

struct Hyperparams {
  int epochs = 150;
  int minibatch = 64;
  std::size_t buffer_capacity = 100000;
  double eta = 0.005;         // delayed copying coefficient
  double gamma = 0.99;        // discount
  double noise_decay = 0.99;
  double sigma0 = 0.2;
  double noise_scale = 1.0;   // 1/3 honours the 3-std envelope reading
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::uint64_t seed = 1;
  bool record_wall = true;

  void validate() const {
    if (!(gamma > 0 && gamma < 1)) throw ConfigError("gamma must be in (0,1)");
    if (!(noise_decay > 0 && noise_decay < 1))
      throw ConfigError("noise_decay must be in (0,1)");
    if (sigma0 <= 0) throw ConfigError("sigma0 must be positive");
    if (minibatch < 1) throw ConfigError("minibatch must be positive");
    if (buffer_capacity < static_cast<std::size_t>(minibatch))
      throw ConfigError("buffer capacity below minibatch size");
    if (epochs < 1) throw ConfigError("epochs must be positive");
  }
};

// ---- Learning-step primitives ------------------------------------------------

inline double select_action(const Mlp& actor, const std::array<double, 2>& s,
                            NoiseProcess& noise) {
  const std::vector<double> mu = forward(actor, {s[0], s[1]});
  return mu[0] + noise.sample();
}

inline double td_target(const TransitionTuple& t, const Mlp& actor_target,
                        const Mlp& critic_target, double gamma) {
  if (t.terminal) return t.r;
  const std::vector<double> s_next{t.s_next[0], t.s_next[1]};
  const std::vector<double> a_next = forward(actor_target, s_next);
  const std::vector<double> q =
      forward(critic_target, {t.s_next[0], t.s_next[1], a_next[0]});
  return t.r + gamma * q[0];
}

// One optimizer step on the mean Huber loss of y - Q(s,a); returns the
// pre-step loss.
inline double critic_update(Mlp& critic, OptimizerState& opt,
                            const std::vector<TransitionTuple>& batch,
                            const std::vector<double>& targets) {
  if (batch.size() != targets.size())
    throw DomainError("critic_update: batch/target size mismatch");
  GradientSet grads = zero_gradients(critic);
  ForwardTrace trace;
  double loss_sum = 0.0;
  for (std::size_t m = 0; m < batch.size(); ++m) {
    const TransitionTuple& t = batch[m];
    const std::vector<double> q =
        forward(critic, {t.s[0], t.s[1], t.a}, &trace);
    const double zeta = targets[m] - q[0];
    const auto [loss, dzeta] = huber_loss(zeta);
    loss_sum += loss;
    backward(critic, trace, {-dzeta}, grads);  // d loss / d Q = -huber'(zeta)
  }
  grads.scale(1.0 / static_cast<double>(batch.size()));
  optimizer_step(critic, grads, opt);
  return loss_sum / static_cast<double>(batch.size());
}

// Q(s, a) and dQ/da for the actor chain rule, evaluated through the critic.
inline std::function<std::pair<double, double>(const std::array<double, 2>&,
                                               double)>
make_mlp_critic_eval(const Mlp& critic) {
  auto trace = std::make_shared<ForwardTrace>();
  auto scratch = std::make_shared<GradientSet>(zero_gradients(critic));
  return [&critic, trace, scratch](const std::array<double, 2>& s, double a) {
    const std::vector<double> q = forward(critic, {s[0], s[1], a}, trace.get());
    scratch->zero();
    backward(critic, *trace, {1.0}, *scratch);
    return std::make_pair(q[0], scratch->input[2]);
  };
}

// Ascent gradient of J = mean Q(s, mu(s)) with respect to the actor's
// parameters; returns J. `critic_eval(s, a)` supplies (Q, dQ/da).
template <typename CriticEval>
double actor_ascent_gradient(const Mlp& actor,
                             const std::vector<std::array<double, 2>>& states,
                             CriticEval&& critic_eval, GradientSet& grads) {
  if (states.empty()) throw DomainError("actor_update: empty state batch");
  ForwardTrace trace;
  double objective = 0.0;
  for (const auto& s : states) {
    const std::vector<double> a = forward(actor, {s[0], s[1]}, &trace);
    const auto [q, dq_da] = critic_eval(s, a[0]);
    objective += q;
    backward(actor, trace, {dq_da / static_cast<double>(states.size())}, grads);
  }
  return objective / static_cast<double>(states.size());
}

// One ascent step on J = mean Q(s, mu(s)) against any critic evaluation.
template <typename CriticEval>
double actor_update_with(Mlp& actor, OptimizerState& opt,
                         const std::vector<std::array<double, 2>>& states,
                         CriticEval&& critic_eval) {
  GradientSet grads = zero_gradients(actor);
  const double objective = actor_ascent_gradient(actor, states, critic_eval, grads);
  grads.scale(-1.0);  // ascend via the minimizing optimizer
  optimizer_step(actor, grads, opt);
  return objective;
}

// Standard form: the critic is the learned network and stays untouched.
inline double actor_update(Mlp& actor, OptimizerState& opt, const Mlp& critic,
                           const std::vector<std::array<double, 2>>& states) {
  return actor_update_with(actor, opt, states, make_mlp_critic_eval(critic));
}

// ---- Trainer ------------------------------------------------------------------

// One actor-critic quadruple with its optimizers, buffer and exploration
// noise. DDPG owns a single shared core; MADDPG owns one per edge.
struct AgentCore {
  Mlp actor, critic, actor_target, critic_target;
  OptimizerState actor_opt, critic_opt;
  ReplayBuffer buffer;
  std::mt19937_64 sample_rng;

  AgentCore(const Hyperparams& hp, std::uint64_t stream)
      : buffer(hp.buffer_capacity),
        sample_rng(make_rng(hp.seed, 0xb000 + stream)) {
    std::mt19937_64 init = make_rng(hp.seed, 0xa000 + stream);
    actor = make_mlp({2, 64, 64, 1}, Head::logistic, init, 1e-3);
    critic = make_mlp({3, 64, 64, 1}, Head::identity, init);
    actor_target = actor;
    critic_target = critic;
    actor_opt = make_optimizer(actor, hp.actor_lr);
    critic_opt = make_optimizer(critic, hp.critic_lr);
  }
};

struct EpochMetrics {
  int epoch = 0;
  std::string algo;
  std::string scenario;
  std::uint64_t seed = 0;
  double sigma0 = 0.0;
  int start_slot = 0;
  double epoch_reward = 0.0;
  double mean_action = 0.0;
  double mean_lanes = 0.0;
  double mean_drive_speed_mps = 0.0;
  double mean_walk_speed_mps = 0.0;
  double mean_critic_loss = 0.0;
  double wall_ms = 0.0;
};

inline const char* kMetricsHeader =
    "epoch,algo,scenario,seed,sigma0,start_slot,epoch_reward,mean_action,"
    "mean_lanes,mean_drive_speed_mps,mean_walk_speed_mps,mean_critic_loss,"
    "wall_ms";

inline std::string format_metrics_row(const EpochMetrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%d,%s,%s,%llu,%.9g,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g",
                m.epoch, m.algo.c_str(), m.scenario.c_str(),
                static_cast<unsigned long long>(m.seed), m.sigma0, m.start_slot,
                m.epoch_reward, m.mean_action, m.mean_lanes,
                m.mean_drive_speed_mps, m.mean_walk_speed_mps,
                m.mean_critic_loss, m.wall_ms);
  return buf;
}

class Trainer {
 public:
  Trainer(Algo algo, const RoadNetwork& net, DemandSchedule schedule,
          EnvParams env_params, Hyperparams hp)
      : algo_(algo), hp_(hp), env_(net, std::move(schedule), env_params),
        scenario_(net.kind), episode_rng_(make_rng(hp.seed, 0xe000)) {
    hp_.validate();
    const int n = env_.edge_count();
    const int cores = algo_ == Algo::ddpg ? 1 : n;
    for (int c = 0; c < cores; ++c)
      cores_.push_back(std::make_unique<AgentCore>(hp_, c));
    for (int k = 0; k < n; ++k)
      noise_.emplace_back(hp_.sigma0, hp_.noise_decay, hp_.noise_scale,
                          hp_.seed, 0xc000 + k);
    if (algo_ == Algo::maddpg && n > 1) {
      const unsigned hw = std::thread::hardware_concurrency();
      pool_ = std::make_unique<ThreadPool>(
          std::min<unsigned>(hw ? hw : 1, static_cast<unsigned>(n)));
    }
  }

  Algo algo() const { return algo_; }
  int agent_count() const { return static_cast<int>(cores_.size()); }
  const AgentCore& core(int i) const { return *cores_[i]; }
  double current_sigma() const { return noise_.front().sigma(); }

  // Invoked after every simulated slot; used for traces and verification.
  void set_step_observer(std::function<void(const RowEnv::StepResult&)> fn) {
    step_observer_ = std::move(fn);
  }

  EpochMetrics train_epoch(int epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = env_.edge_count();
    const int horizon = env_.params().horizon;
    const EpisodeSpec episode{epoch, reset_start_slot(epoch, horizon, episode_rng_),
                              horizon, hp_.gamma};
    const int e = episode.start_slot;
    std::vector<RowEnv::StateVec> states = env_.reset(e);

    std::vector<std::vector<double>> slot_rewards(n);
    double action_sum = 0.0, lane_sum = 0.0;
    double veh_ratio_sum = 0.0, ped_ratio_sum = 0.0;
    long veh_obs = 0, ped_obs = 0;
    double critic_loss_sum = 0.0;
    long learn_steps = 0, decisions = 0;

    for (int t = e; t < horizon; ++t) {
      std::vector<double> raw(n);
      for (int k = 0; k < n; ++k) {
        const Mlp& actor =
            algo_ == Algo::ddpg ? cores_[0]->actor : cores_[k]->actor;
        raw[k] = select_action(actor, states[k], noise_[k]);
      }
      RowEnv::StepResult step = env_.step(&raw);
      if (step_observer_) step_observer_(step);

      std::vector<double> rewards(n);
      for (int k = 0; k < n; ++k) rewards[k] = step.rewards[k].amplified;
      rewards = redistribute_rewards(std::move(rewards),
                                     algo_ == Algo::ddpg
                                         ? RewardMode::centralised
                                         : RewardMode::distributive);

      const bool terminal = (t == horizon - 1);
      for (int k = 0; k < n; ++k) {
        TransitionTuple tup;
        tup.s = states[k];
        tup.a = step.actions[k].clipped;
        tup.r = rewards[k];
        tup.s_next = step.next_states[k];
        tup.terminal = terminal;
        cores_[algo_ == Algo::ddpg ? 0 : k]->buffer.store(tup);
        slot_rewards[k].push_back(rewards[k]);
        action_sum += step.actions[k].clipped;
        lane_sum += step.actions[k].lanes;
        ++decisions;
      }
      for (int k = 0; k < n; ++k) {
        for (const ObservationRecord& rec : step.summary.per_edge[k]) {
          veh_ratio_sum += rec.veh_speed_ratio_sum;
          ped_ratio_sum += rec.ped_speed_ratio_sum;
          veh_obs += rec.veh_count;
          ped_obs += rec.ped_count;
        }
      }

      if (algo_ == Algo::ddpg) {
        // one learning step per stored tuple, serialized on the shared core
        for (int k = 0; k < n; ++k) {
          double loss;
          if (learning_step(*cores_[0], loss)) {
            critic_loss_sum += loss;
            ++learn_steps;
          }
        }
      } else {
        // per-agent steps touch disjoint state and may run concurrently
        std::vector<double> losses(n, -1.0);
        std::vector<std::function<void()>> tasks;
        tasks.reserve(n);
        for (int k = 0; k < n; ++k) {
          tasks.push_back([this, k, &losses] {
            double loss;
            if (learning_step(*cores_[k], loss)) losses[k] = loss;
          });
        }
        if (pool_) {
          pool_->run_all(std::move(tasks));
        } else {
          for (auto& task : tasks) task();
        }
        for (int k = 0; k < n; ++k) {
          if (losses[k] >= 0.0) {
            critic_loss_sum += losses[k];
            ++learn_steps;
          }
        }
      }
      states = step.next_states;
    }

    for (NoiseProcess& np : noise_) np.apply_decay();

    EpochMetrics m;
    m.epoch = epoch;
    m.algo = algo_name(algo_);
    m.scenario = scenario_;
    m.seed = hp_.seed;
    m.sigma0 = hp_.sigma0;
    m.start_slot = e;
    m.epoch_reward = epoch_reward(slot_rewards, e, horizon);
    m.mean_action = decisions ? action_sum / decisions : 0.0;
    m.mean_lanes = decisions ? lane_sum / decisions : 0.0;
    m.mean_drive_speed_mps =
        veh_obs ? kMaxVehicleSpeed * veh_ratio_sum / veh_obs : 0.0;
    m.mean_walk_speed_mps =
        ped_obs ? kMaxWalkSpeed * ped_ratio_sum / ped_obs : 0.0;
    m.mean_critic_loss = learn_steps ? critic_loss_sum / learn_steps : 0.0;
    if (hp_.record_wall) {
      m.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    }
    return m;
  }

  std::vector<EpochMetrics> run_training(
      const std::function<void(const EpochMetrics&)>& on_epoch = nullptr) {
    std::vector<EpochMetrics> rows;
    rows.reserve(hp_.epochs);
    for (int i = 0; i < hp_.epochs; ++i) {
      rows.push_back(train_epoch(i));
      if (on_epoch) on_epoch(rows.back());
    }
    return rows;
  }

  // Checkpoint name -> contents, per the text format.
  std::vector<std::pair<std::string, std::string>> checkpoints() const {
    std::vector<std::pair<std::string, std::string>> out;
    const std::string algo = algo_name(algo_);
    for (std::size_t c = 0; c < cores_.size(); ++c) {
      const std::string who =
          algo_ == Algo::ddpg ? "shared" : "agent" + std::to_string(c);
      out.emplace_back(algo + "_" + who + "_actor.txt",
                       save_checkpoint(cores_[c]->actor));
      out.emplace_back(algo + "_" + who + "_critic.txt",
                       save_checkpoint(cores_[c]->critic));
      out.emplace_back(algo + "_" + who + "_actor_target.txt",
                       save_checkpoint(cores_[c]->actor_target));
      out.emplace_back(algo + "_" + who + "_critic_target.txt",
                       save_checkpoint(cores_[c]->critic_target));
    }
    return out;
  }

 private:
  bool learning_step(AgentCore& core, double& loss_out) {
    const std::size_t m = static_cast<std::size_t>(hp_.minibatch);
    if (!core.buffer.can_sample(m)) return false;
    const std::vector<TransitionTuple> batch =
        core.buffer.sample(m, core.sample_rng);
    std::vector<double> targets(batch.size());
    std::vector<std::array<double, 2>> batch_states(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      targets[i] =
          td_target(batch[i], core.actor_target, core.critic_target, hp_.gamma);
      batch_states[i] = batch[i].s;
    }
    loss_out = critic_update(core.critic, core.critic_opt, batch, targets);
    actor_update(core.actor, core.actor_opt, core.critic, batch_states);
    soft_update(core.critic_target, core.critic, hp_.eta);
    soft_update(core.actor_target, core.actor, hp_.eta);
    return true;
  }

  Algo algo_;
  Hyperparams hp_;
  RowEnv env_;
  std::string scenario_;
  std::mt19937_64 episode_rng_;
  std::vector<std::unique_ptr<AgentCore>> cores_;
  std::vector<NoiseProcess> noise_;
  std::unique_ptr<ThreadPool> pool_;
  std::function<void(const RowEnv::StepResult&)> step_observer_;
};

}  // namespace rowrl

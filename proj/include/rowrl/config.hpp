#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rowrl/demand.hpp"
#include "rowrl/env.hpp"
#include "rowrl/network.hpp"
#include "rowrl/trainer.hpp"

namespace rowrl {

// Experiment configuration, read from a sectioned key = value text file.
// Defaults mirror the paper-scale setup so an empty file is a valid config.
struct ExperimentConfig {
  // [network]; geometry keys default to the template's own values
  std::string kind = "street_section";
  std::optional<double> width_m;
  std::optional<double> length_m;
  std::optional<double> facility_m;
  std::optional<int> init_lanes;
  // [demand]
  double veh_rate = 114.0;
  double ped_rate = 21.0;
  double peak_multiplier = 3.0;
  int peak_slot_a = 16;
  int peak_slot_b = 36;
  double spread = 2.0;
  // [schedule]
  int slots = 48;
  std::uint64_t schedule_seed = 1;
  // [env]
  std::string reward_variant = "squared";
  double veh_norm = 50.0;
  double ped_norm = 100.0;
  int slot_seconds = 1800;
  int obs_interval_seconds = 10;
  // [train]
  std::string algo = "ddpg";
  int epochs = 150;
  int minibatch = 64;
  std::size_t buffer_capacity = 100000;
  double amplifier = 1000.0;
  double eta = 0.005;
  double gamma = 0.99;
  double noise_decay = 0.99;
  double sigma0 = 0.2;
  double noise_scale = 1.0;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::uint64_t train_seed = 1;
  std::string timing = "wall";

  RoadNetwork build_network() const {
    TemplateOverrides ov;
    ov.width_m = width_m;
    ov.length_m = length_m;
    ov.facility_m = facility_m;
    ov.init_lanes = init_lanes;
    return build_template(kind, ov);
  }

  DemandProfile demand_profile() const {
    DemandProfile p;
    p.base_rate_veh = veh_rate;
    p.base_rate_ped = ped_rate;
    p.peak_multiplier = peak_multiplier;
    p.peak_slot_a = peak_slot_a;
    p.peak_slot_b = peak_slot_b;
    p.peak_spread_slots = spread;
    p.slot_hours = slot_seconds / 3600.0;
    return p;
  }

  EnvParams env_params() const {
    EnvParams e;
    e.slot_seconds = slot_seconds;
    e.obs_interval_seconds = obs_interval_seconds;
    e.veh_norm = veh_norm;
    e.ped_norm = ped_norm;
    if (reward_variant == "squared")
      e.reward_variant = RewardVariant::squared;
    else if (reward_variant == "as_printed")
      e.reward_variant = RewardVariant::as_printed;
    else
      throw ConfigError("unknown reward_variant '" + reward_variant + "'");
    e.amplifier = amplifier;
    e.horizon = slots;
    return e;
  }

  Hyperparams hyperparams() const {
    Hyperparams hp;
    hp.epochs = epochs;
    hp.minibatch = minibatch;
    hp.buffer_capacity = buffer_capacity;
    hp.eta = eta;
    hp.gamma = gamma;
    hp.noise_decay = noise_decay;
    hp.sigma0 = sigma0;
    hp.noise_scale = noise_scale;
    hp.actor_lr = actor_lr;
    hp.critic_lr = critic_lr;
    hp.seed = train_seed;
    if (timing == "wall")
      hp.record_wall = true;
    else if (timing == "off")
      hp.record_wall = false;
    else
      throw ConfigError("unknown timing mode '" + timing + "'");
    return hp;
  }

  Algo parse_algo() const {
    if (algo == "ddpg") return Algo::ddpg;
    if (algo == "maddpg") return Algo::maddpg;
    throw ConfigError("unknown algo '" + algo + "'");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": bad number for '" +
                      key + "': " + v);
  }
}

inline long long to_int(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": bad integer for '" +
                      key + "': " + v);
  }
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) +
                          ": malformed section header");
      section = line.substr(1, line.size() - 2);
      if (section != "network" && section != "demand" && section != "schedule" &&
          section != "env" && section != "train")
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    auto number = [&] { return detail::to_double(value, qual, line_no); };
    auto integer = [&] { return detail::to_int(value, qual, line_no); };

    if (qual == "network.kind") cfg.kind = value;
    else if (qual == "network.width_m") cfg.width_m = number();
    else if (qual == "network.length_m") cfg.length_m = number();
    else if (qual == "network.facility_m") cfg.facility_m = number();
    else if (qual == "network.init_lanes") cfg.init_lanes = static_cast<int>(integer());
    else if (qual == "demand.veh_rate") cfg.veh_rate = number();
    else if (qual == "demand.ped_rate") cfg.ped_rate = number();
    else if (qual == "demand.peak_multiplier") cfg.peak_multiplier = number();
    else if (qual == "demand.peak_slots") {
      const auto comma = value.find(',');
      if (comma == std::string::npos)
        throw ConfigError("line " + std::to_string(line_no) +
                          ": peak_slots wants two comma-separated slots");
      cfg.peak_slot_a = static_cast<int>(
          detail::to_int(detail::trim(value.substr(0, comma)), qual, line_no));
      cfg.peak_slot_b = static_cast<int>(
          detail::to_int(detail::trim(value.substr(comma + 1)), qual, line_no));
    }
    else if (qual == "demand.spread") cfg.spread = number();
    else if (qual == "schedule.slots") cfg.slots = static_cast<int>(integer());
    else if (qual == "schedule.seed") cfg.schedule_seed = static_cast<std::uint64_t>(integer());
    else if (qual == "env.reward_variant") cfg.reward_variant = value;
    else if (qual == "env.veh_norm") cfg.veh_norm = number();
    else if (qual == "env.ped_norm") cfg.ped_norm = number();
    else if (qual == "env.slot_seconds") cfg.slot_seconds = static_cast<int>(integer());
    else if (qual == "env.obs_interval_seconds") cfg.obs_interval_seconds = static_cast<int>(integer());
    else if (qual == "train.algo") cfg.algo = value;
    else if (qual == "train.epochs") cfg.epochs = static_cast<int>(integer());
    else if (qual == "train.minibatch") cfg.minibatch = static_cast<int>(integer());
    else if (qual == "train.buffer_capacity") cfg.buffer_capacity = static_cast<std::size_t>(integer());
    else if (qual == "train.amplifier") cfg.amplifier = number();
    else if (qual == "train.eta") cfg.eta = number();
    else if (qual == "train.gamma") cfg.gamma = number();
    else if (qual == "train.noise_decay") cfg.noise_decay = number();
    else if (qual == "train.sigma0") cfg.sigma0 = number();
    else if (qual == "train.noise_scale") cfg.noise_scale = number();
    else if (qual == "train.actor_lr") cfg.actor_lr = number();
    else if (qual == "train.critic_lr") cfg.critic_lr = number();
    else if (qual == "train.seed") cfg.train_seed = static_cast<std::uint64_t>(integer());
    else if (qual == "train.timing") cfg.timing = value;
    else
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                        qual + "'");
  }
  return cfg;
}

// Canonical text form; parse(serialize(cfg)) reproduces cfg exactly.
inline std::string serialize_config(const ExperimentConfig& c) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string out;
  out += "[network]\n";
  out += "kind = " + c.kind + "\n";
  if (c.width_m) out += "width_m = " + num(*c.width_m) + "\n";
  if (c.length_m) out += "length_m = " + num(*c.length_m) + "\n";
  if (c.facility_m) out += "facility_m = " + num(*c.facility_m) + "\n";
  if (c.init_lanes) out += "init_lanes = " + std::to_string(*c.init_lanes) + "\n";
  out += "\n";
  out += "[demand]\n";
  out += "veh_rate = " + num(c.veh_rate) + "\n";
  out += "ped_rate = " + num(c.ped_rate) + "\n";
  out += "peak_multiplier = " + num(c.peak_multiplier) + "\n";
  out += "peak_slots = " + std::to_string(c.peak_slot_a) + "," +
         std::to_string(c.peak_slot_b) + "\n";
  out += "spread = " + num(c.spread) + "\n\n";
  out += "[schedule]\n";
  out += "slots = " + std::to_string(c.slots) + "\n";
  out += "seed = " + std::to_string(c.schedule_seed) + "\n\n";
  out += "[env]\n";
  out += "reward_variant = " + c.reward_variant + "\n";
  out += "veh_norm = " + num(c.veh_norm) + "\n";
  out += "ped_norm = " + num(c.ped_norm) + "\n";
  out += "slot_seconds = " + std::to_string(c.slot_seconds) + "\n";
  out += "obs_interval_seconds = " + std::to_string(c.obs_interval_seconds) +
         "\n\n";
  out += "[train]\n";
  out += "algo = " + c.algo + "\n";
  out += "epochs = " + std::to_string(c.epochs) + "\n";
  out += "minibatch = " + std::to_string(c.minibatch) + "\n";
  out += "buffer_capacity = " + std::to_string(c.buffer_capacity) + "\n";
  out += "amplifier = " + num(c.amplifier) + "\n";
  out += "eta = " + num(c.eta) + "\n";
  out += "gamma = " + num(c.gamma) + "\n";
  out += "noise_decay = " + num(c.noise_decay) + "\n";
  out += "sigma0 = " + num(c.sigma0) + "\n";
  out += "noise_scale = " + num(c.noise_scale) + "\n";
  out += "actor_lr = " + num(c.actor_lr) + "\n";
  out += "critic_lr = " + num(c.critic_lr) + "\n";
  out += "seed = " + std::to_string(c.train_seed) + "\n";
  out += "timing = " + c.timing + "\n";
  return out;
}

// FNV-1a over the canonical form; names run directories.
inline std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = serialize_config(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rowrl

#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "rowrl/common.hpp"
#include "rowrl/network.hpp"

namespace rowrl {

// Bimodal daily demand: a flat base plus two Gaussian peaks, rescaled so the
// mean over the day matches the configured rates exactly.
struct DemandProfile {
  double base_rate_veh = 114.0;  // trips/hour per OD pair
  double base_rate_ped = 21.0;
  int peak_slot_a = 16;          // 08:00 with 30-minute slots
  int peak_slot_b = 36;          // 18:00
  double peak_multiplier = 3.0;
  double peak_spread_slots = 2.0;
  double slot_hours = 0.5;

  // Relative slot weights, normalised to mean 1 over the given horizon.
  std::vector<double> slot_weights(int slots) const {
    std::vector<double> w(slots, 1.0);
    if (peak_multiplier > 1.0 && peak_spread_slots > 0.0) {
      const double amp = peak_multiplier - 1.0;
      const double inv = 1.0 / (2.0 * peak_spread_slots * peak_spread_slots);
      for (int s = 0; s < slots; ++s) {
        const double da = s - peak_slot_a;
        const double db = s - peak_slot_b;
        w[s] += amp * (std::exp(-da * da * inv) + std::exp(-db * db * inv));
      }
    }
    double sum = 0.0;
    for (double x : w) sum += x;
    const double mean = sum / slots;
    for (double& x : w) x /= mean;
    return w;
  }
};

struct DemandSchedule {
  int slots = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<int, int>> ods;     // origin, destination node ids
  std::vector<std::vector<int>> veh_trips;  // [od][slot]
  std::vector<std::vector<int>> ped_trips;  // [od][slot]

  int od_index(int origin, int destination) const {
    for (int i = 0; i < static_cast<int>(ods.size()); ++i)
      if (ods[i].first == origin && ods[i].second == destination) return i;
    throw DomainError("unknown OD pair");
  }
};

// Seeded Poisson counts per (OD, slot) whose expectation follows the bimodal
// profile; the long-run per-OD mean equals the configured base rates.
inline DemandSchedule synth_demand(const RoadNetwork& net,
                                   const DemandProfile& profile, int slots,
                                   std::uint64_t seed) {
  if (slots < 3) throw DomainError("synth_demand: need at least 3 slots");
  if (net.origins.empty() || net.destinations.empty())
    throw DomainError("synth_demand: empty origin or destination set");

  DemandSchedule sched;
  sched.slots = slots;
  sched.seed = seed;
  sched.ods = net.od_pairs();
  if (sched.ods.empty()) throw DomainError("synth_demand: no OD pairs");

  const std::vector<double> weights = profile.slot_weights(slots);
  const double veh_mean = profile.base_rate_veh * profile.slot_hours;
  const double ped_mean = profile.base_rate_ped * profile.slot_hours;

  sched.veh_trips.assign(sched.ods.size(), std::vector<int>(slots, 0));
  sched.ped_trips.assign(sched.ods.size(), std::vector<int>(slots, 0));
  for (std::size_t i = 0; i < sched.ods.size(); ++i) {
    std::mt19937_64 rng = make_rng(seed, 0x0d00 + i);
    for (int s = 0; s < slots; ++s) {
      sched.veh_trips[i][s] = poisson(rng, veh_mean * weights[s]);
      sched.ped_trips[i][s] = poisson(rng, ped_mean * weights[s]);
    }
  }
  return sched;
}

inline std::string export_demand(const DemandSchedule& sched) {
  std::string out = "mode,origin,destination,slot,count\n";
  char line[96];
  for (std::size_t i = 0; i < sched.ods.size(); ++i) {
    for (int s = 0; s < sched.slots; ++s) {
      std::snprintf(line, sizeof line, "veh,%d,%d,%d,%d\n", sched.ods[i].first,
                    sched.ods[i].second, s, sched.veh_trips[i][s]);
      out += line;
    }
  }
  for (std::size_t i = 0; i < sched.ods.size(); ++i) {
    for (int s = 0; s < sched.slots; ++s) {
      std::snprintf(line, sizeof line, "ped,%d,%d,%d,%d\n", sched.ods[i].first,
                    sched.ods[i].second, s, sched.ped_trips[i][s]);
      out += line;
    }
  }
  return out;
}

}  // namespace rowrl

#pragma once

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

#include "rowrl/common.hpp"
#include "rowrl/demand.hpp"
#include "rowrl/network.hpp"

namespace rowrl {

struct VehicleAgent {
  int id = -1;
  int od = -1;
  std::vector<int> route;  // edge ids, last edge ends at the destination
  int route_idx = 0;
  int lane = 0;
  double edge_pos_m = 0.0;
  double speed_mps = 0.0;
  int wait_ticks = 0;  // ticks spent denied at a junction, for FCFS entry
  bool active = false;

  int current_edge() const { return route[route_idx]; }
  bool on_last_edge() const {
    return route_idx + 1 == static_cast<int>(route.size());
  }
};

struct PedestrianAgent {
  int id = -1;
  int od = -1;
  std::vector<int> route;
  int route_idx = 0;
  double edge_pos_m = 0.0;
  double speed_mps = 0.0;
  bool active = false;

  int current_edge() const { return route[route_idx]; }
  bool on_last_edge() const {
    return route_idx + 1 == static_cast<int>(route.size());
  }
};

struct RowConfig {
  double beta = 0.0;
  int lanes = 1;
};

// Mutable per-edge state: current ROW split plus the agents on the edge.
// lane_veh[l] is ordered front first (descending edge_pos_m).
struct EdgeRuntime {
  const EdgeSpec* spec = nullptr;
  int lanes = 1;
  double sidewalk_ratio = 0.0;
  std::vector<std::vector<int>> lane_veh;
  std::vector<int> peds;

  double sidewalk_width_m() const { return sidewalk_ratio * spec->width_m; }
  double carriageway_width_m() const {
    return (1.0 - sidewalk_ratio - spec->facility_ratio) * spec->width_m;
  }
};

struct ObservationRecord {
  int edge = 0;
  int h = 0;
  int veh_count = 0;
  int ped_count = 0;
  double veh_speed_ratio_sum = 0.0;
  double ped_speed_ratio_sum = 0.0;
};

struct OdFlowCounts {
  long scheduled = 0;   // trips from the demand schedule for this slot
  long rolled_in = 0;   // en-route + undeparted carried over from slot t-1
  long departed = 0;    // trips inserted into the network this slot
  long arrived = 0;
  long en_route_end = 0;
  long undeparted_end = 0;

  bool conserved() const {
    return scheduled + rolled_in == arrived + en_route_end + undeparted_end;
  }
};

struct SlotSummary {
  int slot = 0;
  std::vector<std::vector<ObservationRecord>> per_edge;  // [edge][h]
  std::vector<OdFlowCounts> veh;                         // per OD pair
  std::vector<OdFlowCounts> ped;
};

// Reconfigures an edge's ROW split. Vehicles on removed lanes merge into the
// nearest surviving lane, keeping position order (ties: lower lane wins).
inline void apply_row_config(EdgeRuntime& edge, double beta, int lanes,
                             const std::vector<VehicleAgent*>& vehicles) {
  if (lanes < 1) throw DomainError("apply_row_config: lanes must be >= 1");
  const double w = edge.spec->width_m;
  if (beta * w < kMinSidewalk - kFeasibilityEps)
    throw DomainError("apply_row_config: infeasible sidewalk width");
  const double carriageway = (1.0 - beta - edge.spec->facility_ratio) * w;
  if (carriageway < kLaneWidth * lanes + kLaneBuffer - kFeasibilityEps)
    throw DomainError("apply_row_config: infeasible carriageway width");

  const int old_lanes = edge.lanes;
  edge.sidewalk_ratio = beta;
  edge.lanes = lanes;
  if (lanes >= old_lanes) {
    edge.lane_veh.resize(lanes);
    return;
  }

  // Merge removed lanes into the last surviving one.
  std::vector<std::tuple<double, int, int>> merged;  // (-pos, src lane, id)
  for (int l = lanes - 1; l < old_lanes; ++l) {
    for (int id : edge.lane_veh[l]) {
      merged.emplace_back(-vehicles[id]->edge_pos_m, l, id);
    }
  }
  std::sort(merged.begin(), merged.end());
  std::vector<int> lane;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& [neg_pos, src, id] : merged) {
    VehicleAgent* v = vehicles[id];
    v->lane = lanes - 1;
    // keep strict ordering when two lanes carried equal positions
    v->edge_pos_m = std::max(0.0, std::min(v->edge_pos_m, prev - 1e-6));
    prev = v->edge_pos_m;
    lane.push_back(id);
  }
  edge.lane_veh.resize(lanes);
  edge.lane_veh[lanes - 1] = std::move(lane);
}

// Car-following calibration. The 0.60 s headway is the only external anchor;
// the rest are conventional values.
struct SimParams {
  double dt = 1.0;
  double headway_s = 0.60;
  double standstill_gap_m = 2.0;
  double accel_mps2 = 2.5;
  double decel_mps2 = 4.5;
  double ped_jam_density = 5.4;  // persons per m^2
};

class World {
 public:
  explicit World(const RoadNetwork& net, SimParams params = {})
      : net_(net), params_(params) {
    ods_ = net_.od_pairs();
    for (const auto& [o, d] : ods_) routes_.push_back(shortest_path(o, d));
    init_edges();
  }

  // edge runtimes point into net_; moving keeps that heap storage, copying
  // would alias another instance
  World(const World&) = delete;
  World& operator=(const World&) = delete;
  World(World&&) = default;
  World& operator=(World&&) = default;

  const RoadNetwork& network() const { return net_; }
  const std::vector<std::pair<int, int>>& ods() const { return ods_; }
  const std::vector<int>& route(int od) const { return routes_[od]; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  EdgeRuntime& edge(int id) { return edges_[id]; }
  const EdgeRuntime& edge(int id) const { return edges_[id]; }
  const VehicleAgent& vehicle(int id) const { return vehicles_[id]; }
  const PedestrianAgent& pedestrian(int id) const { return peds_[id]; }

  // Drops all agents and restores the template ROW layout.
  void reset() {
    vehicles_.clear();
    peds_.clear();
    init_edges();
  }

  void apply_config(int edge_id, double beta, int lanes) {
    std::vector<VehicleAgent*> ptrs(vehicles_.size());
    for (std::size_t i = 0; i < vehicles_.size(); ++i) ptrs[i] = &vehicles_[i];
    apply_row_config(edges_[edge_id], beta, lanes, ptrs);
  }

  // Test access: plant an agent directly.
  int add_vehicle(std::vector<int> route, int lane, double pos, double speed,
                  int od = 0) {
    VehicleAgent v;
    v.id = static_cast<int>(vehicles_.size());
    v.od = od;
    v.route = std::move(route);
    v.lane = lane;
    v.edge_pos_m = pos;
    v.speed_mps = speed;
    v.active = true;
    vehicles_.push_back(v);
    std::vector<int>& dst = edges_[vehicles_.back().route[0]].lane_veh[lane];
    auto it = dst.begin();
    while (it != dst.end() && vehicles_[*it].edge_pos_m > pos) ++it;
    dst.insert(it, v.id);
    return v.id;
  }

  int add_pedestrian(std::vector<int> route, double pos, int od = 0) {
    PedestrianAgent p;
    p.id = static_cast<int>(peds_.size());
    p.od = od;
    p.route = std::move(route);
    p.edge_pos_m = pos;
    p.active = true;
    peds_.push_back(p);
    edges_[peds_.back().route[0]].peds.push_back(p.id);
    return p.id;
  }

  // One simulation step: car-following on lanes, density-dependent walking on
  // sidewalks, junction transfers, arrivals.
  void tick(double dt) {
    if (dt <= 0) throw DomainError("tick: dt must be positive");
    move_vehicles(dt);
    transfer_vehicles();
    move_pedestrians(dt);
  }

  std::vector<ObservationRecord> observe(int h) const {
    std::vector<ObservationRecord> out;
    out.reserve(edges_.size());
    for (const EdgeRuntime& e : edges_) {
      ObservationRecord rec;
      rec.edge = e.spec->id;
      rec.h = h;
      for (const auto& lane : e.lane_veh) {
        rec.veh_count += static_cast<int>(lane.size());
        for (int id : lane)
          rec.veh_speed_ratio_sum += vehicles_[id].speed_mps / kMaxVehicleSpeed;
      }
      rec.ped_count = static_cast<int>(e.peds.size());
      for (int id : e.peds)
        rec.ped_speed_ratio_sum += peds_[id].speed_mps / kMaxWalkSpeed;
      out.push_back(rec);
    }
    return out;
  }

  // Simulates one control slot: optional reconfiguration at the boundary,
  // uniform departures, periodic observations, end-of-slot trip rollover.
  SlotSummary run_slot(const DemandSchedule& sched, int t,
                       const std::vector<RowConfig>* configs, int slot_seconds,
                       int obs_interval_seconds) {
    if (t < 0 || t >= sched.slots) throw DomainError("run_slot: bad slot");
    if (sched.ods.size() != ods_.size())
      throw DomainError("run_slot: schedule does not match network");
    if (obs_interval_seconds <= 0 || slot_seconds % obs_interval_seconds != 0)
      throw DomainError("run_slot: slot not divisible by observation interval");

    if (configs) {
      for (std::size_t e = 0; e < edges_.size(); ++e)
        apply_config(static_cast<int>(e), (*configs)[e].beta,
                     (*configs)[e].lanes);
    }

    const std::size_t n_od = ods_.size();
    const std::vector<long> carry_in_veh = carry_veh_;
    const std::vector<long> carry_in_ped = carry_ped_;
    carry_veh_.assign(n_od, 0);
    carry_ped_.assign(n_od, 0);

    SlotSummary sum;
    sum.slot = t;
    sum.per_edge.resize(edges_.size());
    sum.veh.resize(n_od);
    sum.ped.resize(n_od);
    arrived_veh_.assign(n_od, 0);
    arrived_ped_.assign(n_od, 0);
    departed_veh_.assign(n_od, 0);
    for (std::size_t i = 0; i < n_od; ++i) {
      sum.veh[i].scheduled = sched.veh_trips[i][t];
      sum.ped[i].scheduled = sched.ped_trips[i][t];
      sum.veh[i].rolled_in = carry_in_veh[i] + count_en_route_veh(i);
      sum.ped[i].rolled_in = carry_in_ped[i] + count_en_route_ped(i);
    }

    const int ticks = slot_seconds;  // dt = 1 s
    const int obs_ticks = obs_interval_seconds;
    std::vector<std::vector<SpawnEvent>> plan(ticks);
    for (std::size_t i = 0; i < n_od; ++i) {
      const int od = static_cast<int>(i);
      spread_departures(plan, od, sched.veh_trips[i][t] + carry_in_veh[i], false);
      spread_departures(plan, od, sched.ped_trips[i][t] + carry_in_ped[i], true);
    }

    int next_h = 0;
    for (int k = 0; k < ticks; ++k) {
      retry_waiting();
      for (const SpawnEvent& ev : plan[k]) {
        if (ev.is_ped) {
          spawn_pedestrian(ev.od);
        } else if (try_spawn_vehicle(ev.od)) {
          ++departed_veh_[ev.od];
        } else {
          waiting_[ev.od] += 1;
        }
      }
      tick(params_.dt);
      if ((k + 1) % obs_ticks == 0) {
        for (ObservationRecord& rec : observe(next_h))
          sum.per_edge[rec.edge].push_back(rec);
        ++next_h;
      }
    }

    for (std::size_t i = 0; i < n_od; ++i) {
      sum.veh[i].departed = departed_veh_[i];
      sum.veh[i].arrived = arrived_veh_[i];
      sum.veh[i].en_route_end = count_en_route_veh(i);
      sum.veh[i].undeparted_end = waiting_[i];
      sum.ped[i].departed = sum.ped[i].scheduled + carry_in_ped[i];
      sum.ped[i].arrived = arrived_ped_[i];
      sum.ped[i].en_route_end = count_en_route_ped(i);
      sum.ped[i].undeparted_end = 0;
      // undeparted trips are re-assigned to the next slot
      carry_veh_[i] = waiting_[i];
      waiting_[i] = 0;
    }
    return sum;
  }

 private:
  struct SpawnEvent {
    bool is_ped = false;
    int od = 0;
  };

  void init_edges() {
    edges_.clear();
    for (const EdgeSpec& spec : net_.edges) {
      EdgeRuntime e;
      e.spec = &net_.edges[spec.id];
      e.lanes = spec.init_lanes;
      e.sidewalk_ratio = spec.init_sidewalk_ratio;
      e.lane_veh.resize(e.lanes);
      edges_.push_back(std::move(e));
    }
    waiting_.assign(ods_.size(), 0);
    carry_veh_.assign(ods_.size(), 0);
    carry_ped_.assign(ods_.size(), 0);
    arrived_veh_.assign(ods_.size(), 0);
    arrived_ped_.assign(ods_.size(), 0);
    departed_veh_.assign(ods_.size(), 0);
  }

  std::vector<int> shortest_path(int origin, int destination) const {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(net_.nodes.size(), inf);
    std::vector<int> parent_edge(net_.nodes.size(), -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[origin] = 0.0;
    heap.emplace(0.0, origin);
    while (!heap.empty()) {
      const auto [d, at] = heap.top();
      heap.pop();
      if (d > dist[at]) continue;
      for (const EdgeSpec& e : net_.edges) {
        if (e.from_node != at) continue;
        const double nd = d + e.length_m;
        if (nd < dist[e.to_node] - 1e-12) {
          dist[e.to_node] = nd;
          parent_edge[e.to_node] = e.id;
          heap.emplace(nd, e.to_node);
        }
      }
    }
    if (parent_edge[destination] < 0)
      throw DomainError("no route between origin and destination");
    std::vector<int> route;
    for (int at = destination; at != origin;) {
      const EdgeSpec& e = net_.edges[parent_edge[at]];
      route.push_back(e.id);
      at = e.from_node;
    }
    std::reverse(route.begin(), route.end());
    return route;
  }

  long count_en_route_veh(std::size_t od) const {
    long n = 0;
    for (const VehicleAgent& v : vehicles_)
      if (v.active && v.od == static_cast<int>(od)) ++n;
    return n;
  }

  long count_en_route_ped(std::size_t od) const {
    long n = 0;
    for (const PedestrianAgent& p : peds_)
      if (p.active && p.od == static_cast<int>(od)) ++n;
    return n;
  }

  // Departure ticks spread uniformly over the slot.
  static void spread_departures(std::vector<std::vector<SpawnEvent>>& plan,
                                int od, long count, bool is_ped) {
    const int ticks = static_cast<int>(plan.size());
    for (long j = 0; j < count; ++j) {
      const int k = std::min<int>(
          ticks - 1,
          static_cast<int>((j + 0.5) * ticks / static_cast<double>(count)));
      plan[k].push_back(SpawnEvent{is_ped, od});
    }
  }

  bool lane_has_entry_space(const EdgeRuntime& e, int lane) const {
    if (e.lane_veh[lane].empty()) return true;
    const int tail = e.lane_veh[lane].back();
    return vehicles_[tail].edge_pos_m > params_.standstill_gap_m;
  }

  bool try_spawn_vehicle(int od) {
    EdgeRuntime& e = edges_[routes_[od][0]];
    int best = -1;
    double best_space = -1.0;
    for (int l = 0; l < e.lanes; ++l) {
      const double space = e.lane_veh[l].empty()
                               ? e.spec->length_m
                               : vehicles_[e.lane_veh[l].back()].edge_pos_m;
      if (space > best_space + 1e-12) {
        best_space = space;
        best = l;
      }
    }
    if (best < 0 || best_space <= params_.standstill_gap_m) return false;
    VehicleAgent v;
    v.id = static_cast<int>(vehicles_.size());
    v.od = od;
    v.route = routes_[od];
    v.lane = best;
    v.active = true;
    vehicles_.push_back(v);
    e.lane_veh[best].push_back(v.id);
    return true;
  }

  void spawn_pedestrian(int od) {
    PedestrianAgent p;
    p.id = static_cast<int>(peds_.size());
    p.od = od;
    p.route = routes_[od];
    p.active = true;
    peds_.push_back(p);
    edges_[routes_[od][0]].peds.push_back(p.id);
  }

  void retry_waiting() {
    for (std::size_t od = 0; od < waiting_.size(); ++od) {
      while (waiting_[od] > 0 && try_spawn_vehicle(static_cast<int>(od))) {
        waiting_[od] -= 1;
        ++departed_veh_[od];
      }
    }
  }

  // Safe-speed rule: keep headway_s plus a standstill gap behind the leader.
  // Braking past decel_mps2 is allowed when safety requires it.
  void move_vehicles(double dt) {
    for (EdgeRuntime& e : edges_) {
      const double len = e.spec->length_m;
      for (auto& lane : e.lane_veh) {
        double leader_pos = std::numeric_limits<double>::infinity();
        for (int id : lane) {
          VehicleAgent& v = vehicles_[id];
          double safe = std::numeric_limits<double>::infinity();
          if (std::isfinite(leader_pos)) {
            safe = (leader_pos - v.edge_pos_m - params_.standstill_gap_m) /
                   (dt + params_.headway_s);
          } else if (!v.on_last_edge() && v.wait_ticks > 0) {
            // denied at the junction: hold at the edge end
            safe = (len - v.edge_pos_m) / (dt + params_.headway_s);
          }
          double next =
              std::min(kMaxVehicleSpeed, v.speed_mps + params_.accel_mps2 * dt);
          next = std::max(next, v.speed_mps - params_.decel_mps2 * dt);
          next = std::min(next, std::max(safe, 0.0));
          next = std::max(next, 0.0);
          v.speed_mps = next;
          v.edge_pos_m += next * dt;
          if (!v.on_last_edge()) v.edge_pos_m = std::min(v.edge_pos_m, len);
          leader_pos = v.edge_pos_m;
        }
      }
    }
  }

  void transfer_vehicles() {
    // Front vehicles that reached the edge end, longest-waiting first.
    std::vector<std::tuple<int, int, int, int>> cand;  // (-wait, edge, lane, id)
    for (const EdgeRuntime& e : edges_) {
      for (std::size_t l = 0; l < e.lane_veh.size(); ++l) {
        if (e.lane_veh[l].empty()) continue;
        const int id = e.lane_veh[l].front();
        if (vehicles_[id].edge_pos_m >= e.spec->length_m - 1e-9)
          cand.emplace_back(-vehicles_[id].wait_ticks, e.spec->id,
                            static_cast<int>(l), id);
      }
    }
    std::sort(cand.begin(), cand.end());

    admitted_.assign(edges_.size(), {});
    for (const auto& [neg_wait, edge_id, lane, id] : cand) {
      VehicleAgent& v = vehicles_[id];
      EdgeRuntime& cur = edges_[edge_id];
      if (v.on_last_edge()) {
        cur.lane_veh[lane].erase(cur.lane_veh[lane].begin());
        v.active = false;
        ++arrived_veh_[v.od];
        continue;
      }
      const int next_edge = v.route[v.route_idx + 1];
      EdgeRuntime& nxt = edges_[next_edge];
      if (admitted_[next_edge].empty())
        admitted_[next_edge].assign(nxt.lanes, false);
      // prefer the same lane index, then the lowest free one
      int chosen = -1;
      const int preferred = std::min(v.lane, nxt.lanes - 1);
      if (!admitted_[next_edge][preferred] &&
          lane_has_entry_space(nxt, preferred)) {
        chosen = preferred;
      } else {
        for (int l = 0; l < nxt.lanes; ++l) {
          if (l == preferred) continue;
          if (!admitted_[next_edge][l] && lane_has_entry_space(nxt, l)) {
            chosen = l;
            break;
          }
        }
      }
      if (chosen < 0) {
        v.edge_pos_m = cur.spec->length_m;
        v.speed_mps = 0.0;
        ++v.wait_ticks;
        continue;
      }
      admitted_[next_edge][chosen] = true;
      cur.lane_veh[lane].erase(cur.lane_veh[lane].begin());
      v.route_idx += 1;
      v.lane = chosen;
      v.edge_pos_m = 0.0;
      v.wait_ticks = 0;
      nxt.lane_veh[chosen].push_back(id);
    }
  }

  void move_pedestrians(double dt) {
    // advance everyone first, then handle edge crossings
    for (EdgeRuntime& e : edges_) {
      if (e.peds.empty()) continue;
      const double area = e.sidewalk_width_m() * e.spec->length_m;
      // crowding felt from the others present; a lone walker is unimpeded
      const double density =
          area > 0 ? (e.peds.size() - 1) / area : params_.ped_jam_density;
      const double speed = kMaxWalkSpeed *
                           std::max(0.0, 1.0 - density / params_.ped_jam_density);
      for (int id : e.peds) {
        peds_[id].speed_mps = speed;
        peds_[id].edge_pos_m += speed * dt;
      }
    }
    for (EdgeRuntime& e : edges_) {
      const double len = e.spec->length_m;
      std::vector<int> finished;
      for (int id : e.peds)
        if (peds_[id].edge_pos_m >= len && peds_[id].current_edge() == e.spec->id)
          finished.push_back(id);
      for (int id : finished) {
        PedestrianAgent& p = peds_[id];
        e.peds.erase(std::find(e.peds.begin(), e.peds.end(), id));
        if (p.on_last_edge()) {
          p.active = false;
          ++arrived_ped_[p.od];
        } else {
          p.edge_pos_m -= len;
          p.route_idx += 1;
          edges_[p.current_edge()].peds.push_back(id);
        }
      }
    }
  }

  RoadNetwork net_;
  SimParams params_;
  std::vector<std::pair<int, int>> ods_;
  std::vector<std::vector<int>> routes_;
  std::vector<EdgeRuntime> edges_;
  std::vector<VehicleAgent> vehicles_;
  std::vector<PedestrianAgent> peds_;
  std::vector<long> waiting_;  // per OD: spawns blocked at the origin
  std::vector<long> carry_veh_, carry_ped_;
  std::vector<long> arrived_veh_, arrived_ped_, departed_veh_;
  std::vector<std::vector<bool>> admitted_;
};

}  // namespace rowrl

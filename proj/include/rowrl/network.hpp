#pragma once

#include <algorithm>
#include <cstdio>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "rowrl/common.hpp"

namespace rowrl {

struct EdgeSpec {
  int id = 0;
  int from_node = 0;
  int to_node = 0;
  double length_m = 0.0;
  double width_m = 0.0;
  double facility_ratio = 0.0;       // fixed street-side belt, fraction of width
  int init_lanes = 1;
  double init_sidewalk_ratio = 0.0;  // fraction of width

  double facility_m() const { return facility_ratio * width_m; }
  double init_sidewalk_m() const { return init_sidewalk_ratio * width_m; }
};

struct NodePos {
  double x = 0.0;
  double y = 0.0;
};

struct RoadNetwork {
  std::string kind;
  std::vector<EdgeSpec> edges;
  std::vector<NodePos> nodes;
  std::vector<std::vector<int>> successors;  // per edge: edge ids leaving its to_node
  std::vector<int> origins;                  // node ids
  std::vector<int> destinations;             // node ids

  int edge_count() const { return static_cast<int>(edges.size()); }

  // Ordered origin->destination pairs with distinct endpoints.
  std::vector<std::pair<int, int>> od_pairs() const {
    std::vector<std::pair<int, int>> out;
    for (int o : origins)
      for (int d : destinations)
        if (o != d) out.emplace_back(o, d);
    return out;
  }
};

struct TemplateOverrides {
  std::optional<double> width_m;
  std::optional<double> length_m;
  std::optional<double> facility_m;
  std::optional<int> init_lanes;
};

namespace detail {

inline EdgeSpec make_edge(int id, int from, int to, double length, double width,
                          double facility_m, int lanes) {
  EdgeSpec e;
  e.id = id;
  e.from_node = from;
  e.to_node = to;
  e.length_m = length;
  e.width_m = width;
  e.facility_ratio = facility_m / width;
  e.init_lanes = lanes;
  // Everything left of the carriageway and the facility belt is sidewalk.
  e.init_sidewalk_ratio =
      1.0 - e.facility_ratio - (kLaneWidth * lanes) / width;
  return e;
}

inline void connect_successors(RoadNetwork& net) {
  net.successors.assign(net.edges.size(), {});
  for (const EdgeSpec& e : net.edges) {
    for (const EdgeSpec& s : net.edges) {
      if (s.from_node != e.to_node) continue;
      if (s.to_node == e.from_node) continue;  // no U-turns
      net.successors[e.id].push_back(s.id);
    }
  }
}

}  // namespace detail

inline std::vector<std::string> validate_network(const RoadNetwork& net);

// Parametric generation of the four component networks. Defaults: 100 m edges
// (roundabout arms 50 m), w = 13 m, 1.5 m facility belt, 3 lanes of 3.5 m.
inline RoadNetwork build_template(const std::string& kind,
                                  const TemplateOverrides& ov = {}) {
  const double width = ov.width_m.value_or(13.0);
  const double length = ov.length_m.value_or(100.0);
  const double facility = ov.facility_m.value_or(1.5);
  const int lanes = ov.init_lanes.value_or(3);
  if (width <= 0 || length <= 0 || facility <= 0 || lanes < 1) {
    throw DomainError("build_template: geometry overrides must be positive");
  }

  RoadNetwork net;
  net.kind = kind;
  auto add_two_way = [&](int a, int b, double len) {
    const int id = net.edge_count();
    net.edges.push_back(detail::make_edge(id, a, b, len, width, facility, lanes));
    net.edges.push_back(detail::make_edge(id + 1, b, a, len, width, facility, lanes));
  };

  if (kind == "street_section") {
    net.nodes = {{0, 0}, {length, 0}};
    add_two_way(0, 1, length);
    net.origins = {0, 1};
    net.destinations = {0, 1};
  } else if (kind == "t_junction") {
    // West, east and south arms joined at node 0.
    net.nodes = {{0, 0}, {-length, 0}, {length, 0}, {0, -length}};
    add_two_way(1, 0, length);
    add_two_way(2, 0, length);
    add_two_way(3, 0, length);
    net.origins = {1, 2, 3};
    net.destinations = {1, 2, 3};
  } else if (kind == "intersection") {
    net.nodes = {{0, 0}, {-length, 0}, {length, 0}, {0, length}, {0, -length}};
    add_two_way(1, 0, length);
    add_two_way(2, 0, length);
    add_two_way(3, 0, length);
    add_two_way(4, 0, length);
    net.origins = {1, 2, 3, 4};
    net.destinations = {1, 2, 3, 4};
  } else if (kind == "roundabout") {
    // Four ring nodes (0..3, counterclockwise) and four boundary nodes (4..7).
    // Arms are the straight edges; the ring is one-way.
    const double arm = ov.length_m.value_or(50.0);
    const double ring_len = 20.0;
    const double r = ring_len;  // synthetic planar layout only
    net.nodes = {{r, 0},  {0, r},  {-r, 0}, {0, -r},
                 {r + arm, 0}, {0, r + arm}, {-r - arm, 0}, {0, -r - arm}};
    for (int i = 0; i < 4; ++i) {
      const int id = net.edge_count();
      net.edges.push_back(detail::make_edge(id, i, (i + 1) % 4, ring_len, width,
                                            facility, lanes));
    }
    add_two_way(4, 0, arm);
    add_two_way(5, 1, arm);
    add_two_way(6, 2, arm);
    add_two_way(7, 3, arm);
    net.origins = {4, 5, 6, 7};
    net.destinations = {4, 5, 6, 7};
  } else {
    throw DomainError("build_template: unknown kind '" + kind + "'");
  }

  detail::connect_successors(net);
  if (auto violations = validate_network(net); !violations.empty()) {
    std::string msg = "build_template: infeasible geometry:";
    for (const std::string& v : violations) msg += "\n  " + v;
    throw DomainError(msg);
  }
  return net;
}

// Every violation is one human-readable line; an empty list means valid.
inline std::vector<std::string> validate_network(const RoadNetwork& net) {
  std::vector<std::string> out;
  const int n = static_cast<int>(net.nodes.size());
  for (const EdgeSpec& e : net.edges) {
    const std::string tag = "edge " + std::to_string(e.id) + ": ";
    if (e.from_node < 0 || e.from_node >= n || e.to_node < 0 || e.to_node >= n)
      out.push_back(tag + "endpoint node missing");
    if (e.length_m <= 0) out.push_back(tag + "non-positive length");
    if (e.width_m <= 0) out.push_back(tag + "non-positive width");
    if (!(e.facility_ratio > 0 && e.facility_ratio < 1))
      out.push_back(tag + "facility ratio out of (0,1)");
    if (!(e.init_sidewalk_ratio > 0 && e.init_sidewalk_ratio < 1))
      out.push_back(tag + "initial sidewalk ratio out of (0,1)");
    if (e.facility_ratio + e.init_sidewalk_ratio >= 1)
      out.push_back(tag + "carriageway width not positive");
    if (e.init_lanes < 1) out.push_back(tag + "lane count below 1");
    const double carriageway =
        (1.0 - e.facility_ratio - e.init_sidewalk_ratio) * e.width_m;
    if (e.init_lanes * kLaneWidth > carriageway + kFeasibilityEps)
      out.push_back(tag + "initial lanes do not fit the carriageway");
    // Room for minimum sidewalk, one lane and the marking buffer.
    const double needed =
        e.facility_ratio * e.width_m + kMinSidewalk + kLaneWidth + kLaneBuffer;
    if (e.width_m < needed - kFeasibilityEps)
      out.push_back(tag + "width infeasible (needs >= " +
                    std::to_string(needed) + " m)");
  }

  // Reachability of every destination from every origin over the edge graph.
  for (int o : net.origins) {
    std::vector<char> seen(net.nodes.size(), 0);
    seen[o] = 1;
    std::deque<int> queue{o};
    while (!queue.empty()) {
      const int at = queue.front();
      queue.pop_front();
      for (const EdgeSpec& e : net.edges) {
        if (e.from_node == at && !seen[e.to_node]) {
          seen[e.to_node] = 1;
          queue.push_back(e.to_node);
        }
      }
    }
    for (int d : net.destinations) {
      if (!seen[d])
        out.push_back("disconnected: destination " + std::to_string(d) +
                      " unreachable from origin " + std::to_string(o));
    }
  }
  return out;
}

// Plain-text edge list for inspection.
inline std::string export_edge_list(const RoadNetwork& net) {
  std::string out = "id,from,to,length_m,width_m,facility_ratio,init_lanes\n";
  char line[160];
  for (const EdgeSpec& e : net.edges) {
    std::snprintf(line, sizeof line, "%d,%d,%d,%.17g,%.17g,%.17g,%d\n", e.id,
                  e.from_node, e.to_node, e.length_m, e.width_m,
                  e.facility_ratio, e.init_lanes);
    out += line;
  }
  return out;
}

}  // namespace rowrl

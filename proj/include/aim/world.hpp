#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aim/config.hpp"
#include "aim/metrics.hpp"
#include "aim/network.hpp"
#include "aim/random.hpp"

namespace aim {

enum class VehicleId : std::uint32_t {};
constexpr std::size_t index(VehicleId v) { return static_cast<std::size_t>(v); }

enum class VehicleState { approaching, queued, granted, crossing };

struct Vehicle {
  VehicleId id{};
  Route route;
  std::size_t route_index = 0;
  Route next_route;  // drawn when the last edge of `route` is finished
  double pos = 0.0;    // front bumper, meters from the start of the current edge
  double speed = 0.0;  // m/s over the last step
  double length = 5.0;
  double budget = 0.0;
  double hurry = 0.0;
  VehicleState state = VehicleState::approaching;
  std::int64_t granted_at = -1;
  std::int64_t last_grant = -1;  // kept after the crossing, for the metrics
  double carry = 0.0;           // overshoot past the stop line, driven on exit
  std::size_t edges_completed = 0;
  std::size_t routes_completed = 0;

  EdgeId edge() const { return route[route_index]; }
  // Intersections still to be crossed on the current route, including the
  // one at the end of the current edge.
  std::size_t remaining_intersections() const { return route.size() - route_index; }
  bool granted() const { return state == VehicleState::granted || state == VehicleState::crossing; }
};

// The vehicle or platoon currently holding an intersection.
struct Occupancy {
  std::vector<VehicleId> group;  // leader first, then contiguous followers
  std::size_t entered = 0;       // members that have entered the box so far
};

struct IntersectionState {
  NodeId node{};
  std::optional<Occupancy> occupant;
  std::optional<VehicleId> in_box;  // member physically inside the intersection
  int dwell_left = 0;               // full steps still to spend in the box
  std::int64_t entered_at = -1;     // step in which in_box crossed the stop line

  bool occupied() const { return occupant.has_value(); }
};

struct World {
  World(Grid g, EngineConfig c, std::uint64_t seed)
      : grid(std::move(g)), cfg(c), rng(seed), lanes(grid.edge_count()) {
    intersections.resize(grid.node_count());
    for (std::size_t n = 0; n < intersections.size(); ++n) {
      intersections[n].node = NodeId(static_cast<std::uint32_t>(n));
    }
  }

  Grid grid;
  EngineConfig cfg;
  Rng rng;
  std::vector<Vehicle> vehicles;
  // Per edge, vehicle ids ordered front (closest to the stop line) first.
  std::vector<std::vector<VehicleId>> lanes;
  std::vector<IntersectionState> intersections;
  std::int64_t clock = 0;
  RunMetrics metrics;
  std::ostream* trace = nullptr;

  Vehicle& vehicle(VehicleId v) { return vehicles[index(v)]; }
  const Vehicle& vehicle(VehicleId v) const { return vehicles[index(v)]; }
  IntersectionState& at(NodeId n) { return intersections[index(n)]; }
  const IntersectionState& at(NodeId n) const { return intersections[index(n)]; }

  double edge_length(EdgeId e) const { return grid.edge(e).length_m; }
  double distance_to_stop_line(const Vehicle& v) const { return edge_length(v.edge()) - v.pos; }
  bool in_zone(const Vehicle& v, double radius) const {
    return v.state != VehicleState::crossing && distance_to_stop_line(v) <= radius;
  }
  bool in_zone(const Vehicle& v) const { return in_zone(v, cfg.approach_radius); }
  bool at_stop_line(const Vehicle& v) const {
    return v.state != VehicleState::crossing && distance_to_stop_line(v) <= 1e-9;
  }
  // Front vehicle of its lane (not necessarily inside the zone).
  bool is_lane_front(const Vehicle& v) const {
    if (v.state == VehicleState::crossing) return false;
    const auto& lane = lanes[index(v.edge())];
    return !lane.empty() && lane.front() == v.id;
  }
  bool is_lane_leader(const Vehicle& v) const { return is_lane_front(v) && in_zone(v); }

  // Inserts a vehicle directly; used by spawning and by hand-built test worlds.
  VehicleId add_vehicle(Route route, double pos, std::size_t route_index = 0) {
    Vehicle v;
    v.id = VehicleId(static_cast<std::uint32_t>(vehicles.size()));
    v.route = std::move(route);
    v.route_index = route_index;
    v.pos = pos;
    v.length = cfg.vehicle_length;
    v.budget = cfg.initial_budget;
    auto& lane = lanes[index(v.edge())];
    auto it = std::find_if(lane.begin(), lane.end(),
                           [&](VehicleId o) { return vehicles[index(o)].pos < pos; });
    lane.insert(it, v.id);
    vehicles.push_back(std::move(v));
    metrics = RunMetrics(vehicles.size());
    return vehicles.back().id;
  }
};

inline std::size_t spawn_capacity(const Grid& grid, const EngineConfig& cfg) {
  const auto per_edge = static_cast<std::size_t>(grid.edge_length() / cfg.slot_length());
  return per_edge * grid.edge_count();
}

// Places `count` vehicles on distinct slots chosen uniformly over the network
// (slots are spaced one body length plus min gap apart, back from each stop
// line) and gives each an initial route starting on its spawn edge.
inline void spawn_vehicles(World& world, std::size_t count) {
  if (count < 1) throw ConfigError("at least one vehicle must be spawned");
  const auto& cfg = world.cfg;
  const std::size_t capacity = spawn_capacity(world.grid, cfg);
  if (count > capacity) {
    throw ConfigError("cannot place " + std::to_string(count) + " vehicles: network capacity is " +
                      std::to_string(capacity));
  }
  const auto per_edge = capacity / world.grid.edge_count();
  std::vector<std::uint32_t> slots(capacity);
  for (std::uint32_t i = 0; i < slots.size(); ++i) slots[i] = i;
  // Partial Fisher-Yates: the first `count` entries are a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + world.rng.uniform_index(slots.size() - i);
    std::swap(slots[i], slots[j]);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const EdgeId edge{static_cast<std::uint32_t>(slots[i] / per_edge)};
    const auto k = slots[i] % per_edge;
    const double pos = world.edge_length(edge) - static_cast<double>(k) * cfg.slot_length();
    Route route = cfg.routes == RoutePolicy::same
                      ? sample_closed_route(world.grid, edge, cfg.route_length, world.rng)
                      : sample_route(world.grid, edge, cfg.route_length, world.rng);
    world.add_vehicle(std::move(route), pos);
  }
}

// Per incoming edge of `node` (EdgeId order), the front vehicle if it lies
// within the approach zone.
inline std::vector<VehicleId> lane_leaders(const World& world, NodeId node) {
  std::vector<VehicleId> leaders;
  for (auto e : world.grid.incoming(node)) {
    const auto& lane = world.lanes[index(e)];
    if (lane.empty()) continue;
    const auto& v = world.vehicle(lane.front());
    if (world.in_zone(v)) leaders.push_back(v.id);
  }
  return leaders;
}

// Vehicles on `edge` within `radius` of its stop line, front first.
inline std::vector<VehicleId> zone_queue(const World& world, EdgeId edge, double radius) {
  std::vector<VehicleId> out;
  for (auto id : world.lanes[index(edge)]) {
    const auto& v = world.vehicle(id);
    if (!world.in_zone(v, radius)) break;
    out.push_back(id);
  }
  return out;
}

inline std::vector<VehicleId> zone_queue(const World& world, EdgeId edge) {
  return zone_queue(world, edge, world.cfg.approach_radius);
}

// All vehicles within `radius` of `node` on its incoming edges.
inline std::size_t vehicles_near(const World& world, NodeId node, double radius) {
  std::size_t n = 0;
  for (auto e : world.grid.incoming(node)) n += zone_queue(world, e, radius).size();
  return n;
}

}  // namespace aim

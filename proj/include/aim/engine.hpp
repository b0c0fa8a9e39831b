#pragma once

#include <algorithm>
#include <bit>
#include <concepts>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "aim/world.hpp"

namespace aim {

struct Grant {
  NodeId node{};
  std::vector<VehicleId> group;  // lane leader first, then contiguous followers
};

struct StrategyDecision {
  std::vector<Grant> grants;
};

// A coordination strategy observes the world before motion and returns the
// grants for this step; post_step runs once motion and bookkeeping are done.
template <class S>
concept CoordinationStrategy = requires(S s, World& w) {
  { s.decide(w) } -> std::same_as<StrategyDecision>;
  { s.post_step(w) };
};

namespace detail {

[[noreturn]] inline void bad_grant(const World& w, NodeId node, const std::string& why) {
  throw std::logic_error("step " + std::to_string(w.clock) + ", node " + std::to_string(index(node)) +
                         ": invalid grant: " + why);
}

inline void apply_grants(World& w, const StrategyDecision& decision) {
  for (const auto& g : decision.grants) {
    auto& ix = w.at(g.node);
    if (ix.occupied()) bad_grant(w, g.node, "intersection already occupied");
    if (g.group.empty()) bad_grant(w, g.node, "empty group");
    const auto& head = w.vehicle(g.group.front());
    if (w.grid.edge(head.edge()).to != g.node || !w.is_lane_leader(head)) {
      bad_grant(w, g.node, "vehicle " + std::to_string(index(head.id)) + " is not a lane leader here");
    }
    const auto& lane = w.lanes[index(head.edge())];
    if (g.group.size() > lane.size()) bad_grant(w, g.node, "platoon longer than its lane");
    for (std::size_t i = 0; i < g.group.size(); ++i) {
      if (lane[i] != g.group[i]) bad_grant(w, g.node, "platoon is not a contiguous lane prefix");
      if (w.vehicle(g.group[i]).granted()) bad_grant(w, g.node, "vehicle already granted");
    }
    ix.occupant = Occupancy{g.group, 0};
    for (auto id : g.group) {
      auto& v = w.vehicle(id);
      v.state = VehicleState::granted;
      v.granted_at = w.clock;
      v.last_grant = w.clock;
    }
  }
}

inline Route next_route_for(World& w, const Vehicle& v) {
  if (w.cfg.routes == RoutePolicy::same) return v.route;
  return continue_route(w.grid, v.route.back(), w.cfg.route_length, w.rng);
}

// Car-following along each lane, front to back. A vehicle may pass its stop
// line only if it is the next member of the intersection's occupant group
// and the intersection box is empty.
inline void move_vehicles(World& w) {
  const double dt = 1.0;
  const double full_move = w.cfg.v_max * dt;
  for (std::size_t e = 0; e < w.lanes.size(); ++e) {
    auto& lane = w.lanes[e];
    if (lane.empty()) continue;
    const EdgeId edge{static_cast<std::uint32_t>(e)};
    const double L = w.edge_length(edge);
    auto& ix = w.at(w.grid.edge(edge).to);

    std::vector<VehicleId> stays;
    stays.reserve(lane.size());
    double ahead_rear = 0.0;
    for (auto id : lane) {
      auto& v = w.vehicle(id);
      const double target = v.pos + full_move;
      double limit;
      if (stays.empty()) {
        const bool may_enter = ix.occupant && !ix.in_box && ix.occupant->entered < ix.occupant->group.size() &&
                               ix.occupant->group[ix.occupant->entered] == id;
        if (may_enter && target > L) {
          ix.in_box = id;
          ix.dwell_left = w.cfg.t_cross;
          ix.entered_at = w.clock;
          ++ix.occupant->entered;
          v.carry = target - L;
          v.speed = full_move / dt;
          v.state = VehicleState::crossing;
          continue;
        }
        limit = L;
      } else {
        limit = ahead_rear - w.cfg.min_gap;
      }
      const double next = std::max(v.pos, std::min(target, limit));
      v.speed = (next - v.pos) / dt;
      v.pos = next;
      if (!v.granted()) {
        v.state = v.speed < w.cfg.wait_speed_threshold ? VehicleState::queued : VehicleState::approaching;
      }
      ahead_rear = v.pos - v.length;
      stays.push_back(id);
    }
    lane = std::move(stays);
  }
}

// Counts down the box dwell. The step in which a vehicle crosses the stop
// line does not count, so it spends t_cross full steps inside (none when
// t_cross is 0); it then drives
// its overshoot onto the next edge within the step it leaves (regenerating
// its route at the end of the current one). The occupant token is released
// once every member of the group has left the box.
inline void advance_intersections(World& w) {
  for (auto& ix : w.intersections) {
    if (!ix.in_box) continue;
    auto& v = w.vehicle(*ix.in_box);
    if (ix.entered_at != w.clock && ix.dwell_left > 0) --ix.dwell_left;
    if (ix.dwell_left > 0) {
      v.speed = w.cfg.v_max;
      continue;
    }
    const bool last_edge = v.route_index + 1 == v.route.size();
    if (last_edge && v.next_route.empty()) v.next_route = next_route_for(w, v);
    const EdgeId next = last_edge ? v.next_route.front() : v.route[v.route_index + 1];
    auto& next_lane = w.lanes[index(next)];
    double pos = v.carry;
    if (!next_lane.empty()) {
      const auto& back = w.vehicle(next_lane.back());
      const double room = back.pos - back.length - w.cfg.min_gap;
      if (room < 0.0) {
        v.speed = 0.0;  // exit blocked, keeps the intersection
        v.carry = 0.0;
        continue;
      }
      pos = std::min(pos, room);
    }
    if (last_edge) {
      v.route = std::move(v.next_route);
      v.next_route.clear();
      v.route_index = 0;
      ++v.routes_completed;
      v.budget = w.cfg.initial_budget;
    } else {
      ++v.route_index;
    }
    ++v.edges_completed;
    v.pos = pos;
    v.speed = w.cfg.v_max;
    v.carry = 0.0;
    v.state = VehicleState::approaching;
    v.granted_at = -1;
    next_lane.push_back(v.id);
    ix.in_box.reset();
    if (ix.occupant && ix.occupant->entered == ix.occupant->group.size()) ix.occupant.reset();
  }
}

}  // namespace detail

// What the metric timers see of every vehicle after the motion of a step.
inline std::vector<VehicleObservation> observe(const World& w) {
  std::vector<VehicleObservation> obs(w.vehicles.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto& v = w.vehicles[i];
    obs[i] = {w.is_lane_leader(v), v.granted(), v.speed, v.last_grant};
  }
  return obs;
}

// Speed at or above which a queued vehicle counts as flowing again.
inline double free_speed(const EngineConfig& cfg) { return cfg.v_max - 1e-9; }

namespace detail {

inline void observe_metrics(World& w) {
  const auto obs = observe(w);
  w.metrics.on_step(obs, w.clock, w.cfg.wait_speed_threshold, free_speed(w.cfg));
}

inline const char* state_name(VehicleState s) {
  switch (s) {
    case VehicleState::approaching: return "approaching";
    case VehicleState::queued: return "queued";
    case VehicleState::granted: return "granted";
    case VehicleState::crossing: return "crossing";
  }
  return "?";
}

inline void write_trace(const World& w) {
  for (const auto& v : w.vehicles) {
    *w.trace << w.clock << ' ' << index(v.id) << ' ' << index(v.edge()) << ' ' << v.pos << ' ' << v.speed << ' '
             << state_name(v.state) << '\n';
  }
}

}  // namespace detail

// Advances the world by one second.
template <CoordinationStrategy Strategy>
void step(World& world, Strategy& strategy) {
  const StrategyDecision decision = strategy.decide(world);
  detail::apply_grants(world, decision);
  detail::move_vehicles(world);
  detail::advance_intersections(world);
  detail::observe_metrics(world);
  strategy.post_step(world);
  if (world.trace) detail::write_trace(world);
  ++world.clock;
}

// Safety and bookkeeping checks; returns one message per violation.
inline std::vector<std::string> check_invariants(const World& w) {
  std::vector<std::string> errs;
  auto fail = [&](std::string msg) { errs.push_back("step " + std::to_string(w.clock) + ": " + std::move(msg)); };
  const double eps = 1e-9;

  std::size_t placed = 0;
  for (std::size_t e = 0; e < w.lanes.size(); ++e) {
    const EdgeId edge{static_cast<std::uint32_t>(e)};
    const double L = w.edge_length(edge);
    const auto& lane = w.lanes[e];
    placed += lane.size();
    for (std::size_t i = 0; i < lane.size(); ++i) {
      const auto& v = w.vehicle(lane[i]);
      if (v.edge() != edge) fail("vehicle " + std::to_string(index(v.id)) + " listed on the wrong edge");
      if (v.pos < -eps || v.pos > L + eps) fail("vehicle " + std::to_string(index(v.id)) + " off its edge");
      if (i > 0) {
        const auto& ahead = w.vehicle(lane[i - 1]);
        if (ahead.pos - ahead.length - v.pos < w.cfg.min_gap - eps) {
          fail("collision gap violated on edge " + std::to_string(e));
        }
      }
    }
  }
  for (const auto& ix : w.intersections) {
    if (ix.in_box) {
      ++placed;
      const auto id = *ix.in_box;
      if (!ix.occupant) {
        fail("vehicle in intersection " + std::to_string(index(ix.node)) + " without an occupant token");
      } else {
        const auto& g = ix.occupant->group;
        if (std::find(g.begin(), g.end(), id) == g.end()) {
          fail("intersection " + std::to_string(index(ix.node)) + " holds a vehicle outside its occupant group");
        }
      }
    }
  }
  std::size_t crossing = 0;
  for (const auto& v : w.vehicles) {
    if (v.state == VehicleState::crossing) ++crossing;
    if (v.speed < -eps || v.speed > w.cfg.v_max + eps) fail("speed out of range");
    if (v.hurry < 0) fail("negative hurry for vehicle " + std::to_string(index(v.id)));
    if (v.budget < 0) fail("negative budget for vehicle " + std::to_string(index(v.id)));
  }
  std::size_t boxes = 0;
  for (const auto& ix : w.intersections) boxes += ix.in_box ? 1 : 0;
  if (crossing != boxes) fail("crossing vehicles do not match occupied intersection boxes");
  if (placed != w.vehicles.size()) fail("vehicle count not conserved");
  return errs;
}

// FNV-1a digest of the full vehicle state, for trajectory comparisons.
inline std::uint64_t world_digest(const World& w) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(w.clock));
  for (const auto& v : w.vehicles) {
    mix(index(v.edge()));
    mix(std::bit_cast<std::uint64_t>(v.pos));
    mix(std::bit_cast<std::uint64_t>(v.speed));
    mix(std::bit_cast<std::uint64_t>(v.hurry));
    mix(std::bit_cast<std::uint64_t>(v.budget));
    mix(static_cast<std::uint64_t>(v.state));
  }
  return h;
}

}  // namespace aim

#pragma once

#include <algorithm>

#include "aim/aim.hpp"

namespace aim::testing {

// 3x3 grid; node 4 is the only interior intersection.
inline constexpr NodeId kCenter{4};

inline World small_world(EngineConfig cfg = {}) {
  cfg.grid_width = 3;
  cfg.grid_height = 3;
  return World(build_grid(3, 3, cfg.edge_length), cfg, 7);
}

inline EdgeId edge_between(const Grid& g, std::size_t from, std::size_t to) {
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edge(EdgeId(static_cast<std::uint32_t>(e)));
    if (index(ed.from) == from && index(ed.to) == to) return EdgeId(static_cast<std::uint32_t>(e));
  }
  throw std::logic_error("no such edge");
}

// Two-edge route entering the centre from `from` and leaving straight on.
inline Route through_center(const Grid& g, std::size_t from) {
  const std::size_t exit = 8 - from;
  return {edge_between(g, from, 4), edge_between(g, 4, exit)};
}

// Places a vehicle `dist` metres before the centre's stop line.
inline VehicleId place(World& w, std::size_t from, double dist) {
  return w.add_vehicle(through_center(w.grid, from), w.cfg.edge_length - dist);
}

// Hands out grants chosen by the test.
struct ScriptedStrategy {
  std::vector<Grant> next;
  StrategyDecision decide(World&) {
    StrategyDecision d{next};
    next.clear();
    return d;
  }
  void post_step(World&) {}
};

// Grants the lowest-id leader at every free intersection.
struct GreedyStrategy {
  StrategyDecision decide(World& w) {
    StrategyDecision d;
    for (const auto& ix : w.intersections) {
      if (ix.occupied()) continue;
      const auto leaders = lane_leaders(w, ix.node);
      if (leaders.empty()) continue;
      d.grants.push_back({ix.node, {*std::min_element(leaders.begin(), leaders.end())}});
    }
    return d;
  }
  void post_step(World&) {}
};

}  // namespace aim::testing

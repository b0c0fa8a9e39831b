#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <span>
#include <vector>

#include "aim/engine.hpp"

namespace aim {

// One update of a vehicle's hurry. `c` is +IC while waiting and -DC in free
// motion; the result never drops below zero.
//   lin  H + C
//   log  H + C ln(H + 2)
//   gro  H + max(H C / 100, C)
inline double hurry_update(double hurry, HurryFn fn, double c) {
  double next = hurry;
  switch (fn) {
    case HurryFn::lin: next = hurry + c; break;
    case HurryFn::log: next = hurry + c * std::log(hurry + 2.0); break;
    case HurryFn::gro: next = hurry + std::max(hurry * c / 100.0, c); break;
  }
  return std::max(0.0, next);
}

struct HurryNeighbor {
  double hurry;
  double distance;  // m, strictly positive
};

// Pull exerted on a vehicle by its same-lane neighbours. Only neighbours in
// a greater hurry contribute and each term is capped at the hurry difference,
// so repeated spreading converges instead of diverging. The total is also
// capped at the largest difference, which keeps a vehicle from overshooting
// its most hurried neighbour when several pull at once.
//   std  |Hn - Hv| DM / D
//   dbl  ln(|Hn - Hv| + 1) DM / D
//   rbl  ln(|Hn - Hv| + 1) SR DM / D
inline double spreading_delta(double hurry, std::span<const HurryNeighbor> neighbors, SpreadFn fn,
                              double dm, double sr) {
  double total = 0.0;
  double widest = 0.0;
  for (const auto& n : neighbors) {
    assert(n.distance > 0.0);
    const double diff = n.hurry - hurry;
    if (diff <= 0.0) continue;
    double term = 0.0;
    switch (fn) {
      case SpreadFn::standard: term = diff * dm / n.distance; break;
      case SpreadFn::distance_log: term = std::log(diff + 1.0) * dm / n.distance; break;
      case SpreadFn::range_log: term = std::log(diff + 1.0) * sr * dm / n.distance; break;
    }
    total += std::min(term, diff);
    widest = std::max(widest, diff);
  }
  return std::min(total, widest);
}

// Emergent Behavior coordination: the most hurried lane leader crosses, and
// takes along the followers whose hurry has converged to its own.
class EmergentStrategy {
public:
  explicit EmergentStrategy(EbConfig cfg) : cfg_(cfg) { validate(cfg_); }

  const EbConfig& config() const { return cfg_; }

  StrategyDecision decide(World& w) {
    StrategyDecision d;
    for (const auto& ix : w.intersections) {
      if (ix.occupied()) continue;
      const auto leaders = lane_leaders(w, ix.node);
      if (leaders.empty()) continue;
      VehicleId best = leaders.front();
      for (auto id : leaders) {
        const auto& v = w.vehicle(id);
        const auto& b = w.vehicle(best);
        if (v.hurry > b.hurry || (v.hurry == b.hurry && id < best)) best = id;
      }
      d.grants.push_back({ix.node, platoon_behind(w, best)});
    }
    return d;
  }

  void post_step(World& w) {
    const double threshold = w.cfg.wait_speed_threshold;
    std::vector<double> updated(w.vehicles.size());
    for (std::size_t i = 0; i < w.vehicles.size(); ++i) {
      const auto& v = w.vehicles[i];
      updated[i] = v.speed < threshold ? hurry_update(v.hurry, cfg_.inc_fn, cfg_.ic)
                                       : hurry_update(v.hurry, cfg_.dec_fn, -cfg_.dc);
    }
    // Spreading reads the post-update snapshot and writes all vehicles at
    // once, so lane order does not matter.
    std::vector<double> next = updated;
    std::vector<HurryNeighbor> nbrs;
    for (const auto& lane : w.lanes) {
      for (std::size_t i = 0; i < lane.size(); ++i) {
        const auto& v = w.vehicle(lane[i]);
        nbrs.clear();
        for (std::size_t j = 0; j < lane.size(); ++j) {
          if (j == i) continue;
          const double d = std::abs(w.vehicle(lane[j]).pos - v.pos);
          if (d <= cfg_.sr && d > 0.0) nbrs.push_back({updated[index(lane[j])], d});
        }
        next[index(v.id)] += spreading_delta(updated[index(v.id)], nbrs, cfg_.spread_fn, cfg_.dm, cfg_.sr);
      }
    }
    for (std::size_t i = 0; i < w.vehicles.size(); ++i) w.vehicles[i].hurry = std::max(0.0, next[i]);
  }

  // Leader plus the contiguous in-zone followers whose hurry is within
  // platoon_eps of the leader's.
  std::vector<VehicleId> platoon_behind(const World& w, VehicleId leader) const {
    const auto& lead = w.vehicle(leader);
    std::vector<VehicleId> group{leader};
    const auto queue = zone_queue(w, lead.edge());
    for (std::size_t i = 1; i < queue.size(); ++i) {
      if (std::abs(w.vehicle(queue[i]).hurry - lead.hurry) > cfg_.platoon_eps) break;
      group.push_back(queue[i]);
    }
    return group;
  }

private:
  EbConfig cfg_;
};

static_assert(CoordinationStrategy<EmergentStrategy>);

}  // namespace aim

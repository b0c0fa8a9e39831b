#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "support.hpp"

using namespace aim;
using aim::testing::GreedyStrategy;
using aim::testing::ScriptedStrategy;
using aim::testing::kCenter;
using aim::testing::place;
using aim::testing::small_world;

namespace {

// Steps a lone, always-granted vehicle needs to finish a 12-edge route of
// 100 m edges: continuous driving time plus the whole-step dwells.
int route_completion_steps(int t_cross) {
  const double drive = 1200.0 / 13.89;
  return static_cast<int>(std::ceil(drive)) + 12 * t_cross;
}

}  // namespace

class SingleVehicle : public ::testing::TestWithParam<int> {};

TEST_P(SingleVehicle, RouteTimeMatchesKinematics) {
  EngineConfig cfg;
  cfg.t_cross = GetParam();
  World w(build_grid(5, 5, 100.0), cfg, 1);
  Rng rng(5);
  w.add_vehicle(sample_route(w.grid, EdgeId{9}, 12, rng), 0.0);
  GreedyStrategy s;
  int steps = 0;
  while (w.vehicles[0].routes_completed == 0 && steps < 1000) {
    step(w, s);
    ++steps;
    ASSERT_TRUE(check_invariants(w).empty());
  }
  EXPECT_EQ(steps, route_completion_steps(GetParam()));
  EXPECT_EQ(w.vehicles[0].edges_completed, 12u);
}

INSTANTIATE_TEST_SUITE_P(Dwell, SingleVehicle, ::testing::Values(0, 1, 2, 3));

TEST(Step, GrantedVehicleHasIntersectionToItself) {
  auto w = small_world();
  const auto a = place(w, 3, 20.0);
  const auto b = place(w, 1, 20.0);
  ScriptedStrategy s;
  s.next.push_back({kCenter, {a}});
  step(w, s);
  EXPECT_TRUE(w.at(kCenter).occupied());
  for (int i = 0; i < 5; ++i) {
    if (w.at(kCenter).in_box) {
      EXPECT_EQ(*w.at(kCenter).in_box, a);
    }
    EXPECT_NE(w.vehicle(b).state, VehicleState::crossing);
    step(w, s);
  }
  const auto& vb = w.vehicle(b);
  EXPECT_EQ(vb.edge(), aim::testing::through_center(w.grid, 1)[0]);
  EXPECT_DOUBLE_EQ(vb.pos, w.cfg.edge_length);
  EXPECT_DOUBLE_EQ(vb.speed, 0.0);
  EXPECT_EQ(w.vehicle(a).route_index, 1u);
}

TEST(Step, PlatoonEntersInLaneOrderAndReleasesAfterLast) {
  EngineConfig cfg;
  cfg.t_cross = 1;
  auto w = small_world(cfg);
  const double slot = cfg.slot_length();
  const auto a = place(w, 3, 0.0);
  const auto b = place(w, 3, slot);
  const auto c = place(w, 3, 2 * slot);
  ScriptedStrategy s;
  s.next.push_back({kCenter, {a, b, c}});
  std::vector<VehicleId> entered;
  int steps = 0;
  do {
    step(w, s);
    ++steps;
    const auto& ix = w.at(kCenter);
    if (ix.in_box && (entered.empty() || entered.back() != *ix.in_box)) entered.push_back(*ix.in_box);
    ASSERT_TRUE(check_invariants(w).empty());
  } while (w.at(kCenter).occupied() && steps < 50);
  EXPECT_EQ(entered, (std::vector<VehicleId>{a, b, c}));
  for (auto id : {a, b, c}) EXPECT_EQ(w.vehicle(id).route_index, 1u);
  // Each member crosses the line in one step and dwells one more.
  EXPECT_EQ(steps, 6);
}

TEST(Step, ExitBehindVehicleThatDrivesOn) {
  EngineConfig cfg;
  cfg.t_cross = 0;
  auto w = small_world(cfg);
  const auto a = place(w, 3, 0.0);
  // A parked vehicle right at the start of a's next edge.
  const auto exit_edge = aim::testing::through_center(w.grid, 3)[1];
  const Route parked_route{exit_edge, aim::testing::edge_between(w.grid, 5, 8)};
  const auto p = w.add_vehicle(parked_route, 3.0);
  ScriptedStrategy s;
  s.next.push_back({kCenter, {a}});
  step(w, s);
  // p drove on during the same step, so a can leave immediately.
  EXPECT_FALSE(w.at(kCenter).occupied());
  EXPECT_EQ(w.vehicle(a).edge(), exit_edge);
  EXPECT_LE(w.vehicle(a).pos, w.vehicle(p).pos - cfg.vehicle_length - cfg.min_gap + 1e-9);
}

TEST(Step, ExitWaitsForRoomOnNextEdge) {
  EngineConfig cfg;
  cfg.t_cross = 0;
  auto w = small_world(cfg);
  const auto exit_edge = aim::testing::through_center(w.grid, 3)[1];
  const auto onward = aim::testing::edge_between(w.grid, 5, 8);
  // A queue filling the exit edge up to its start, held at node 5 by a
  // strategy that never grants there.
  const double L = cfg.edge_length;
  std::vector<VehicleId> queue;
  for (double pos = L; pos >= 0.0; pos -= cfg.slot_length()) {
    queue.push_back(w.add_vehicle(Route{exit_edge, onward}, pos));
  }
  ASSERT_LT(w.vehicle(queue.back()).pos - cfg.vehicle_length, cfg.min_gap);
  const auto a = place(w, 3, 0.0);
  ScriptedStrategy s;
  s.next.push_back({kCenter, {a}});
  for (int i = 0; i < 4; ++i) {
    step(w, s);
    ASSERT_TRUE(check_invariants(w).empty());
  }
  EXPECT_TRUE(w.at(kCenter).occupied());
  EXPECT_EQ(w.vehicle(a).state, VehicleState::crossing);
  EXPECT_DOUBLE_EQ(w.vehicle(a).speed, 0.0);
}

TEST(Step, InvalidGrantsRejected) {
  auto w = small_world();
  const auto a = place(w, 3, 0.0);
  const auto b = place(w, 3, 10.0);
  const auto far = place(w, 1, 90.0);
  ScriptedStrategy s;
  s.next.push_back({kCenter, {b}});
  EXPECT_THROW(step(w, s), std::logic_error);
  s.next = {{kCenter, {far}}};
  EXPECT_THROW(step(w, s), std::logic_error);
  s.next = {{kCenter, {b, a}}};
  EXPECT_THROW(step(w, s), std::logic_error);
  s.next = {{kCenter, {a}}, {kCenter, {a}}};
  EXPECT_THROW(step(w, s), std::logic_error);
}

TEST(LaneLeaders, EmptyIntersection) {
  auto w = small_world();
  EXPECT_TRUE(lane_leaders(w, kCenter).empty());
}

TEST(LaneLeaders, OnePerLane) {
  EngineConfig cfg;
  cfg.approach_radius = 50.0;
  auto w = small_world(cfg);
  place(w, 3, 30.0);
  const auto front = place(w, 3, 0.0);
  place(w, 3, 15.0);
  const auto other = place(w, 1, 5.0);
  const auto leaders = lane_leaders(w, kCenter);
  ASSERT_EQ(leaders.size(), 2u);
  EXPECT_EQ(std::set<VehicleId>(leaders.begin(), leaders.end()), (std::set<VehicleId>{front, other}));
}

TEST(LaneLeaders, OutsideZoneIsNotLeader) {
  EngineConfig cfg;
  cfg.approach_radius = 50.0;
  cfg.edge_length = 300.0;
  auto w = small_world(cfg);
  place(w, 3, 200.0);
  EXPECT_TRUE(lane_leaders(w, kCenter).empty());
}

TEST(Spawn, DeterministicAndGapped) {
  for (std::size_t count : {80u, 120u}) {
    EngineConfig cfg;
    World a(build_grid(5, 5, 100.0), cfg, 99), b(build_grid(5, 5, 100.0), cfg, 99);
    spawn_vehicles(a, count);
    spawn_vehicles(b, count);
    ASSERT_EQ(a.vehicles.size(), count);
    for (std::size_t i = 0; i < count; ++i) {
      EXPECT_EQ(a.vehicles[i].route, b.vehicles[i].route);
      EXPECT_EQ(a.vehicles[i].pos, b.vehicles[i].pos);
    }
    EXPECT_TRUE(check_invariants(a).empty());
    EXPECT_EQ(world_digest(a), world_digest(b));
  }
}

TEST(Spawn, CapacityExceeded) {
  World w(build_grid(2, 2, 100.0), EngineConfig{}, 1);
  EXPECT_THROW(spawn_vehicles(w, 1000000), ConfigError);
  World full(build_grid(2, 2, 100.0), EngineConfig{}, 1);
  EXPECT_NO_THROW(spawn_vehicles(full, spawn_capacity(full.grid, full.cfg)));
  EXPECT_TRUE(check_invariants(full).empty());
}

TEST(Step, DeterministicTrajectoryAndInvariants) {
  auto run = [](std::uint64_t seed) {
    EngineConfig cfg;
    World w(build_grid(5, 5, 100.0), cfg, seed);
    spawn_vehicles(w, 120);
    GreedyStrategy s;
    std::vector<std::uint64_t> digests;
    for (int i = 0; i < 600; ++i) {
      step(w, s);
      EXPECT_TRUE(check_invariants(w).empty()) << "step " << i;
      digests.push_back(world_digest(w));
    }
    return digests;
  };
  EXPECT_EQ(run(4), run(4));
  EXPECT_NE(run(4), run(5));
}

TEST(Step, SameRoutePolicyRepeatsRoute) {
  EngineConfig cfg;
  cfg.routes = RoutePolicy::same;
  World w(build_grid(5, 5, 100.0), cfg, 3);
  Rng rng(8);
  const auto route = sample_closed_route(w.grid, EdgeId{4}, 12, rng);
  w.add_vehicle(route, 0.0);
  GreedyStrategy s;
  for (int i = 0; i < 300 && w.vehicles[0].routes_completed < 2; ++i) step(w, s);
  EXPECT_EQ(w.vehicles[0].routes_completed, 2u);
  EXPECT_EQ(w.vehicles[0].route, route);
}

TEST(Step, BudgetResetsOnRouteCompletion) {
  EngineConfig cfg;
  cfg.initial_budget = 100.0;
  World w(build_grid(5, 5, 100.0), cfg, 3);
  Rng rng(8);
  const auto first = sample_route(w.grid, EdgeId{4}, 12, rng);
  w.add_vehicle(first, 0.0);
  w.vehicles[0].budget = 7.0;
  GreedyStrategy s;
  while (w.vehicles[0].routes_completed == 0) step(w, s);
  const auto& v = w.vehicles[0];
  EXPECT_DOUBLE_EQ(v.budget, 100.0);
  ASSERT_EQ(v.route.size(), 12u);
  EXPECT_EQ(w.grid.edge(v.route.front()).from, w.grid.edge(first.back()).to);
  EXPECT_NE(v.route.front(), w.grid.reverse(first.back()));
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "support.hpp"

using namespace aim;
using aim::testing::kCenter;
using aim::testing::place;
using aim::testing::small_world;

namespace {

void expect_rel(double got, double want) {
  EXPECT_TRUE(oracle::close_rel(got, want)) << "got " << got << ", want " << want;
}

EbConfig lin_config() {
  EbConfig c;
  c.inc_fn = HurryFn::lin;
  c.dec_fn = HurryFn::lin;
  return c;
}

}  // namespace

TEST(Hurry, HandValues) {
  expect_rel(hurry_update(5, HurryFn::lin, 10), 15.0);
  expect_rel(hurry_update(0, HurryFn::log, 10), 10.0 * std::log(2.0));
  expect_rel(hurry_update(0, HurryFn::log, 10), 6.931471805599453);
  expect_rel(hurry_update(50, HurryFn::gro, -10), 45.0);
  EXPECT_EQ(hurry_update(0, HurryFn::lin, -10), 0.0);
}

TEST(Hurry, NegativeBranches) {
  // log, decreasing: 50 - ln 52
  expect_rel(hurry_update(50, HurryFn::log, -1), 50.0 - std::log(52.0));
  // log clamps once C ln(H+2) exceeds H
  EXPECT_EQ(hurry_update(5, HurryFn::log, -10), 0.0);
  // gro, decreasing: H C / 100 wins below H = 100 and C above it
  expect_rel(hurry_update(20, HurryFn::gro, -10), 18.0);
  expect_rel(hurry_update(500, HurryFn::gro, -10), 490.0);
  expect_rel(hurry_update(5, HurryFn::gro, -10), 4.5);
  EXPECT_EQ(hurry_update(5, HurryFn::gro, -150), 0.0);
  // gro, increasing: the lower bound C until H passes 100
  expect_rel(hurry_update(50, HurryFn::gro, 10), 60.0);
  expect_rel(hurry_update(500, HurryFn::gro, 10), 550.0);
}

TEST(Hurry, MatchesReferenceOnGrid) {
  for (auto fn : {HurryFn::lin, HurryFn::log, HurryFn::gro}) {
    for (double h = 0; h <= 400; h += 3.5) {
      for (double c : {-25.0, -10.0, -1.0, -0.25, 0.5, 10.0, 42.0}) {
        const double got = hurry_update(h, fn, c);
        EXPECT_GE(got, 0.0);
        EXPECT_TRUE(oracle::close_rel(got, oracle::hurry(h, fn, c))) << to_string(fn) << " h=" << h << " c=" << c;
      }
    }
  }
}

TEST(Spreading, HandValues) {
  const std::vector<HurryNeighbor> one{{100, 20}};
  expect_rel(spreading_delta(50, one, SpreadFn::standard, 10, 100), 25.0);
  EXPECT_EQ(spreading_delta(50, {}, SpreadFn::standard, 10, 100), 0.0);
  for (auto fn : {SpreadFn::standard, SpreadFn::distance_log, SpreadFn::range_log}) {
    const std::vector<HurryNeighbor> lower{{50, 10}};
    EXPECT_EQ(spreading_delta(100, lower, fn, 10, 100), 0.0);
  }
  // uncapped ln(e) * SR * DM / D = 10, cap e - 1
  const std::vector<HurryNeighbor> capped{{std::numbers::e - 1.0, 100}};
  expect_rel(spreading_delta(0, capped, SpreadFn::range_log, 10, 100), std::numbers::e - 1.0);
}

TEST(Spreading, UncappedTermsFollowFormulas) {
  // Large distances keep every term below its cap.
  const std::vector<HurryNeighbor> n{{40, 200}, {25, 500}};
  const double std_ = 30.0 * 10 / 200 + 15.0 * 10 / 500;
  const double dbl = std::log(31.0) * 10 / 200 + std::log(16.0) * 10 / 500;
  expect_rel(spreading_delta(10, n, SpreadFn::standard, 10, 100), std_);
  expect_rel(spreading_delta(10, n, SpreadFn::distance_log, 10, 100), dbl);
  expect_rel(spreading_delta(10, n, SpreadFn::range_log, 10, 100), dbl * 100);
}

TEST(Spreading, NeverOvershootsMostHurriedNeighbour) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> h(0, 200), d(0.5, 100);
  for (int i = 0; i < 2000; ++i) {
    const double hv = h(gen);
    std::vector<HurryNeighbor> n;
    double top = hv;
    for (int k = 0; k < 4; ++k) {
      n.push_back({h(gen), d(gen)});
      top = std::max(top, n.back().hurry);
    }
    for (auto fn : {SpreadFn::standard, SpreadFn::distance_log, SpreadFn::range_log}) {
      const double delta = spreading_delta(hv, n, fn, 10, 100);
      EXPECT_GE(delta, 0.0);
      EXPECT_LE(hv + delta, top + 1e-9);
    }
  }
}

TEST(EbDecide, MostHurriedLeaderWins) {
  auto w = small_world();
  const auto a = place(w, 3, 0.0);
  const auto b = place(w, 1, 0.0);
  w.vehicle(a).hurry = 12.0;
  w.vehicle(b).hurry = 7.5;
  EmergentStrategy s(EbConfig{});
  const auto d = s.decide(w);
  ASSERT_EQ(d.grants.size(), 1u);
  EXPECT_EQ(d.grants[0].node, kCenter);
  EXPECT_EQ(d.grants[0].group, std::vector<VehicleId>{a});
}

TEST(EbDecide, PlatoonOfEqualHurry) {
  auto w = small_world();
  const double slot = w.cfg.slot_length();
  std::vector<VehicleId> lane;
  for (int i = 0; i < 4; ++i) lane.push_back(place(w, 3, i * slot));
  for (int i = 0; i < 3; ++i) w.vehicle(lane[i]).hurry = 10.0;
  w.vehicle(lane[3]).hurry = 3.0;
  EbConfig cfg;
  cfg.platoon_eps = 0.0;
  EmergentStrategy s(cfg);
  const auto d = s.decide(w);
  ASSERT_EQ(d.grants.size(), 1u);
  EXPECT_EQ(d.grants[0].group, (std::vector<VehicleId>{lane[0], lane[1], lane[2]}));
}

TEST(EbDecide, PlatoonStopsAtFirstDissimilarFollower) {
  auto w = small_world();
  const double slot = w.cfg.slot_length();
  std::vector<VehicleId> lane;
  for (int i = 0; i < 3; ++i) lane.push_back(place(w, 3, i * slot));
  w.vehicle(lane[0]).hurry = 10.0;
  w.vehicle(lane[1]).hurry = 20.0;
  w.vehicle(lane[2]).hurry = 10.0;
  EmergentStrategy s(EbConfig{});
  EXPECT_EQ(s.decide(w).grants.at(0).group, std::vector<VehicleId>{lane[0]});
}

TEST(EbDecide, TieGoesToLowerId) {
  auto w = small_world();
  const auto a = place(w, 5, 0.0);
  const auto b = place(w, 1, 0.0);
  w.vehicle(a).hurry = 10.0;
  w.vehicle(b).hurry = 10.0;
  EmergentStrategy s(EbConfig{});
  EXPECT_EQ(s.decide(w).grants.at(0).group.front(), std::min(a, b));
}

TEST(EbDecide, ArgmaxUnchangedByScaling) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> h(0, 50);
  for (int trial = 0; trial < 200; ++trial) {
    auto w = small_world();
    std::vector<VehicleId> ids;
    for (std::size_t from : {1u, 3u, 5u, 7u}) ids.push_back(place(w, from, 0.0));
    for (auto id : ids) w.vehicle(id).hurry = std::round(h(gen));
    EmergentStrategy s(EbConfig{});
    const auto before = s.decide(w).grants.at(0).group.front();
    const double k = 0.1 + 10.0 * static_cast<double>(trial) / 200.0;
    for (auto id : ids) w.vehicle(id).hurry *= k;
    EXPECT_EQ(s.decide(w).grants.at(0).group.front(), before) << "trial " << trial;
  }
}

TEST(EbPostStep, FreeMotionDecreasesByDc) {
  auto w = small_world();
  const auto a = place(w, 3, 60.0);
  const auto b = place(w, 1, 60.0);
  w.vehicle(a).hurry = 25.0;
  w.vehicle(b).hurry = 5.0;
  for (auto id : {a, b}) w.vehicle(id).speed = w.cfg.v_max;
  EmergentStrategy s(lin_config());
  s.post_step(w);
  EXPECT_DOUBLE_EQ(w.vehicle(a).hurry, 15.0);
  EXPECT_DOUBLE_EQ(w.vehicle(b).hurry, 0.0);
}

TEST(EbPostStep, StoppedPairWithEqualHurry) {
  auto w = small_world();
  const auto a = place(w, 3, 0.0);
  const auto b = place(w, 3, 10.0);
  EmergentStrategy s(lin_config());
  s.post_step(w);
  EXPECT_DOUBLE_EQ(w.vehicle(a).hurry, 10.0);
  EXPECT_DOUBLE_EQ(w.vehicle(b).hurry, 10.0);
}

TEST(EbPostStep, StoppedPairConverges) {
  auto w = small_world();
  const auto a = place(w, 3, 0.0);
  const auto b = place(w, 3, 20.0);
  w.vehicle(a).hurry = 100.0;
  EmergentStrategy s(lin_config());
  s.post_step(w);
  // both gain IC = 10, then b is pulled up by min(100 * 10 / 20, 100) = 50
  EXPECT_DOUBLE_EQ(w.vehicle(a).hurry, 110.0);
  EXPECT_DOUBLE_EQ(w.vehicle(b).hurry, 60.0);
  double gap = w.vehicle(a).hurry - w.vehicle(b).hurry;
  for (int i = 0; i < 10; ++i) {
    s.post_step(w);
    const double next = std::abs(w.vehicle(a).hurry - w.vehicle(b).hurry);
    EXPECT_LE(next, gap);
    gap = next;
  }
  EXPECT_LT(gap, 0.1);  // halves every step
}

TEST(EbRun, HurryNonNegativeAndLeadersGrantedPromptly) {
  for (auto inc : {HurryFn::lin, HurryFn::log, HurryFn::gro}) {
    for (auto dec : {HurryFn::lin, HurryFn::log, HurryFn::gro}) {
      EbConfig cfg;
      cfg.inc_fn = inc;
      cfg.dec_fn = dec;
      World w(build_grid(5, 5, 100.0), EngineConfig{}, 21);
      spawn_vehicles(w, 60);
      EmergentStrategy s(cfg);
      for (int i = 0; i < 300; ++i) {
        step(w, s);
        for (const auto& v : w.vehicles) ASSERT_GE(v.hurry, 0.0);
      }
    }
  }
  // A lone vehicle never waits at an empty intersection.
  World w(build_grid(5, 5, 100.0), EngineConfig{}, 2);
  Rng rng(4);
  w.add_vehicle(sample_route(w.grid, EdgeId{3}, 12, rng), 0.0);
  EmergentStrategy s(EbConfig{});
  for (int i = 0; i < 200; ++i) step(w, s);
  ASSERT_FALSE(w.metrics.cwt_events().empty());
  for (double e : w.metrics.cwt_events()) EXPECT_EQ(e, 0.0);
}

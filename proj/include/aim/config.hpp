#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "aim/network.hpp"

namespace aim {

enum class Approach { eb, coop, comp, dauction };
enum class HurryFn { lin, log, gro };
enum class SpreadFn { standard, distance_log, range_log };
enum class CrossingPolicy { owp, avp };
enum class Bidding { balanced, random };
enum class RoutePolicy { same, random };
enum class AuctionVariant { coop, comp };

namespace detail {

template <class E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

inline constexpr NameTable<Approach, 4> approach_names{{
    {Approach::eb, "eb"}, {Approach::coop, "coop"}, {Approach::comp, "comp"}, {Approach::dauction, "dauction"}}};
inline constexpr NameTable<HurryFn, 3> hurry_names{{
    {HurryFn::lin, "lin"}, {HurryFn::log, "log"}, {HurryFn::gro, "gro"}}};
inline constexpr NameTable<SpreadFn, 3> spread_names{{
    {SpreadFn::standard, "std"}, {SpreadFn::distance_log, "dbl"}, {SpreadFn::range_log, "rbl"}}};
inline constexpr NameTable<CrossingPolicy, 2> cp_names{{
    {CrossingPolicy::owp, "owp"}, {CrossingPolicy::avp, "avp"}}};
inline constexpr NameTable<Bidding, 2> bidding_names{{
    {Bidding::balanced, "balanced"}, {Bidding::random, "random"}}};
inline constexpr NameTable<RoutePolicy, 2> route_names{{
    {RoutePolicy::same, "s"}, {RoutePolicy::random, "r"}}};

template <class E, std::size_t N>
constexpr std::string_view name_of(const NameTable<E, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <class E, std::size_t N>
E parse_name(const NameTable<E, N>& table, std::string_view text, std::string_view what) {
  for (const auto& [e, name] : table) {
    if (name == text) return e;
  }
  std::string allowed;
  for (const auto& [e, name] : table) {
    if (!allowed.empty()) allowed += ", ";
    allowed += name;
  }
  throw ConfigError("invalid " + std::string(what) + " '" + std::string(text) + "' (expected one of: " +
                    allowed + ")");
}

}  // namespace detail

inline std::string_view to_string(Approach v) { return detail::name_of(detail::approach_names, v); }
inline std::string_view to_string(HurryFn v) { return detail::name_of(detail::hurry_names, v); }
inline std::string_view to_string(SpreadFn v) { return detail::name_of(detail::spread_names, v); }
inline std::string_view to_string(CrossingPolicy v) { return detail::name_of(detail::cp_names, v); }
inline std::string_view to_string(Bidding v) { return detail::name_of(detail::bidding_names, v); }
inline std::string_view to_string(RoutePolicy v) { return detail::name_of(detail::route_names, v); }

inline Approach parse_approach(std::string_view s) { return detail::parse_name(detail::approach_names, s, "approach"); }
inline HurryFn parse_hurry_fn(std::string_view s) { return detail::parse_name(detail::hurry_names, s, "hurry function"); }
inline SpreadFn parse_spread_fn(std::string_view s) { return detail::parse_name(detail::spread_names, s, "spreading function"); }
inline CrossingPolicy parse_crossing_policy(std::string_view s) { return detail::parse_name(detail::cp_names, s, "crossing policy"); }
inline Bidding parse_bidding(std::string_view s) {
  // Short forms b and r are accepted as well.
  if (s == "b") return Bidding::balanced;
  if (s == "r") return Bidding::random;
  return detail::parse_name(detail::bidding_names, s, "bidding");
}
inline RoutePolicy parse_route_policy(std::string_view s) { return detail::parse_name(detail::route_names, s, "routes"); }

// Kinematics, geometry and timing shared by every approach.
struct EngineConfig {
  std::size_t grid_width = 5;
  std::size_t grid_height = 5;
  double edge_length = 100.0;        // m
  double v_max = 13.89;              // m/s (50 km/h)
  double vehicle_length = 5.0;       // m
  double min_gap = 2.5;              // m
  int t_cross = 0;                   // full steps spent in the intersection box
  double approach_radius = 25.0;     // m
  double wait_speed_threshold = 0.1; // m/s
  std::size_t route_length = 12;     // edges
  RoutePolicy routes = RoutePolicy::random;
  double initial_budget = 0.0;       // set from the active auction config

  double slot_length() const { return vehicle_length + min_gap; }
};

struct EbConfig {
  HurryFn inc_fn = HurryFn::log;
  HurryFn dec_fn = HurryFn::gro;
  double ic = 10.0;
  double dc = 10.0;
  SpreadFn spread_fn = SpreadFn::standard;
  double sr = 100.0;  // m
  double dm = 10.0;
  double platoon_eps = 0.5;
};

struct AuctionConfig {
  AuctionVariant variant = AuctionVariant::coop;
  CrossingPolicy cp = CrossingPolicy::avp;
  int mca = 2;
  bool enhancement = false;
  Bidding bidding = Bidding::random;
  int sponsorship_pct = 0;
  double initial_budget = 100.0;
  // Steps between calling for bids and announcing the winner. Bids are
  // collected from the leaders present when the round opens.
  int round_steps = 1;
};

struct DAuctionConfig {
  Bidding bidding = Bidding::random;
  double radius = 25.0;  // m
  double initial_budget = 100.0;
  bool skip_absent_head = false;
};

inline void validate(const EngineConfig& c) {
  if (c.grid_width < 2 || c.grid_height < 2) throw ConfigError("grid must be at least 2x2");
  if (!(c.edge_length > 0)) throw ConfigError("edge length must be positive");
  if (!(c.v_max > 0)) throw ConfigError("v_max must be positive");
  if (!(c.vehicle_length > 0)) throw ConfigError("vehicle length must be positive");
  if (!(c.min_gap > 0)) throw ConfigError("min gap must be positive");
  if (c.t_cross < 0) throw ConfigError("tcross must be non-negative");
  if (!(c.approach_radius > 0)) throw ConfigError("approach radius must be positive");
  if (c.wait_speed_threshold < 0) throw ConfigError("wait speed threshold must be non-negative");
  if (c.route_length < 1) throw ConfigError("route length must be at least 1");
  if (c.routes == RoutePolicy::same && (c.route_length < 4 || c.route_length % 2 != 0)) {
    throw ConfigError("routes=s needs an even route length >= 4 so the route closes on itself");
  }
  if (c.slot_length() > c.edge_length) throw ConfigError("edge too short to hold a vehicle");
}

inline void validate(const EbConfig& c) {
  if (!(c.ic > 0)) throw ConfigError("eb.ic must be positive");
  if (!(c.dc > 0)) throw ConfigError("eb.dc must be positive");
  if (!(c.sr > 0)) throw ConfigError("eb.sr must be positive");
  if (!(c.dm > 0)) throw ConfigError("eb.dm must be positive");
  if (c.platoon_eps < 0) throw ConfigError("eb.platoon_eps must be non-negative");
}

inline void validate(const AuctionConfig& c) {
  if (c.mca < 1) throw ConfigError("auction.mca must be at least 1");
  if (c.round_steps < 0) throw ConfigError("auction.round_steps must be non-negative");
  if (c.initial_budget < 0) throw ConfigError("auction.budget must be non-negative");
  const int p = c.sponsorship_pct;
  if (p != 0 && p != 25 && p != 50 && p != 75) {
    throw ConfigError("auction.sponsorship must be one of 0, 25, 50, 75 (got " + std::to_string(p) + ")");
  }
  if (c.variant == AuctionVariant::coop && p != 0) {
    throw ConfigError("sponsorship is only available in the competitive auction");
  }
}

inline void validate(const DAuctionConfig& c) {
  if (!(c.radius > 0)) throw ConfigError("dauction.radius must be positive");
  if (c.initial_budget < 0) throw ConfigError("dauction.budget must be non-negative");
}

}  // namespace aim

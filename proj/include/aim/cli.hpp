#pragma once

#include <charconv>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "aim/harness.hpp"

namespace aim {

// Thrown when --help is given; carries the usage text.
class HelpRequested : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v) {
  double x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc{} || p != end) throw ConfigError("invalid number for " + key + ": '" + v + "'");
  return x;
}

inline long long to_integer(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc{} || p != end) throw ConfigError("invalid integer for " + key + ": '" + v + "'");
  return x;
}

inline std::size_t to_count(const std::string& key, const std::string& v) {
  const auto x = to_integer(key, v);
  if (x < 0) throw ConfigError(key + " must be non-negative");
  return static_cast<std::size_t>(x);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "y" || v == "yes" || v == "true" || v == "1") return true;
  if (v == "n" || v == "no" || v == "false" || v == "0") return false;
  throw ConfigError("invalid value for " + key + ": '" + v + "' (expected y or n)");
}

inline std::string normalize_key(std::string_view k) {
  std::string s(k);
  while (s.rfind("-", 0) == 0) s.erase(0, 1);
  for (auto& c : s) {
    if (c == '.' || c == '_') c = '-';
  }
  return s;
}

}  // namespace detail

// One configurable key: canonical (config-file) name, extra flag spellings,
// and how to apply a textual value.
struct SettingKey {
  std::string name;
  std::vector<std::string> aliases;
  std::string help;
  bool is_flag = false;  // switch without a value on the command line
  std::function<void(ExperimentConfig&, const std::string&)> apply;
};

inline const std::vector<SettingKey>& setting_keys() {
  using detail::to_bool;
  using detail::to_count;
  using detail::to_double;
  using detail::to_integer;
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::vector<SettingKey> keys = {
      {"approach", {}, "eb | coop | comp | dauction", false, [](C& c, S v) { c.approach = parse_approach(v); }},
      {"vehicles", {"vs"}, "vehicles spawned", false, [](C& c, S v) { c.vehicles = to_count("vehicles", v); }},
      {"steps", {"stp"}, "simulation steps (1 s each)", false, [](C& c, S v) { c.steps = to_count("steps", v); }},
      {"runs", {}, "independent runs", false, [](C& c, S v) { c.runs = to_count("runs", v); }},
      {"seed", {}, "base seed; run i uses seed + i", false,
       [](C& c, S v) { c.base_seed = static_cast<std::uint64_t>(to_count("seed", v)); }},
      {"out", {}, "CSV output path (stdout if empty)", false, [](C& c, S v) { c.out_path = v; }},
      {"threads", {}, "worker threads for runs (0 = hardware)", false,
       [](C& c, S v) { c.threads = static_cast<unsigned>(to_count("threads", v)); }},
      {"check_invariants", {}, "verify safety invariants after every step", true,
       [](C& c, S v) { c.check_invariants = to_bool("check_invariants", v); }},
      {"grid", {}, "grid size WxH", false,
       [](C& c, S v) {
         const auto x = v.find_first_of("xX");
         if (x == std::string::npos) throw ConfigError("grid must look like WxH, got '" + v + "'");
         c.engine.grid_width = to_count("grid", v.substr(0, x));
         c.engine.grid_height = to_count("grid", v.substr(x + 1));
       }},
      {"edge_length", {}, "edge length in meters", false,
       [](C& c, S v) { c.engine.edge_length = to_double("edge_length", v); }},
      {"tcross", {}, "full steps a vehicle spends inside the intersection", false,
       [](C& c, S v) { c.engine.t_cross = static_cast<int>(to_integer("tcross", v)); }},
      {"approach_radius", {}, "approach zone radius in meters", false,
       [](C& c, S v) { c.engine.approach_radius = to_double("approach_radius", v); }},
      {"vmax", {}, "maximum speed, m/s", false, [](C& c, S v) { c.engine.v_max = to_double("vmax", v); }},
      {"vehicle_length", {}, "vehicle length, m", false,
       [](C& c, S v) { c.engine.vehicle_length = to_double("vehicle_length", v); }},
      {"min_gap", {}, "minimum gap between vehicles, m", false,
       [](C& c, S v) { c.engine.min_gap = to_double("min_gap", v); }},
      {"wait_threshold", {}, "speed below which a vehicle counts as waiting, m/s", false,
       [](C& c, S v) { c.engine.wait_speed_threshold = to_double("wait_threshold", v); }},
      {"route_length", {}, "edges per route", false,
       [](C& c, S v) { c.engine.route_length = to_count("route_length", v); }},
      {"routes", {}, "s (same route, cyclic) | r (random regeneration)", false,
       [](C& c, S v) { c.engine.routes = parse_route_policy(v); }},

      {"eb.if", {"if"}, "increasing function: lin | log | gro", false,
       [](C& c, S v) { c.eb.inc_fn = parse_hurry_fn(v); }},
      {"eb.df", {"df"}, "decreasing function: lin | log | gro", false,
       [](C& c, S v) { c.eb.dec_fn = parse_hurry_fn(v); }},
      {"eb.spread", {"spread"}, "spreading function: std | dbl | rbl", false,
       [](C& c, S v) { c.eb.spread_fn = parse_spread_fn(v); }},
      {"eb.ic", {"ic"}, "increasing coefficient", false, [](C& c, S v) { c.eb.ic = to_double("eb.ic", v); }},
      {"eb.dc", {"dc"}, "decreasing coefficient", false, [](C& c, S v) { c.eb.dc = to_double("eb.dc", v); }},
      {"eb.sr", {"sr"}, "spreading range, m", false, [](C& c, S v) { c.eb.sr = to_double("eb.sr", v); }},
      {"eb.dm", {"dm"}, "distance magnitude", false, [](C& c, S v) { c.eb.dm = to_double("eb.dm", v); }},
      {"eb.platoon_eps", {"platoon-eps"}, "hurry tolerance for platoon grouping", false,
       [](C& c, S v) { c.eb.platoon_eps = to_double("eb.platoon_eps", v); }},

      {"auction.cp", {"cp"}, "crossing policy: owp | avp", false,
       [](C& c, S v) { c.auction.cp = parse_crossing_policy(v); }},
      {"auction.mca", {"mca"}, "minimum vehicles near the intersection to hold an auction", false,
       [](C& c, S v) { c.auction.mca = static_cast<int>(to_integer("auction.mca", v)); }},
      {"auction.round_steps", {"round-steps"}, "steps between calling for bids and granting the winner", false,
       [](C& c, S v) { c.auction.round_steps = static_cast<int>(to_integer("auction.round_steps", v)); }},
      {"auction.enhancement", {"enhancement", "e"}, "boost bids from crowded lanes: y | n", false,
       [](C& c, S v) { c.auction.enhancement = to_bool("auction.enhancement", v); }},
      {"auction.bidding", {}, "central auction bidding: balanced | random", false,
       [](C& c, S v) { c.auction.bidding = parse_bidding(v); }},
      {"auction.sponsorship", {"sponsorship", "spn"}, "sponsorship percentage: 0 | 25 | 50 | 75 (comp only)",
       false, [](C& c, S v) { c.sponsorship = static_cast<int>(to_integer("auction.sponsorship", v)); }},
      {"auction.budget", {}, "initial trip budget (central auctions)", false,
       [](C& c, S v) { c.auction.initial_budget = to_double("auction.budget", v); }},
      {"bidding", {"bdn"}, "bidding for both auction families: balanced | random", false,
       [](C& c, S v) { c.auction.bidding = c.dauction.bidding = parse_bidding(v); }},
      {"budget", {}, "initial trip budget for both auction families", false,
       [](C& c, S v) { c.auction.initial_budget = c.dauction.initial_budget = to_double("budget", v); }},

      {"dauction.bidding", {}, "decentralised auction bidding: balanced | random", false,
       [](C& c, S v) { c.dauction.bidding = parse_bidding(v); }},
      {"dauction.radius", {}, "broadcast radius, m", false,
       [](C& c, S v) { c.dauction.radius = to_double("dauction.radius", v); }},
      {"dauction.budget", {}, "initial trip budget (decentralised auction)", false,
       [](C& c, S v) { c.dauction.initial_budget = to_double("dauction.budget", v); }},
      {"dauction.skip_absent_head", {"skip-absent-head"},
       "serve the best-ranked vehicle already at its stop line instead of waiting for the head", true,
       [](C& c, S v) { c.dauction.skip_absent_head = to_bool("dauction.skip_absent_head", v); }},
  };
  return keys;
}

inline const SettingKey* find_setting(std::string_view key) {
  const auto k = detail::normalize_key(key);
  for (const auto& s : setting_keys()) {
    if (detail::normalize_key(s.name) == k) return &s;
    for (const auto& a : s.aliases) {
      if (detail::normalize_key(a) == k) return &s;
    }
  }
  return nullptr;
}

inline void apply_setting(ExperimentConfig& cfg, std::string_view key, const std::string& value) {
  const auto* s = find_setting(key);
  if (!s) throw ConfigError("unknown key '" + std::string(key) + "'");
  s->apply(cfg, value);
}

// `key = value` lines; '#' starts a comment. Keys use either the dotted
// names (eb.if) or the flag spellings (if, edge-length).
inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(cfg, detail::trim(body.substr(0, eq)), detail::trim(body.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

// Command line -> validated config. Values from --config are applied first,
// then flags given on the command line override them.
inline ExperimentConfig parse_cli(int argc, const char* const* argv) {
  CLI::App app{"Intersection coordination simulator: runs seeded batches and writes CSV"};
  const auto& keys = setting_keys();
  std::vector<std::string> values(keys.size());
  std::vector<bool> switches(keys.size(), false);
  std::vector<CLI::Option*> opts(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    std::string names;
    auto add_name = [&](const std::string& n) {
      const auto flag = "--" + detail::normalize_key(n);
      if (names.find(flag + ",") != std::string::npos || names == flag) return;
      if (!names.empty()) names += ",";
      names += flag;
    };
    add_name(keys[i].name);
    for (const auto& a : keys[i].aliases) {
      if (a.size() > 1) add_name(a);
    }
    if (keys[i].is_flag) {
      opts[i] = app.add_flag(names, keys[i].help);
    } else {
      opts[i] = app.add_option(names, values[i], keys[i].help);
    }
  }
  std::string config_path;
  app.add_option("--config", config_path, "key = value file; command-line flags override it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string(e.what()) + "\n\n" + app.help());
  }

  ExperimentConfig cfg;
  if (!config_path.empty()) load_config_file(cfg, config_path);
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (opts[i]->count() == 0) continue;
    keys[i].apply(cfg, keys[i].is_flag ? std::string("y") : values[i]);
  }
  return resolved(cfg);
}

inline ExperimentConfig parse_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"aimsim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace aim

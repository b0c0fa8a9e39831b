#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "aim/engine.hpp"
#include "aim/metrics.hpp"
#include "aim/strategy_auction.hpp"
#include "aim/strategy_dauction.hpp"
#include "aim/strategy_eb.hpp"

namespace aim {

struct ExperimentConfig {
  Approach approach = Approach::coop;
  EngineConfig engine;
  EbConfig eb;
  AuctionConfig auction;
  DAuctionConfig dauction;
  // Unset means "25 for comp, 0 otherwise".
  std::optional<int> sponsorship;

  std::size_t vehicles = 100;
  std::size_t steps = 10000;
  std::size_t runs = 10;
  std::uint64_t base_seed = 1;
  std::string out_path;
  unsigned threads = 0;            // 0: one per hardware thread
  bool check_invariants = false;   // run the safety checker after every step
};

// Fills derived fields and checks every key against its domain.
inline ExperimentConfig resolved(ExperimentConfig cfg) {
  cfg.auction.variant = cfg.approach == Approach::comp ? AuctionVariant::comp : AuctionVariant::coop;
  if (cfg.sponsorship) {
    cfg.auction.sponsorship_pct = *cfg.sponsorship;
  } else {
    cfg.auction.sponsorship_pct = cfg.approach == Approach::comp ? 25 : 0;
  }
  switch (cfg.approach) {
    case Approach::coop:
    case Approach::comp: cfg.engine.initial_budget = cfg.auction.initial_budget; break;
    case Approach::dauction: cfg.engine.initial_budget = cfg.dauction.initial_budget; break;
    case Approach::eb: cfg.engine.initial_budget = 0.0; break;
  }
  validate(cfg.engine);
  validate(cfg.eb);
  validate(cfg.dauction);
  if (cfg.sponsorship && cfg.approach == Approach::coop && *cfg.sponsorship != 0) {
    throw ConfigError("sponsorship is only available in the competitive auction (got --sponsorship " +
                      std::to_string(*cfg.sponsorship) + " with coop)");
  }
  validate(cfg.auction);
  if (cfg.vehicles < 1) throw ConfigError("vehicles must be at least 1");
  if (cfg.steps < 1) throw ConfigError("steps must be at least 1");
  if (cfg.runs < 1) throw ConfigError("runs must be at least 1");
  return cfg;
}

using AnyStrategy = std::variant<EmergentStrategy, CentralAuctionStrategy, DecentralAuctionStrategy>;

inline AnyStrategy make_strategy(const ExperimentConfig& cfg) {
  switch (cfg.approach) {
    case Approach::eb: return EmergentStrategy(cfg.eb);
    case Approach::coop:
    case Approach::comp: return CentralAuctionStrategy(cfg.auction);
    case Approach::dauction: return DecentralAuctionStrategy(cfg.dauction);
  }
  throw ConfigError("unknown approach");
}

inline World make_world(const ExperimentConfig& cfg, std::uint64_t seed) {
  World w(build_grid(cfg.engine.grid_width, cfg.engine.grid_height, cfg.engine.edge_length), cfg.engine, seed);
  spawn_vehicles(w, cfg.vehicles);
  return w;
}

struct RunResult {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  RunSummary summary;
  std::uint64_t digest = 0;
  std::size_t violations = 0;
  std::vector<std::string> first_violations;  // at most a handful, for reporting
  std::size_t vehicles_without_progress = 0;  // never finished an edge
};

// One seeded simulation: build grid, spawn, step, summarise.
inline RunResult run_single(const ExperimentConfig& cfg, std::size_t run_index) {
  RunResult r;
  r.run = run_index;
  r.seed = cfg.base_seed + run_index;
  World world = make_world(cfg, r.seed);
  AnyStrategy strategy = make_strategy(cfg);
  std::uint64_t digest = 0;
  for (std::size_t s = 0; s < cfg.steps; ++s) {
    std::visit([&](auto& strat) { step(world, strat); }, strategy);
    if (cfg.check_invariants) {
      auto errs = check_invariants(world);
      r.violations += errs.size();
      for (auto& e : errs) {
        if (r.first_violations.size() < 5) r.first_violations.push_back(std::move(e));
      }
    }
    digest = digest * 1099511628211ULL ^ world_digest(world);
  }
  r.digest = digest;
  r.summary = run_summary(world.metrics);
  for (const auto& v : world.vehicles) {
    if (v.edges_completed == 0) ++r.vehicles_without_progress;
  }
  return r;
}

struct ExperimentResult {
  std::vector<RunResult> runs;  // ordered by run index
  BatchStats stats;
};

// Runs seeds base_seed .. base_seed + runs - 1, possibly in parallel. Each run
// owns its world and random stream, so the output does not depend on
// scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& raw) {
  const ExperimentConfig cfg = resolved(raw);
  ExperimentResult out;
  out.runs.resize(cfg.runs);
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.runs));
  if (threads <= 1) {
    for (std::size_t i = 0; i < cfg.runs; ++i) out.runs[i] = run_single(cfg, i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = next++; i < cfg.runs; i = next++) out.runs[i] = run_single(cfg, i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  std::vector<RunSummary> summaries;
  for (const auto& r : out.runs) summaries.push_back(r.summary);
  out.stats = batch_stats(summaries);
  return out;
}

inline constexpr const char* kCsvHeader =
    "approach,run,seed,vs,steps,cp,mca,enhancement,bidding,sponsorship,routes,if,df,spread,ic,dc,sr,dm,"
    "cwt_mean,cwt_events,twt_mean,twt_episodes,cwt_sd,twt_sd";

namespace detail {

inline std::string fixed(double x) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << x;
  return os.str();
}

inline std::string plain(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

// The parameter columns shared by every row of one experiment.
inline std::string parameter_columns(const ExperimentConfig& cfg) {
  const bool central = cfg.approach == Approach::coop || cfg.approach == Approach::comp;
  const bool eb = cfg.approach == Approach::eb;
  std::ostringstream os;
  if (central) {
    os << to_string(cfg.auction.cp) << ',' << cfg.auction.mca << ',' << (cfg.auction.enhancement ? "y" : "n") << ','
       << to_string(cfg.auction.bidding) << ',' << cfg.auction.sponsorship_pct << ',';
  } else if (cfg.approach == Approach::dauction) {
    os << ",,," << to_string(cfg.dauction.bidding) << ",,";
  } else {
    os << ",,,,,";
  }
  os << to_string(cfg.engine.routes) << ',';
  if (eb) {
    os << to_string(cfg.eb.inc_fn) << ',' << to_string(cfg.eb.dec_fn) << ',' << to_string(cfg.eb.spread_fn) << ','
       << plain(cfg.eb.ic) << ',' << plain(cfg.eb.dc) << ',' << plain(cfg.eb.sr) << ',' << plain(cfg.eb.dm);
  } else {
    os << ",,,,,,";
  }
  return os.str();
}

}  // namespace detail

// One row per run (event-level sd in the sd columns) and a final `agg` row
// whose sd columns hold the across-run standard deviation.
inline void write_csv(std::ostream& os, const ExperimentConfig& raw, const ExperimentResult& result) {
  const ExperimentConfig cfg = resolved(raw);
  const auto params = detail::parameter_columns(cfg);
  os << kCsvHeader << '\n';
  std::size_t cwt_events = 0, twt_episodes = 0;
  for (const auto& r : result.runs) {
    const auto& s = r.summary;
    cwt_events += s.cwt_events;
    twt_episodes += s.twt_episodes;
    os << to_string(cfg.approach) << ',' << r.run << ',' << r.seed << ',' << cfg.vehicles << ',' << cfg.steps << ','
       << params << ',' << detail::fixed(s.cwt_mean) << ',' << s.cwt_events << ',' << detail::fixed(s.twt_mean) << ','
       << s.twt_episodes << ',' << detail::fixed(s.cwt_event_sd) << ',' << detail::fixed(s.twt_episode_sd) << '\n';
  }
  const auto& b = result.stats;
  os << to_string(cfg.approach) << ",agg," << cfg.base_seed << ',' << cfg.vehicles << ',' << cfg.steps << ','
     << params << ',' << detail::fixed(b.cwt.mean) << ',' << cwt_events << ',' << detail::fixed(b.twt.mean) << ','
     << twt_episodes << ',' << detail::fixed(b.cwt.sd) << ',' << detail::fixed(b.twt.sd) << '\n';
}

inline std::string csv_string(const ExperimentConfig& cfg, const ExperimentResult& result) {
  std::ostringstream os;
  write_csv(os, cfg, result);
  return os.str();
}

}  // namespace aim

#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "aim/engine.hpp"

namespace aim {

// Balanced spreads the budget over the intersections still ahead on the
// route; Random draws uniformly from [0, budget].
inline double compute_bid(const Vehicle& v, Bidding bidding, Rng& rng) {
  const double budget = std::max(0.0, v.budget);
  if (bidding == Bidding::balanced) {
    const auto remaining = std::max<std::size_t>(1, v.remaining_intersections());
    return budget / static_cast<double>(remaining);
  }
  return std::min(budget, rng.uniform(0.0, budget));
}

// Enhancement scales by (1 + ln(queue length)), so a lone vehicle is unboosted.
inline double effective_bid(double base_bid, std::size_t lane_queue_len, bool enhancement, double sponsor_contribs) {
  const double raw = base_bid + sponsor_contribs;
  if (!enhancement) return raw;
  return raw * (1.0 + std::log(static_cast<double>(std::max<std::size_t>(1, lane_queue_len))));
}

struct Sponsorship {
  VehicleId sponsor{};
  double amount = 0.0;
};

// Each follower queued behind the leader gives pct% of its own bid.
inline std::vector<Sponsorship> sponsorship_contributions(const World& w, std::span<const VehicleId> followers,
                                                          int pct, Bidding bidding, Rng& rng) {
  std::vector<Sponsorship> out;
  out.reserve(followers.size());
  for (auto id : followers) {
    const double bid = compute_bid(w.vehicle(id), bidding, rng);
    out.push_back({id, bid * static_cast<double>(pct) / 100.0});
  }
  return out;
}

inline double total_contribution(std::span<const Sponsorship> s) {
  double sum = 0.0;
  for (const auto& x : s) sum += x.amount;
  return sum;
}

struct Bidder {
  VehicleId id{};
  double base_bid = 0.0;
  double effective_bid = 0.0;
  std::vector<Sponsorship> sponsors;
};

struct AuctionOutcome {
  std::vector<VehicleId> ordering;  // effective bid descending, ties by lowest id
  VehicleId winner{};
  std::map<VehicleId, double> charges;
};

// Ranks the lane leaders and works out who pays. AVP charges every bidder its
// base bid and every sponsor its contribution; OWP charges only the winner
// and the winner's sponsors.
inline AuctionOutcome run_auction(std::span<const Bidder> bidders, CrossingPolicy cp) {
  AuctionOutcome out;
  if (bidders.empty()) return out;
  std::vector<const Bidder*> ranked;
  ranked.reserve(bidders.size());
  for (const auto& b : bidders) ranked.push_back(&b);
  std::sort(ranked.begin(), ranked.end(), [](const Bidder* a, const Bidder* b) {
    if (a->effective_bid != b->effective_bid) return a->effective_bid > b->effective_bid;
    return a->id < b->id;
  });
  for (const auto* b : ranked) out.ordering.push_back(b->id);
  out.winner = out.ordering.front();

  auto charge = [&](const Bidder& b) {
    if (b.base_bid > 0) out.charges[b.id] += b.base_bid;
    for (const auto& s : b.sponsors) {
      if (s.amount > 0) out.charges[s.sponsor] += s.amount;
    }
  };
  if (cp == CrossingPolicy::avp) {
    for (const auto& b : bidders) charge(b);
  } else {
    charge(*ranked.front());
  }
  return out;
}

inline double apply_charges(World& w, const AuctionOutcome& outcome) {
  double removed = 0.0;
  for (const auto& [id, amount] : outcome.charges) {
    auto& v = w.vehicle(id);
    const double paid = std::min(v.budget, amount);
    v.budget -= paid;
    removed += paid;
  }
  return removed;
}

// Centralised per-intersection auctions. Cooperative keeps the full ranking
// as a crossing schedule; Competitive lets only the winner through and runs
// a fresh auction once the intersection is free again. An auction round
// lasts round_steps steps: bids are taken and charged when it opens, the
// winner is granted when it closes, and the intersection stays reserved in
// between.
class CentralAuctionStrategy {
public:
  explicit CentralAuctionStrategy(AuctionConfig cfg) : cfg_(cfg) { validate(cfg_); }

  const AuctionConfig& config() const { return cfg_; }
  std::size_t auctions_held() const { return auctions_; }
  double money_collected() const { return collected_; }
  const std::deque<VehicleId>& schedule(NodeId n) const { return schedules_.at(index(n)); }
  const std::vector<AuctionOutcome>& last_outcomes() const { return last_outcomes_; }

  StrategyDecision decide(World& w) {
    schedules_.resize(w.intersections.size());
    rounds_.resize(w.intersections.size());
    last_outcomes_.clear();
    StrategyDecision d;
    for (const auto& ix : w.intersections) {
      if (ix.occupied()) continue;
      auto& sched = schedules_[index(ix.node)];
      auto& round = rounds_[index(ix.node)];
      if (round) {
        if (--round->steps_left > 0) continue;
        close_round(ix.node, round->outcome, d);
        round.reset();
        continue;
      }
      while (!sched.empty() && !w.is_lane_leader(w.vehicle(sched.front()))) sched.pop_front();
      if (!sched.empty()) {
        d.grants.push_back({ix.node, {sched.front()}});
        sched.pop_front();
        continue;
      }
      const auto leaders = lane_leaders(w, ix.node);
      if (leaders.empty()) continue;
      if (vehicles_near(w, ix.node, w.cfg.approach_radius) < static_cast<std::size_t>(cfg_.mca)) {
        d.grants.push_back({ix.node, {closest_to_line(w, leaders)}});
        continue;
      }
      auto outcome = auction_at(w, leaders);
      collected_ += apply_charges(w, outcome);
      ++auctions_;
      last_outcomes_.push_back(outcome);
      if (cfg_.round_steps == 0) {
        close_round(ix.node, outcome, d);
      } else {
        round = OpenRound{std::move(outcome), cfg_.round_steps};
      }
    }
    return d;
  }

  bool round_open(NodeId n) const { return index(n) < rounds_.size() && rounds_[index(n)].has_value(); }

  void post_step(World&) {}

private:
  struct OpenRound {
    AuctionOutcome outcome;
    int steps_left = 0;
  };

  // Participants stay lane leaders while the round is open: nothing else can
  // grant them and no vehicle overtakes.
  void close_round(NodeId node, const AuctionOutcome& outcome, StrategyDecision& d) {
    d.grants.push_back({node, {outcome.winner}});
    if (cfg_.variant == AuctionVariant::coop) {
      schedules_[index(node)].assign(outcome.ordering.begin() + 1, outcome.ordering.end());
    }
  }

  AuctionOutcome auction_at(World& w, const std::vector<VehicleId>& leaders) {
    std::vector<Bidder> bidders;
    bidders.reserve(leaders.size());
    for (auto id : leaders) {
      const auto& v = w.vehicle(id);
      const auto queue = zone_queue(w, v.edge());
      Bidder b;
      b.id = id;
      b.base_bid = compute_bid(v, cfg_.bidding, w.rng);
      if (cfg_.variant == AuctionVariant::comp && cfg_.sponsorship_pct > 0 && queue.size() > 1) {
        b.sponsors = sponsorship_contributions(w, std::span(queue).subspan(1), cfg_.sponsorship_pct,
                                               cfg_.bidding, w.rng);
      }
      b.effective_bid = effective_bid(b.base_bid, queue.size(), cfg_.enhancement, total_contribution(b.sponsors));
      bidders.push_back(std::move(b));
    }
    return run_auction(bidders, cfg_.cp);
  }

  static VehicleId closest_to_line(const World& w, const std::vector<VehicleId>& leaders) {
    VehicleId best = leaders.front();
    for (auto id : leaders) {
      const double d = w.distance_to_stop_line(w.vehicle(id));
      const double bd = w.distance_to_stop_line(w.vehicle(best));
      if (d < bd || (d == bd && id < best)) best = id;
    }
    return best;
  }

  AuctionConfig cfg_;
  std::vector<std::deque<VehicleId>> schedules_;
  std::vector<std::optional<OpenRound>> rounds_;
  std::vector<AuctionOutcome> last_outcomes_;
  std::size_t auctions_ = 0;
  double collected_ = 0.0;
};

static_assert(CoordinationStrategy<CentralAuctionStrategy>);

}  // namespace aim

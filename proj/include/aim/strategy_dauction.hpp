#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aim/strategy_auction.hpp"

namespace aim {

struct ContentionEntry {
  VehicleId id{};
  double bid = 0.0;

  friend bool operator==(const ContentionEntry&, const ContentionEntry&) = default;
};

// Bids announced around one intersection, highest first, ties by lowest id.
// Insertions never reorder entries already present.
class ContentionList {
public:
  void join(VehicleId id, double bid) {
    if (contains(id)) throw std::logic_error("vehicle " + std::to_string(index(id)) + " joined twice");
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ContentionEntry& e) {
      return bid > e.bid || (bid == e.bid && id < e.id);
    });
    entries_.insert(it, {id, bid});
  }

  bool remove(VehicleId id) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ContentionEntry& e) { return e.id == id; });
    if (it == entries_.end()) return false;
    entries_.erase(it);
    return true;
  }

  bool contains(VehicleId id) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const ContentionEntry& e) { return e.id == id; });
  }

  std::optional<double> bid_of(VehicleId id) const {
    for (const auto& e : entries_) {
      if (e.id == id) return e.bid;
    }
    return std::nullopt;
  }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const ContentionEntry& head() const { return entries_.front(); }
  const std::vector<ContentionEntry>& entries() const { return entries_; }

private:
  std::vector<ContentionEntry> entries_;
};

inline ContentionList broadcast_join(ContentionList list, VehicleId id, double bid) {
  list.join(id, bid);
  return list;
}

// Auctioneer-free auction. A vehicle announces one bid when it comes within
// the broadcast radius; the intersection then serves the list strictly in
// bid order, and a bid is paid when its vehicle is let through.
//
// If the head is stuck behind a lower-ranked vehicle of its own lane, that
// lane's front vehicle goes first: it is the only way the head can advance.
class DecentralAuctionStrategy {
public:
  explicit DecentralAuctionStrategy(DAuctionConfig cfg) : cfg_(cfg) { validate(cfg_); }

  const DAuctionConfig& config() const { return cfg_; }
  const ContentionList& list(NodeId n) const { return lists_.at(index(n)); }
  double money_collected() const { return collected_; }

  StrategyDecision decide(World& w) {
    lists_.resize(w.intersections.size());
    refresh_lists(w);
    StrategyDecision d;
    for (const auto& ix : w.intersections) {
      if (ix.occupied()) continue;
      auto& list = lists_[index(ix.node)];
      if (list.empty()) continue;
      const auto pick = cfg_.skip_absent_head ? first_ready(w, list) : ready_head(w, list);
      if (!pick) continue;
      auto& v = w.vehicle(*pick);
      const double bid = list.bid_of(*pick).value_or(0.0);
      const double paid = std::min(v.budget, bid);
      v.budget -= paid;
      collected_ += paid;
      list.remove(*pick);
      d.grants.push_back({ix.node, {*pick}});
    }
    return d;
  }

  void post_step(World&) {}

private:
  // Drops vehicles that left the broadcast radius and lets newcomers join,
  // lowest vehicle id first.
  void refresh_lists(World& w) {
    for (const auto& ix : w.intersections) {
      auto& list = lists_[index(ix.node)];
      std::vector<VehicleId> gone;
      for (const auto& e : list.entries()) {
        const auto& v = w.vehicle(e.id);
        if (v.granted() || w.grid.edge(v.edge()).to != ix.node || !w.in_zone(v, cfg_.radius)) gone.push_back(e.id);
      }
      for (auto id : gone) list.remove(id);

      std::vector<VehicleId> arrivals;
      for (auto e : w.grid.incoming(ix.node)) {
        for (auto id : zone_queue(w, e, cfg_.radius)) {
          if (!w.vehicle(id).granted() && !list.contains(id)) arrivals.push_back(id);
        }
      }
      std::sort(arrivals.begin(), arrivals.end());
      for (auto id : arrivals) list.join(id, compute_bid(w.vehicle(id), cfg_.bidding, w.rng));
    }
  }

  static std::optional<VehicleId> ready_head(const World& w, const ContentionList& list) {
    const auto& head = w.vehicle(list.head().id);
    const auto front = w.lanes[index(head.edge())].front();
    const auto& cand = w.vehicle(front);
    if (!w.at_stop_line(cand) || !list.contains(front)) return std::nullopt;
    return front;
  }

  static std::optional<VehicleId> first_ready(const World& w, const ContentionList& list) {
    for (const auto& e : list.entries()) {
      const auto& v = w.vehicle(e.id);
      if (w.is_lane_front(v) && w.at_stop_line(v)) return e.id;
    }
    return std::nullopt;
  }

  DAuctionConfig cfg_;
  std::vector<ContentionList> lists_;
  double collected_ = 0.0;
};

static_assert(CoordinationStrategy<DecentralAuctionStrategy>);

}  // namespace aim

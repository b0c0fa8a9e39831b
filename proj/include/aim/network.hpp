#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aim/random.hpp"

namespace aim {

enum class NodeId : std::uint32_t {};
enum class EdgeId : std::uint32_t {};

constexpr std::size_t index(NodeId n) { return static_cast<std::size_t>(n); }
constexpr std::size_t index(EdgeId e) { return static_cast<std::size_t>(e); }

struct Edge {
  NodeId from;
  NodeId to;
  double length_m;
};

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Manhattan lattice of W x H intersections joined by bidirectional roads.
// Node (x, y) has id y * W + x. Edge ids are assigned in (from, to) order so
// every adjacency list is already sorted by EdgeId.
class Grid {
public:
  Grid(std::size_t width, std::size_t height, double edge_length)
      : width_(width), height_(height), edge_length_(edge_length) {
    if (width < 2 || height < 2) {
      throw ConfigError("grid must be at least 2x2 (got " + std::to_string(width) + "x" +
                        std::to_string(height) + ")");
    }
    if (!(edge_length > 0.0)) throw ConfigError("edge length must be positive");

    const std::size_t n = width * height;
    outgoing_.resize(n);
    incoming_.resize(n);
    for (std::size_t from = 0; from < n; ++from) {
      const auto fx = from % width, fy = from / width;
      // Neighbours in increasing node-id order: down, left, right, up.
      std::vector<std::size_t> nbrs;
      if (fy > 0) nbrs.push_back(from - width);
      if (fx > 0) nbrs.push_back(from - 1);
      if (fx + 1 < width) nbrs.push_back(from + 1);
      if (fy + 1 < height) nbrs.push_back(from + width);
      for (auto to : nbrs) {
        const EdgeId id{static_cast<std::uint32_t>(edges_.size())};
        edges_.push_back({NodeId(static_cast<std::uint32_t>(from)),
                          NodeId(static_cast<std::uint32_t>(to)), edge_length});
        outgoing_[from].push_back(id);
        incoming_[to].push_back(id);
      }
    }
    for (auto& in : incoming_) std::sort(in.begin(), in.end());
    reverse_.resize(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto& fwd = edges_[e];
      for (auto cand : outgoing_[index(fwd.to)]) {
        if (edges_[index(cand)].to == fwd.from) reverse_[e] = cand;
      }
    }
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  double edge_length() const { return edge_length_; }
  std::size_t node_count() const { return outgoing_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const Edge& edge(EdgeId e) const { return edges_.at(index(e)); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<EdgeId>& outgoing(NodeId n) const { return outgoing_.at(index(n)); }
  const std::vector<EdgeId>& incoming(NodeId n) const { return incoming_.at(index(n)); }
  EdgeId reverse(EdgeId e) const { return reverse_.at(index(e)); }

  NodeId node_at(std::size_t x, std::size_t y) const {
    return NodeId(static_cast<std::uint32_t>(y * width_ + x));
  }
  std::size_t x_of(NodeId n) const { return index(n) % width_; }
  std::size_t y_of(NodeId n) const { return index(n) / width_; }

  std::size_t manhattan(NodeId a, NodeId b) const {
    const auto dx = static_cast<long>(x_of(a)) - static_cast<long>(x_of(b));
    const auto dy = static_cast<long>(y_of(a)) - static_cast<long>(y_of(b));
    return static_cast<std::size_t>(std::labs(dx) + std::labs(dy));
  }

  double total_length() const { return edge_length_ * static_cast<double>(edges_.size()); }

  // Debug dump, one line per edge: `from to length`.
  void dump(std::ostream& os) const {
    for (const auto& e : edges_) os << index(e.from) << ' ' << index(e.to) << ' ' << e.length_m << '\n';
  }

private:
  std::size_t width_;
  std::size_t height_;
  double edge_length_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> outgoing_;
  std::vector<std::vector<EdgeId>> incoming_;
  std::vector<EdgeId> reverse_;
};

inline Grid build_grid(std::size_t width, std::size_t height, double edge_length) {
  return Grid(width, height, edge_length);
}

using Route = std::vector<EdgeId>;

// Outgoing edges at the end of `incoming`, U-turn removed unless it is the
// only continuation. Sorted by EdgeId.
inline std::vector<EdgeId> feasible_successors(const Grid& grid, EdgeId incoming) {
  const auto& out = grid.outgoing(grid.edge(incoming).to);
  const EdgeId back = grid.reverse(incoming);
  std::vector<EdgeId> result;
  result.reserve(out.size());
  for (auto e : out) {
    if (e != back) result.push_back(e);
  }
  if (result.empty()) result.push_back(back);
  return result;
}

// `count` edges continuing from `last`, each drawn uniformly from the
// feasible successors of the previous one. Exactly `count` draws.
inline Route continue_route(const Grid& grid, EdgeId last, std::size_t count, Rng& rng) {
  Route route;
  route.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto succ = feasible_successors(grid, last);
    last = succ[rng.uniform_index(succ.size())];
    route.push_back(last);
  }
  return route;
}

inline Route sample_route(const Grid& grid, EdgeId start_edge, std::size_t length, Rng& rng) {
  if (length == 0) throw ConfigError("route length must be at least 1");
  Route route{start_edge};
  auto tail = continue_route(grid, start_edge, length - 1, rng);
  route.insert(route.end(), tail.begin(), tail.end());
  return route;
}

namespace detail {

inline bool extend_closed(const Grid& grid, Route& route, std::size_t length, Rng& rng) {
  const NodeId home = grid.edge(route.front()).from;
  if (route.size() == length) {
    // The tour repeats, so the first edge must be a legal continuation of the last.
    const auto succ = feasible_successors(grid, route.back());
    return std::find(succ.begin(), succ.end(), route.front()) != succ.end();
  }
  auto succ = feasible_successors(grid, route.back());
  // Random rotation of the candidate order keeps the walk uniform-ish while
  // the backtracking guarantees termination.
  const auto shift = rng.uniform_index(succ.size());
  std::rotate(succ.begin(), succ.begin() + static_cast<long>(shift), succ.end());
  const std::size_t left_after = length - route.size() - 1;
  for (auto e : succ) {
    const auto d = grid.manhattan(grid.edge(e).to, home);
    if (d > left_after || (left_after - d) % 2 != 0) continue;
    route.push_back(e);
    if (extend_closed(grid, route, length, rng)) return true;
    route.pop_back();
  }
  return false;
}

}  // namespace detail

// A route that ends where it started and can be driven cyclically (Rts = S).
// Requires an even length of at least 4 on a lattice.
inline Route sample_closed_route(const Grid& grid, EdgeId start_edge, std::size_t length, Rng& rng) {
  if (length < 4 || length % 2 != 0) {
    throw ConfigError("cyclic routes need an even length >= 4");
  }
  Route route{start_edge};
  if (!detail::extend_closed(grid, route, length, rng)) {
    throw ConfigError("no closed route of the requested length from this edge");
  }
  return route;
}

}  // namespace aim

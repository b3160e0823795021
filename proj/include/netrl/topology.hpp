#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Directed network graph plus the routing state derived from a link-weight
// assignment: per-destination shortest-path costs and next-hop forwarding
// distributions. Node ids are dense 0..N-1; links are kept in canonical
// (src, dst) order and their index defines the action-vector layout.

namespace netrl {

// Lower clamp for link weights; shortest-path costs must stay positive.
constexpr double kMinLinkWeight = 1e-3;

constexpr double kInfCost = std::numeric_limits<double>::infinity();

struct LinkSpec {
  int src = 0;
  int dst = 0;
  double bandwidth_bps = 5e6;
  double prop_delay_s = 0.0;
  int queue_capacity = 100;
};

struct DirectedLink {
  int id;
  int src;
  int dst;
  double bandwidth_bps;
  double prop_delay_s;
  int queue_capacity;
};

class Topology {
 public:
  static Topology build(int node_count, std::vector<LinkSpec> specs) {
    if (node_count < 1) throw std::invalid_argument("topology: node_count < 1");
    Topology t;
    t.n_ = node_count;
    std::sort(specs.begin(), specs.end(), [](const LinkSpec& a, const LinkSpec& b) {
      return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    t.links_.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const LinkSpec& s = specs[i];
      const std::string name = "link " + std::to_string(i) + " (" +
                               std::to_string(s.src) + "->" + std::to_string(s.dst) + ")";
      if (s.src < 0 || s.src >= node_count || s.dst < 0 || s.dst >= node_count)
        throw std::invalid_argument(name + ": node id out of range");
      if (s.src == s.dst) throw std::invalid_argument(name + ": self loop");
      if (i > 0 && specs[i - 1].src == s.src && specs[i - 1].dst == s.dst)
        throw std::invalid_argument(name + ": duplicate directed link");
      if (!(s.bandwidth_bps > 0)) throw std::invalid_argument(name + ": bandwidth must be > 0");
      if (s.prop_delay_s < 0) throw std::invalid_argument(name + ": negative prop delay");
      if (s.queue_capacity < 1) throw std::invalid_argument(name + ": queue capacity < 1");
      t.links_.push_back({static_cast<int>(i), s.src, s.dst, s.bandwidth_bps,
                          s.prop_delay_s, s.queue_capacity});
    }
    t.out_.assign(node_count, {});
    t.in_.assign(node_count, {});
    for (const DirectedLink& l : t.links_) {
      t.out_[l.src].push_back(l.id);
      t.in_[l.dst].push_back(l.id);
    }
    return t;
  }

  int node_count() const { return n_; }
  int link_count() const { return static_cast<int>(links_.size()); }
  const std::vector<DirectedLink>& links() const { return links_; }
  const DirectedLink& link(int id) const { return links_[id]; }
  const std::vector<int>& out_links(int node) const { return out_[node]; }
  const std::vector<int>& in_links(int node) const { return in_[node]; }

  // -1 when no such link exists.
  int link_id(int src, int dst) const {
    for (int id : out_[src])
      if (links_[id].dst == dst) return id;
    return -1;
  }

  double max_bandwidth_bps() const {
    double mx = 0.0;
    for (const DirectedLink& l : links_) mx = std::max(mx, l.bandwidth_bps);
    return mx;
  }

 private:
  int n_ = 0;
  std::vector<DirectedLink> links_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

// One positive weight per canonical link index.
struct WeightAssignment {
  std::vector<double> values;
};

inline WeightAssignment uniform_weights(const Topology& topo, double w = 1.0) {
  return {std::vector<double>(topo.link_count(), w)};
}

inline void validate_weights(const Topology& topo, const WeightAssignment& wa) {
  if (static_cast<int>(wa.values.size()) != topo.link_count())
    throw std::invalid_argument("weights: expected " + std::to_string(topo.link_count()) +
                                " entries, got " + std::to_string(wa.values.size()));
  for (std::size_t i = 0; i < wa.values.size(); ++i)
    if (!(wa.values[i] > 0.0) || !std::isfinite(wa.values[i]))
      throw std::invalid_argument("weights: entry " + std::to_string(i) +
                                  " must be positive and finite");
}

struct DijkstraResult {
  std::vector<double> cost;                 // node -> min cost to destination
  std::vector<std::vector<int>> min_links;  // node -> cost-minimal outgoing links
};

// Costs from every node TO `destination` under the given weights; tie sets
// keep all outgoing links within a relative epsilon of the minimum.
inline DijkstraResult dijkstra(const Topology& topo, const WeightAssignment& weights,
                               int destination) {
  if (destination < 0 || destination >= topo.node_count())
    throw std::invalid_argument("dijkstra: destination " + std::to_string(destination) +
                                " out of range");
  validate_weights(topo, weights);

  const int n = topo.node_count();
  DijkstraResult res;
  res.cost.assign(n, kInfCost);
  res.min_links.assign(n, {});
  res.cost[destination] = 0.0;

  using Entry = std::pair<double, int>;  // (cost, node)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  pq.push({0.0, destination});
  std::vector<char> done(n, 0);
  while (!pq.empty()) {
    auto [c, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (int id : topo.in_links(u)) {
      const DirectedLink& l = topo.link(id);
      double cand = weights.values[id] + c;
      if (cand < res.cost[l.src]) {
        res.cost[l.src] = cand;
        pq.push({cand, l.src});
      }
    }
  }

  for (int u = 0; u < n; ++u) {
    if (u == destination || res.cost[u] == kInfCost) continue;
    const double eps = 1e-12 * std::max(1.0, res.cost[u]);
    for (int id : topo.out_links(u)) {
      const DirectedLink& l = topo.link(id);
      if (res.cost[l.dst] == kInfCost) continue;
      if (weights.values[id] + res.cost[l.dst] <= res.cost[u] + eps)
        res.min_links[u].push_back(id);
    }
  }
  return res;
}

enum class ForwardingMode { single_path, weighted_multipath };

struct NextHop {
  int link;
  double prob;
};

// Per-destination costs and forwarding distributions. Immutable once built;
// safe to share across threads.
class RoutingState {
 public:
  RoutingState(int n, std::vector<double> cost, std::vector<std::vector<NextHop>> hops)
      : n_(n), cost_(std::move(cost)), hops_(std::move(hops)) {}

  int node_count() const { return n_; }
  double cost(int node, int dest) const { return cost_[node * n_ + dest]; }
  std::span<const NextHop> next_hops(int node, int dest) const {
    return hops_[node * n_ + dest];
  }

 private:
  int n_;
  std::vector<double> cost_;                // n*n, [node*n + dest]
  std::vector<std::vector<NextHop>> hops_;  // n*n
};

// single_path: one next hop per (node, dest), picked from the Dijkstra tie
// set by lowest link destination id, then lowest link id.
// weighted_multipath: candidates are the neighbors closer to the destination
// plus, ECMP-style, equal-cost neighbors with a higher node id; probability
// is proportional to 1/(link weight + neighbor cost). Every hop strictly
// decreases (cost, node id) lexicographically, so sampled paths are
// loop-free and terminate within node_count-1 hops.
inline RoutingState build_routing_state(const Topology& topo,
                                        const WeightAssignment& weights,
                                        ForwardingMode mode) {
  const int n = topo.node_count();
  std::vector<double> cost(static_cast<std::size_t>(n) * n, kInfCost);
  std::vector<std::vector<NextHop>> hops(static_cast<std::size_t>(n) * n);

  for (int dest = 0; dest < n; ++dest) {
    DijkstraResult dr = dijkstra(topo, weights, dest);
    for (int u = 0; u < n; ++u) {
      cost[u * n + dest] = dr.cost[u];
      if (u == dest || dr.cost[u] == kInfCost) continue;
      auto& out = hops[u * n + dest];
      if (mode == ForwardingMode::single_path) {
        int best = -1;
        for (int id : dr.min_links[u]) {
          if (best == -1) {
            best = id;
            continue;
          }
          const DirectedLink& a = topo.link(id);
          const DirectedLink& b = topo.link(best);
          if (a.dst < b.dst || (a.dst == b.dst && a.id < b.id)) best = id;
        }
        if (best >= 0) out.push_back({best, 1.0});
      } else {
        double total = 0.0;
        const double eps = 1e-12 * std::max(1.0, dr.cost[u]);
        for (int id : topo.out_links(u)) {
          const DirectedLink& l = topo.link(id);
          if (dr.cost[l.dst] == kInfCost) continue;
          const bool closer = dr.cost[l.dst] < dr.cost[u] - eps;
          const bool equal_onward =
              l.dst > u && std::fabs(dr.cost[l.dst] - dr.cost[u]) <= eps;
          if (closer || equal_onward) {
            double score = 1.0 / (weights.values[id] + dr.cost[l.dst]);
            out.push_back({id, score});
            total += score;
          }
        }
        for (NextHop& h : out) h.prob /= total;
      }
    }
  }
  return RoutingState(n, std::move(cost), std::move(hops));
}

}  // namespace netrl

#include "netrl/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "netrl/rng.hpp"

using namespace netrl;

namespace {

// 4 nodes, both directions of {0-1, 0-2, 0-3, 1-3, 2-3}; the only flow-free
// 4-node layout with one direct route and two 2-hop routes between 0 and 3.
Topology diamond() {
  std::vector<LinkSpec> specs;
  const int pairs[5][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 3}, {2, 3}};
  for (const auto& p : pairs) {
    specs.push_back({p[0], p[1], 5e6, 0.0, 100});
    specs.push_back({p[1], p[0], 5e6, 0.0, 100});
  }
  return Topology::build(4, specs);
}

double prob_of(const RoutingState& rs, const Topology& t, int node, int dest, int src, int dst) {
  for (const NextHop& h : rs.next_hops(node, dest))
    if (t.link(h.link).src == src && t.link(h.link).dst == dst) return h.prob;
  return -1.0;  // not a candidate
}

}  // namespace

TEST(Topology, CanonicalLinkOrder) {
  Topology t = diamond();
  EXPECT_EQ(t.node_count(), 4);
  EXPECT_EQ(t.link_count(), 10);
  const int expected[10][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 0}, {1, 3},
                               {2, 0}, {2, 3}, {3, 0}, {3, 1}, {3, 2}};
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(t.link(i).id, i);
    EXPECT_EQ(t.link(i).src, expected[i][0]);
    EXPECT_EQ(t.link(i).dst, expected[i][1]);
    EXPECT_EQ(t.link_id(expected[i][0], expected[i][1]), i);
  }
  EXPECT_EQ(t.link_id(1, 2), -1);
  EXPECT_DOUBLE_EQ(t.max_bandwidth_bps(), 5e6);
}

TEST(Topology, BuildRejectsBadSpecs) {
  EXPECT_THROW(Topology::build(0, {}), std::invalid_argument);
  // Node out of range; message names the link.
  try {
    Topology::build(4, {{0, 9, 5e6, 0.0, 100}});
    FAIL() << "expected throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("0->9"), std::string::npos);
  }
  EXPECT_THROW(Topology::build(4, {{2, 2, 5e6, 0.0, 100}}), std::invalid_argument);
  EXPECT_THROW(Topology::build(4, {{0, 1, 0.0, 0.0, 100}}), std::invalid_argument);
  EXPECT_THROW(Topology::build(4, {{0, 1, 5e6, -1.0, 100}}), std::invalid_argument);
  EXPECT_THROW(Topology::build(4, {{0, 1, 5e6, 0.0, 0}}), std::invalid_argument);
  // Duplicate directed link.
  EXPECT_THROW(Topology::build(4, {{0, 1, 5e6, 0.0, 100}, {0, 1, 5e6, 0.0, 100}}),
               std::invalid_argument);
}

TEST(Topology, ValidateWeights) {
  Topology t = diamond();
  WeightAssignment w = uniform_weights(t);
  EXPECT_NO_THROW(validate_weights(t, w));
  w.values.pop_back();
  EXPECT_THROW(validate_weights(t, w), std::invalid_argument);
  w = uniform_weights(t);
  w.values[3] = 0.0;
  EXPECT_THROW(validate_weights(t, w), std::invalid_argument);
  w.values[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate_weights(t, w), std::invalid_argument);
}

TEST(Topology, DijkstraUniformDiamond) {
  Topology t = diamond();
  DijkstraResult dr = dijkstra(t, uniform_weights(t), 3);
  EXPECT_DOUBLE_EQ(dr.cost[0], 1.0);  // direct edge beats any 2-hop cost 2
  EXPECT_DOUBLE_EQ(dr.cost[1], 1.0);
  EXPECT_DOUBLE_EQ(dr.cost[2], 1.0);
  EXPECT_DOUBLE_EQ(dr.cost[3], 0.0);
  ASSERT_EQ(dr.min_links[0].size(), 1u);
  EXPECT_EQ(dr.min_links[0][0], t.link_id(0, 3));
  EXPECT_TRUE(dr.min_links[3].empty());  // destination itself
}

TEST(Topology, DijkstraTieSetWhenDirectIsExpensive) {
  Topology t = diamond();
  WeightAssignment w = uniform_weights(t);
  w.values[t.link_id(0, 3)] = 10.0;
  DijkstraResult dr = dijkstra(t, w, 3);
  EXPECT_DOUBLE_EQ(dr.cost[0], 2.0);
  std::vector<int> ties = dr.min_links[0];
  std::sort(ties.begin(), ties.end());
  ASSERT_EQ(ties.size(), 2u);
  EXPECT_EQ(ties[0], t.link_id(0, 1));
  EXPECT_EQ(ties[1], t.link_id(0, 2));
}

TEST(Topology, DijkstraUnreachable) {
  // 3 nodes, single link 0->1: node 2 cannot reach anything.
  Topology t = Topology::build(3, {{0, 1, 5e6, 0.0, 100}});
  DijkstraResult dr = dijkstra(t, uniform_weights(t), 1);
  EXPECT_DOUBLE_EQ(dr.cost[0], 1.0);
  EXPECT_EQ(dr.cost[2], kInfCost);
  EXPECT_TRUE(dr.min_links[2].empty());
}

TEST(Topology, SinglePathUniqueShortest) {
  Topology t = diamond();
  RoutingState rs = build_routing_state(t, uniform_weights(t), ForwardingMode::single_path);
  auto hops = rs.next_hops(0, 3);
  ASSERT_EQ(hops.size(), 1u);
  EXPECT_EQ(hops[0].link, t.link_id(0, 3));
  EXPECT_DOUBLE_EQ(hops[0].prob, 1.0);
  EXPECT_TRUE(rs.next_hops(3, 3).empty());
}

TEST(Topology, SinglePathTieBreakLowestDstThenLinkId) {
  Topology t = diamond();
  WeightAssignment w = uniform_weights(t);
  w.values[t.link_id(0, 3)] = 2.0;  // direct now ties both 2-hop routes
  RoutingState rs = build_routing_state(t, w, ForwardingMode::single_path);
  auto hops = rs.next_hops(0, 3);
  ASSERT_EQ(hops.size(), 1u);
  // Tie set is {0->1, 0->2, 0->3}; lowest destination node wins.
  EXPECT_EQ(hops[0].link, t.link_id(0, 1));
}

TEST(Topology, MultipathUniformSplit) {
  Topology t = diamond();
  RoutingState rs = build_routing_state(t, uniform_weights(t), ForwardingMode::weighted_multipath);
  // Scores: direct 1/(1+0)=1, each 2-hop neighbor 1/(1+1)=0.5.
  EXPECT_NEAR(prob_of(rs, t, 0, 3, 0, 3), 0.50, 1e-12);
  EXPECT_NEAR(prob_of(rs, t, 0, 3, 0, 1), 0.25, 1e-12);
  EXPECT_NEAR(prob_of(rs, t, 0, 3, 0, 2), 0.25, 1e-12);
  // Relay nodes forward only; no bounce back toward node 0.
  ASSERT_EQ(rs.next_hops(1, 3).size(), 1u);
  EXPECT_EQ(rs.next_hops(1, 3)[0].link, t.link_id(1, 3));
  ASSERT_EQ(rs.next_hops(2, 3).size(), 1u);
  EXPECT_EQ(rs.next_hops(2, 3)[0].link, t.link_id(2, 3));
  EXPECT_TRUE(rs.next_hops(3, 3).empty());
}

TEST(Topology, ScalingWeightsLeavesRoutingInvariant) {
  Topology t = diamond();
  RngStream rng(11, "weights");
  WeightAssignment w;
  for (int i = 0; i < t.link_count(); ++i)
    w.values.push_back(1.0 + static_cast<double>(rng.below(4)));  // exact small ints
  WeightAssignment w4;
  for (double v : w.values) w4.values.push_back(4.0 * v);

  for (ForwardingMode mode :
       {ForwardingMode::single_path, ForwardingMode::weighted_multipath}) {
    RoutingState a = build_routing_state(t, w, mode);
    RoutingState b = build_routing_state(t, w4, mode);
    for (int u = 0; u < 4; ++u)
      for (int d = 0; d < 4; ++d) {
        if (u != d) {
          EXPECT_DOUBLE_EQ(b.cost(u, d), 4.0 * a.cost(u, d));
        }
        auto ha = a.next_hops(u, d);
        auto hb = b.next_hops(u, d);
        ASSERT_EQ(ha.size(), hb.size());
        for (std::size_t i = 0; i < ha.size(); ++i) {
          EXPECT_EQ(ha[i].link, hb[i].link);
          EXPECT_NEAR(ha[i].prob, hb[i].prob, 1e-12);
        }
      }
  }
}

namespace {

// All simple-path costs from src to dest by exhaustive DFS.
double brute_force_cost(const Topology& t, const WeightAssignment& w, int src, int dest,
                        std::vector<char>& visited) {
  if (src == dest) return 0.0;
  visited[src] = 1;
  double best = kInfCost;
  for (int id : t.out_links(src)) {
    const DirectedLink& l = t.link(id);
    if (visited[l.dst]) continue;
    double rest = brute_force_cost(t, w, l.dst, dest, visited);
    best = std::min(best, w.values[id] + rest);
  }
  visited[src] = 0;
  return best;
}

}  // namespace

TEST(Topology, DijkstraMatchesBruteForceOnRandomGraphs) {
  for (std::uint64_t trial = 0; trial < 40; ++trial) {
    RngStream rng(23, "graphs", trial);
    int n = 2 + static_cast<int>(rng.below(5));
    std::vector<LinkSpec> specs;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && rng.below(2) == 0) specs.push_back({i, j, 5e6, 0.0, 100});
    if (specs.empty()) continue;
    Topology t = Topology::build(n, specs);
    WeightAssignment w;
    for (int i = 0; i < t.link_count(); ++i)
      w.values.push_back(1.0 + static_cast<double>(rng.below(3)));  // {1,2,3}: exact ties

    for (int dest = 0; dest < n; ++dest) {
      DijkstraResult dr = dijkstra(t, w, dest);
      for (int u = 0; u < n; ++u) {
        std::vector<char> visited(n, 0);
        double expect = brute_force_cost(t, w, u, dest, visited);
        if (expect == kInfCost)
          EXPECT_EQ(dr.cost[u], kInfCost);
        else
          EXPECT_DOUBLE_EQ(dr.cost[u], expect) << "n=" << n << " u=" << u << " dest=" << dest;
        // Tie set: exactly the out-links whose one-hop relaxation is minimal.
        if (u != dest && expect != kInfCost) {
          std::vector<int> want;
          for (int id : t.out_links(u)) {
            const DirectedLink& l = t.link(id);
            std::vector<char> v2(n, 0);
            v2[u] = 1;  // simple paths: do not revisit u
            double through = w.values[id] + brute_force_cost(t, w, l.dst, dest, v2);
            if (through <= expect + 1e-9) want.push_back(id);
          }
          std::vector<int> got = dr.min_links[u];
          std::sort(got.begin(), got.end());
          std::sort(want.begin(), want.end());
          EXPECT_EQ(got, want) << "n=" << n << " u=" << u << " dest=" << dest;
        }
      }
    }
  }
}

TEST(Topology, MultipathDistributionsAreLoopFreeAndNormalized) {
  for (std::uint64_t trial = 0; trial < 40; ++trial) {
    RngStream rng(29, "graphs", trial);
    int n = 2 + static_cast<int>(rng.below(5));
    std::vector<LinkSpec> specs;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && rng.below(2) == 0) specs.push_back({i, j, 5e6, 0.0, 100});
    if (specs.empty()) continue;
    Topology t = Topology::build(n, specs);
    WeightAssignment w;
    for (int i = 0; i < t.link_count(); ++i) w.values.push_back(rng.uniform(0.5, 3.0));
    RoutingState rs = build_routing_state(t, w, ForwardingMode::weighted_multipath);

    for (int dest = 0; dest < n; ++dest)
      for (int u = 0; u < n; ++u) {
        auto hops = rs.next_hops(u, dest);
        if (u == dest || rs.cost(u, dest) == kInfCost) {
          EXPECT_TRUE(hops.empty());
          continue;
        }
        ASSERT_FALSE(hops.empty()) << "reachable node without next hops";
        double sum = 0.0;
        for (const NextHop& h : hops) {
          sum += h.prob;
          EXPECT_GT(h.prob, 0.0);
          int v = t.link(h.link).dst;
          // (cost, node id) strictly decreases lexicographically.
          bool closer = rs.cost(v, dest) < rs.cost(u, dest) - 1e-9;
          bool equal_onward =
              std::fabs(rs.cost(v, dest) - rs.cost(u, dest)) <= 1e-9 && v > u;
          EXPECT_TRUE(closer || equal_onward)
              << "hop " << u << "->" << v << " dest " << dest;
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
      }
  }
}

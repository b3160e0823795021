#pragma once

#include <stdexcept>

#include "netrl/rng.hpp"
#include "netrl/topology.hpp"

// Non-learning weight policies used as comparison points: shortest-path
// routing with inverse-bandwidth costs, and uniformly random weights.

namespace netrl {

// Classic inverse-bandwidth link costs: reference_bw / link_bw. The default
// reference (0) is the largest bandwidth in the topology, making the fastest
// links cost 1. Always paired with single-path forwarding.
inline WeightAssignment ospf_weights(const Topology& topo, double reference_bw = 0.0) {
  double max_bw = topo.max_bandwidth_bps();
  if (reference_bw == 0.0) reference_bw = max_bw;
  if (reference_bw < max_bw)
    throw std::invalid_argument("ospf_weights: reference bandwidth below fastest link");
  WeightAssignment w;
  w.values.reserve(topo.link_count());
  for (const DirectedLink& l : topo.links())
    w.values.push_back(reference_bw / l.bandwidth_bps);
  return w;
}

// Independent uniform draws in [w_min, w_max]; one fresh assignment per call.
inline WeightAssignment random_weights(const Topology& topo, RngStream& rng,
                                       double w_min = kMinLinkWeight,
                                       double w_max = 10.0) {
  if (!(w_min > 0) || !(w_max >= w_min))
    throw std::invalid_argument("random_weights: need 0 < w_min <= w_max");
  WeightAssignment w;
  w.values.reserve(topo.link_count());
  for (int i = 0; i < topo.link_count(); ++i)
    w.values.push_back(rng.uniform(w_min, w_max));
  return w;
}

}  // namespace netrl

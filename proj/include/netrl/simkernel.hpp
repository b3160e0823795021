#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "netrl/rng.hpp"
#include "netrl/topology.hpp"

// Discrete-event packet simulator: seeded traffic generation, store-and-
// forward transmission with per-link drop-tail FIFO queues, per-packet delay
// measurement and per-slot aggregation. Single-threaded event loop; distinct
// instances are independent.

namespace netrl {

enum class ArrivalModel { cbr, poisson };

struct FlowSpec {
  int src = 0;
  int dst = 0;
  double rate_bps = 0.0;
  int packet_size_bytes = 1024;
  ArrivalModel arrival = ArrivalModel::poisson;
  double start_s = 0.0;
  double stop_s = std::numeric_limits<double>::infinity();
};

inline void validate_flow(const FlowSpec& f, int node_count) {
  if (f.src < 0 || f.src >= node_count || f.dst < 0 || f.dst >= node_count)
    throw std::invalid_argument("flow: node id out of range");
  if (f.src == f.dst) throw std::invalid_argument("flow: src == dst");
  if (!(f.rate_bps > 0)) throw std::invalid_argument("flow: rate must be > 0");
  if (f.packet_size_bytes < 64) throw std::invalid_argument("flow: packet size < 64 bytes");
  if (f.stop_s <= f.start_s) throw std::invalid_argument("flow: stop <= start");
}

inline double transmission_time(double packet_size_bytes, double bandwidth_bps) {
  return packet_size_bytes * 8.0 / bandwidth_bps;
}

// Absolute time of the next packet after one generated at `now`.
// cbr spaces packets exactly at size*8/rate; poisson draws exponential gaps
// with that mean.
inline double next_arrival(const FlowSpec& flow, double now, RngStream& rng) {
  const double mean_gap = flow.packet_size_bytes * 8.0 / flow.rate_bps;
  if (flow.arrival == ArrivalModel::cbr) return now + mean_gap;
  return now + rng.exponential(mean_gap);
}

struct SlotMetrics {
  long slot_index = 0;
  long delivered = 0;
  long dropped = 0;
  double sum_delay_s = 0.0;
  std::optional<double> mean_delay_s;  // absent when nothing was delivered
  int nodes = 0;
  std::vector<double> tx_bytes;  // nodes*nodes, [src*nodes + dst], injected demand

  double tx(int src, int dst) const { return tx_bytes[src * nodes + dst]; }
};

// Packet totals at a slot boundary; injected = delivered + dropped + queued
// + in_flight always holds.
struct Accounting {
  long injected = 0;
  long delivered = 0;
  long dropped = 0;
  long queued = 0;    // waiting in queues or in transmission
  long in_flight = 0; // transmitted, not yet arrived at the next node
};

struct PacketRecord {
  long id;
  int flow;
  int src;
  int dst;
  double created_s;
  double delivered_s;
  int hops;
};

namespace sim_detail {

struct Packet {
  long id = 0;
  int flow = 0;
  int size = 0;
  int dst = 0;
  int src = 0;
  int hops = 0;
  double created_s = 0.0;
};

enum class EventType : std::uint8_t { flow_arrival, tx_complete, node_arrival };

struct Event {
  double t = 0.0;
  std::uint64_t seq = 0;
  EventType type = EventType::flow_arrival;
  int idx = 0;  // flow index / link id / node id
  Packet pkt;   // node_arrival only
};

}  // namespace sim_detail

// Pending events ordered by (timestamp, insertion sequence): nondecreasing
// timestamps, with simultaneous events dequeued in insertion order.
class EventQueue {
 public:
  void push(double t, sim_detail::Event ev) {
    ev.t = t;
    ev.seq = next_seq_++;
    heap_.push(std::move(ev));
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  double next_time() const { return heap_.top().t; }

  sim_detail::Event pop() {
    sim_detail::Event ev = heap_.top();
    heap_.pop();
    return ev;
  }

  void clear() {
    heap_ = {};
    next_seq_ = 0;
  }

 private:
  struct After {
    bool operator()(const sim_detail::Event& a, const sim_detail::Event& b) const {
      return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
  };
  std::priority_queue<sim_detail::Event, std::vector<sim_detail::Event>, After> heap_;
  std::uint64_t next_seq_ = 0;
};

class Simulator {
 public:
  Simulator(Topology topo, std::vector<FlowSpec> flows)
      : topo_(std::move(topo)), flows_(std::move(flows)) {
    for (const FlowSpec& f : flows_) validate_flow(f, topo_.node_count());
    links_.resize(topo_.link_count());
    reset(0, 0);
  }

  // Clears queues, statistics and clock, reseeds the per-flow traffic and
  // next-hop sampling streams from (seed, episode), and schedules each
  // flow's first arrival.
  void reset(std::uint64_t seed, long episode) {
    events_.clear();
    for (LinkState& ls : links_) {
      ls.q.clear();
      ls.busy = false;
    }
    clock_ = 0.0;
    slot_count_ = 0;
    next_packet_id_ = 0;
    acct_ = Accounting{};
    flow_rngs_.clear();
    for (std::size_t i = 0; i < flows_.size(); ++i)
      flow_rngs_.emplace_back(seed, "traffic", static_cast<std::uint64_t>(episode), i);
    hop_rng_ = RngStream(seed, "nexthop", static_cast<std::uint64_t>(episode));
    for (std::size_t i = 0; i < flows_.size(); ++i) {
      sim_detail::Event ev;
      ev.type = sim_detail::EventType::flow_arrival;
      ev.idx = static_cast<int>(i);
      events_.push(flows_[i].start_s, ev);
    }
  }

  // Advances the clock by `duration`, processing every event strictly before
  // the new boundary. Queues persist across slots. Per-packet next hops in
  // weighted_multipath mode are sampled from the routing distributions.
  SlotMetrics run_slot(const RoutingState& routing, double duration) {
    if (!(duration > 0)) throw std::invalid_argument("run_slot: duration must be > 0");
    const int n = topo_.node_count();
    SlotMetrics m;
    m.slot_index = slot_count_++;
    m.nodes = n;
    m.tx_bytes.assign(static_cast<std::size_t>(n) * n, 0.0);
    slot_ = &m;
    routing_ = &routing;
    const double slot_end = clock_ + duration;
    while (!events_.empty() && events_.next_time() < slot_end) {
      sim_detail::Event ev = events_.pop();
      dispatch(ev);
    }
    clock_ = slot_end;
    slot_ = nullptr;
    routing_ = nullptr;
    if (m.delivered > 0) m.mean_delay_s = m.sum_delay_s / m.delivered;
    return m;
  }

  double now() const { return clock_; }
  const Topology& topology() const { return topo_; }
  const std::vector<FlowSpec>& flows() const { return flows_; }

  Accounting accounting() const {
    Accounting a = acct_;
    for (const LinkState& ls : links_)
      a.queued += static_cast<long>(ls.q.size()) + (ls.busy ? 1 : 0);
    return a;
  }

  // Test hook: when set, every delivered packet is appended.
  void set_delivery_log(std::vector<PacketRecord>* log) { delivery_log_ = log; }

 private:
  struct LinkState {
    std::deque<sim_detail::Packet> q;  // waiting packets; in-service one is separate
    bool busy = false;
    sim_detail::Packet in_service;
  };

  void dispatch(const sim_detail::Event& ev) {
    switch (ev.type) {
      case sim_detail::EventType::flow_arrival:
        on_flow_arrival(ev.idx, ev.t);
        break;
      case sim_detail::EventType::tx_complete:
        on_tx_complete(ev.idx, ev.t);
        break;
      case sim_detail::EventType::node_arrival:
        --acct_.in_flight;
        route_packet(ev.pkt, ev.idx, ev.t);
        break;
    }
  }

  void on_flow_arrival(int flow_idx, double t) {
    const FlowSpec& f = flows_[flow_idx];
    if (t >= f.stop_s) return;
    sim_detail::Packet pkt;
    pkt.id = next_packet_id_++;
    pkt.flow = flow_idx;
    pkt.size = f.packet_size_bytes;
    pkt.src = f.src;
    pkt.dst = f.dst;
    pkt.created_s = t;
    ++acct_.injected;
    slot_->tx_bytes[f.src * topo_.node_count() + f.dst] += f.packet_size_bytes;
    route_packet(pkt, f.src, t);

    sim_detail::Event next;
    next.type = sim_detail::EventType::flow_arrival;
    next.idx = flow_idx;
    events_.push(next_arrival(f, t, flow_rngs_[flow_idx]), next);
  }

  void route_packet(sim_detail::Packet pkt, int node, double t) {
    if (node == pkt.dst) {
      ++acct_.delivered;
      ++slot_->delivered;
      slot_->sum_delay_s += t - pkt.created_s;
      if (delivery_log_)
        delivery_log_->push_back({pkt.id, pkt.flow, pkt.src, pkt.dst, pkt.created_s, t, pkt.hops});
      return;
    }
    std::span<const NextHop> hops = routing_->next_hops(node, pkt.dst);
    if (hops.empty()) {  // no route; drops are data, not errors
      ++acct_.dropped;
      ++slot_->dropped;
      return;
    }
    int link = hops.back().link;
    if (hops.size() > 1) {
      double u = hop_rng_.uniform();
      double cum = 0.0;
      for (const NextHop& h : hops) {
        cum += h.prob;
        if (u < cum) {
          link = h.link;
          break;
        }
      }
    } else {
      link = hops.front().link;
    }
    ++pkt.hops;
    enqueue(link, pkt, t);
  }

  void enqueue(int link_id, const sim_detail::Packet& pkt, double t) {
    LinkState& ls = links_[link_id];
    const DirectedLink& l = topo_.link(link_id);
    if (!ls.busy) {
      ls.busy = true;
      ls.in_service = pkt;
      sim_detail::Event ev;
      ev.type = sim_detail::EventType::tx_complete;
      ev.idx = link_id;
      events_.push(t + transmission_time(pkt.size, l.bandwidth_bps), ev);
    } else if (static_cast<int>(ls.q.size()) < l.queue_capacity) {
      ls.q.push_back(pkt);
    } else {
      ++acct_.dropped;
      ++slot_->dropped;
    }
  }

  void on_tx_complete(int link_id, double t) {
    LinkState& ls = links_[link_id];
    const DirectedLink& l = topo_.link(link_id);
    sim_detail::Event arrival;
    arrival.type = sim_detail::EventType::node_arrival;
    arrival.idx = l.dst;
    arrival.pkt = ls.in_service;
    ++acct_.in_flight;
    events_.push(t + l.prop_delay_s, arrival);
    if (!ls.q.empty()) {
      ls.in_service = ls.q.front();
      ls.q.pop_front();
      sim_detail::Event ev;
      ev.type = sim_detail::EventType::tx_complete;
      ev.idx = link_id;
      events_.push(t + transmission_time(ls.in_service.size, l.bandwidth_bps), ev);
    } else {
      ls.busy = false;
    }
  }

  Topology topo_;
  std::vector<FlowSpec> flows_;
  std::vector<LinkState> links_;
  EventQueue events_;
  std::vector<RngStream> flow_rngs_;
  RngStream hop_rng_;
  double clock_ = 0.0;
  long slot_count_ = 0;
  long next_packet_id_ = 0;
  Accounting acct_;
  SlotMetrics* slot_ = nullptr;
  const RoutingState* routing_ = nullptr;
  std::vector<PacketRecord>* delivery_log_ = nullptr;
};

}  // namespace netrl

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "netrl/simkernel.hpp"
#include "netrl/topology.hpp"

// Episodic RL view of the simulator. State: the flattened N x N traffic
// matrix of the last slot, scaled by a normalizer. Action: one weight per
// directed link, clamped to [kMinLinkWeight, max_weight]. Reward: negated
// mean end-to-end delay of the slot's delivered packets, in milliseconds.
// The environment itself never terminates; episode length is enforced by
// the training loop.

namespace netrl {

struct EnvConfig {
  double slot_duration_s = 0.1;
  int steps_per_episode = 100;
  // Divisor for traffic-matrix entries. 0 selects the default: bytes
  // deliverable per slot on the fastest link, rounded up to a power of two
  // so that state * normalizer reproduces the byte counts exactly.
  double state_normalizer_bytes = 0.0;
  ForwardingMode forwarding_mode = ForwardingMode::weighted_multipath;
  std::uint64_t seed = 1;
  double max_weight = 10.0;       // clamp ceiling; the actor's a_bound
  double delay_penalty_ms = 100.0;  // reward when a slot delivers nothing
};

inline void validate_env_config(const EnvConfig& c) {
  if (!(c.slot_duration_s > 0)) throw std::invalid_argument("env: slot_duration_s must be > 0");
  if (c.steps_per_episode < 1) throw std::invalid_argument("env: steps_per_episode < 1");
  if (c.state_normalizer_bytes < 0)
    throw std::invalid_argument("env: state_normalizer_bytes must be >= 0");
  if (!(c.max_weight > kMinLinkWeight))
    throw std::invalid_argument("env: max_weight must exceed the weight floor");
}

using StateVector = std::vector<double>;

// The state divides injected bytes by this many bytes. An explicit config
// value wins; otherwise one slot's worth of the fastest link, rounded up to
// a power of two so that state * normalizer reproduces byte counts exactly.
inline double resolve_normalizer(const Topology& topo, const EnvConfig& cfg) {
  if (cfg.state_normalizer_bytes > 0.0) return cfg.state_normalizer_bytes;
  double bytes_per_slot = cfg.slot_duration_s * topo.max_bandwidth_bps() / 8.0;
  return static_cast<double>(
      std::bit_ceil(static_cast<std::uint64_t>(std::ceil(bytes_per_slot))));
}

struct StepResult {
  double reward;
  StateVector next_state;
  SlotMetrics metrics;
};

// r = -(mean delivered delay in ms); the fixed penalty stands in when the
// slot delivered nothing.
inline double reward_from(const SlotMetrics& m, double delay_penalty_ms) {
  if (m.delivered == 0) return -delay_penalty_ms;
  return -(m.sum_delay_s / m.delivered) * 1e3;
}

class Env {
 public:
  Env(Topology topo, std::vector<FlowSpec> flows, EnvConfig cfg)
      : cfg_(cfg), sim_(std::move(topo), std::move(flows)) {
    validate_env_config(cfg_);
    const Topology& t = sim_.topology();
    state_dim_ = t.node_count() * t.node_count();
    action_dim_ = t.link_count();
    normalizer_ = resolve_normalizer(t, cfg_);
    episode_ = -1;
  }

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  double normalizer() const { return normalizer_; }
  const Topology& topology() const { return sim_.topology(); }
  const EnvConfig& config() const { return cfg_; }
  const Simulator& sim() const { return sim_; }
  Simulator& sim() { return sim_; }
  long episode_index() const { return episode_; }
  const WeightAssignment& last_weights() const { return weights_; }

  // Flushes queues and statistics, reseeds the episode's streams from
  // (seed, episode), reinstalls uniform weights, and runs one warm-up slot
  // to measure the initial traffic matrix.
  StateVector reset() {
    ++episode_;
    sim_.reset(cfg_.seed, episode_);
    weights_ = uniform_weights(sim_.topology(), 1.0);
    RoutingState routing = build_routing_state(sim_.topology(), weights_, cfg_.forwarding_mode);
    SlotMetrics m = sim_.run_slot(routing, cfg_.slot_duration_s);
    return state_from(m);
  }

  StepResult step(std::span<const double> action) {
    if (static_cast<int>(action.size()) != action_dim_)
      throw std::invalid_argument("step: action length " + std::to_string(action.size()) +
                                  " != link count " + std::to_string(action_dim_));
    weights_.values.resize(action.size());
    for (std::size_t i = 0; i < action.size(); ++i) {
      if (std::isnan(action[i]) || std::isinf(action[i]))
        throw std::invalid_argument("step: action entry " + std::to_string(i) +
                                    " is not finite");
      weights_.values[i] = std::clamp(action[i], kMinLinkWeight, cfg_.max_weight);
    }
    RoutingState routing = build_routing_state(sim_.topology(), weights_, cfg_.forwarding_mode);
    SlotMetrics m = sim_.run_slot(routing, cfg_.slot_duration_s);
    StepResult res;
    res.reward = reward_from(m, cfg_.delay_penalty_ms);
    res.next_state = state_from(m);
    res.metrics = std::move(m);
    return res;
  }

 private:
  StateVector state_from(const SlotMetrics& m) const {
    StateVector s(m.tx_bytes.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = m.tx_bytes[i] / normalizer_;
    return s;
  }

  EnvConfig cfg_;
  Simulator sim_;
  WeightAssignment weights_;
  int state_dim_ = 0;
  int action_dim_ = 0;
  double normalizer_ = 1.0;
  long episode_ = -1;
};

}  // namespace netrl

#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrl/nn.hpp"
#include "netrl/rng.hpp"

// DDPG with online/target actor-critic pairs, a FIFO-evicting replay ring,
// and Ornstein-Uhlenbeck exploration. The actor maps the state through relu
// hidden layers to a softmax head scaled by a_bound, so raw weights are
// positive and sum to a_bound; the critic scores concatenated (state,
// action) pairs. Critic regresses TD targets built from the target networks
// only; the actor ascends Q(s, mu(s)) by chaining the critic's action
// gradient through the scaled softmax head.

namespace netrl {

struct DdpgConfig {
  double gamma = 0.9;
  double tau = 0.01;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  int replay_capacity = 100;
  int replay_threshold = 64;  // training starts once size exceeds this
  int batch_size = 32;
  double a_bound = 10.0;
  double ou_mu = 0.0;
  double ou_theta = 0.1;
  double ou_sigma = 0.15;
  std::vector<int> actor_hidden{64, 32};
  std::vector<int> critic_hidden{64};
};

inline void validate_ddpg_config(const DdpgConfig& c) {
  if (c.gamma < 0 || c.gamma >= 1) throw std::invalid_argument("ddpg: gamma outside [0,1)");
  if (!(c.tau > 0) || c.tau > 1) throw std::invalid_argument("ddpg: tau outside (0,1]");
  if (c.replay_capacity < 1) throw std::invalid_argument("ddpg: replay_capacity < 1");
  if (c.batch_size < 1 || c.batch_size > c.replay_threshold ||
      c.replay_threshold > c.replay_capacity)
    throw std::invalid_argument("ddpg: need batch_size <= replay_threshold <= replay_capacity");
  if (!(c.a_bound > 0)) throw std::invalid_argument("ddpg: a_bound must be > 0");
  for (int h : c.actor_hidden)
    if (h < 1) throw std::invalid_argument("ddpg: actor hidden width < 1");
  for (int h : c.critic_hidden)
    if (h < 1) throw std::invalid_argument("ddpg: critic hidden width < 1");
}

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
};

// Ring storage; once full, each push evicts the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity) : cap_(capacity) {
    if (capacity < 1) throw std::invalid_argument("replay: capacity < 1");
    ring_.reserve(capacity);
  }

  void push(Transition t) {
    if (static_cast<int>(ring_.size()) < cap_) {
      ring_.push_back(std::move(t));
    } else {
      ring_[head_] = std::move(t);
      head_ = (head_ + 1) % cap_;
    }
    ++count_;
  }

  long size() const { return static_cast<long>(ring_.size()); }
  long total_pushed() const { return count_; }
  int capacity() const { return cap_; }

  // Logical index 0 is the oldest stored transition.
  const Transition& at(long i) const { return ring_[(head_ + i) % ring_.size()]; }

  // Uniform with replacement.
  std::vector<long> sample_indices(int batch, RngStream& rng) const {
    std::vector<long> idx(batch);
    for (long& i : idx) i = static_cast<long>(rng.below(ring_.size()));
    return idx;
  }

 private:
  std::vector<Transition> ring_;
  int cap_;
  std::size_t head_ = 0;  // slot holding the oldest entry once full
  long count_ = 0;
};

// Mean-reverting exploration noise: x += theta*(mu - x) + sigma*xi.
class OuNoise {
 public:
  OuNoise(int dim, double mu, double theta, double sigma)
      : mu_(mu), theta_(theta), sigma_(sigma), x_(dim, 0.0) {}

  void reset() { std::fill(x_.begin(), x_.end(), 0.0); }

  const std::vector<double>& step(RngStream& rng) {
    for (double& v : x_) v += theta_ * (mu_ - v) + sigma_ * rng.normal();
    return x_;
  }

  const std::vector<double>& value() const { return x_; }

 private:
  double mu_, theta_, sigma_;
  std::vector<double> x_;
};

struct TrainStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;  // -mean Q(s, mu(s))
};

// Serialized agent: the four networks, the two optimizer states, and an
// opaque metadata string (the experiment layer stores its config echo
// there). File layout: magic "NRLA", format u32, u64 meta length, meta
// bytes, then actor / critic / actor_target / critic_target via save_net,
// then the two Adam states.
struct AgentSnapshot {
  DenseNet actor, critic, actor_target, critic_target;
  AdamState actor_adam, critic_adam;
  std::string meta;
};

inline void save_snapshot(const std::string& path, const AgentSnapshot& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.write("NRLA", 4);
  detail::put_u32(os, 1);
  detail::put_u64(os, s.meta.size());
  os.write(s.meta.data(), static_cast<std::streamsize>(s.meta.size()));
  save_net(os, s.actor);
  save_net(os, s.critic);
  save_net(os, s.actor_target);
  save_net(os, s.critic_target);
  save_adam(os, s.actor_adam);
  save_adam(os, s.critic_adam);
  if (!os) throw std::runtime_error("failed writing " + path);
}

inline AgentSnapshot load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string_view(magic, 4) != "NRLA")
    throw std::runtime_error(path + ": not an agent snapshot");
  if (detail::get_u32(is) != 1) throw std::runtime_error(path + ": unknown format version");
  AgentSnapshot s;
  std::uint64_t meta_len = detail::get_u64(is);
  s.meta.resize(meta_len);
  is.read(s.meta.data(), static_cast<std::streamsize>(meta_len));
  s.actor = load_net(is);
  s.critic = load_net(is);
  s.actor_target = load_net(is);
  s.critic_target = load_net(is);
  s.actor_adam = load_adam(is, s.actor);
  s.critic_adam = load_adam(is, s.critic);
  if (!is) throw std::runtime_error(path + ": truncated snapshot");
  return s;
}

class DdpgAgent {
 public:
  DdpgAgent(int state_dim, int action_dim, DdpgConfig cfg, std::uint64_t seed)
      : cfg_(std::move(cfg)),
        state_dim_(state_dim),
        action_dim_(action_dim),
        replay_(cfg_.replay_capacity),
        noise_(action_dim, cfg_.ou_mu, cfg_.ou_theta, cfg_.ou_sigma),
        seed_(seed),
        ou_rng_(seed, "ou", 0),
        replay_rng_(seed, "replay") {
    validate_ddpg_config(cfg_);
    if (state_dim < 1 || action_dim < 1)
      throw std::invalid_argument("agent: dimensions must be positive");

    std::vector<int> adims{state_dim};
    adims.insert(adims.end(), cfg_.actor_hidden.begin(), cfg_.actor_hidden.end());
    adims.push_back(action_dim);
    std::vector<Activation> aacts(adims.size() - 1, Activation::relu);
    aacts.back() = Activation::softmax;
    RngStream actor_rng(seed, "init", 0);
    actor_ = make_net(adims, aacts, actor_rng, 3e-3);

    std::vector<int> cdims{state_dim + action_dim};
    cdims.insert(cdims.end(), cfg_.critic_hidden.begin(), cfg_.critic_hidden.end());
    cdims.push_back(1);
    std::vector<Activation> cacts(cdims.size() - 1, Activation::relu);
    cacts.back() = Activation::identity;
    RngStream critic_rng(seed, "init", 1);
    critic_ = make_net(cdims, cacts, critic_rng);

    actor_target_ = actor_;
    critic_target_ = critic_;
    actor_adam_ = AdamState::init(actor_, cfg_.actor_lr);
    critic_adam_ = AdamState::init(critic_, cfg_.critic_lr);
    resize_grads();
  }

  static DdpgAgent from_snapshot(const AgentSnapshot& s, DdpgConfig cfg, std::uint64_t seed) {
    int state_dim = s.actor.input_dim();
    int action_dim = s.actor.output_dim();
    if (s.critic.input_dim() != state_dim + action_dim)
      throw std::runtime_error("snapshot: critic input dim does not match actor dims");
    DdpgAgent agent(state_dim, action_dim, std::move(cfg), seed);
    agent.actor_ = s.actor;
    agent.critic_ = s.critic;
    agent.actor_target_ = s.actor_target;
    agent.critic_target_ = s.critic_target;
    agent.actor_adam_ = s.actor_adam;
    agent.critic_adam_ = s.critic_adam;
    agent.actor_adam_.lr = agent.cfg_.actor_lr;
    agent.critic_adam_.lr = agent.cfg_.critic_lr;
    agent.resize_grads();  // snapshot hidden widths may differ from cfg
    return agent;
  }

  AgentSnapshot snapshot(std::string meta = "") const {
    return {actor_, critic_, actor_target_, critic_target_, actor_adam_, critic_adam_,
            std::move(meta)};
  }

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  const DdpgConfig& config() const { return cfg_; }

  // Deterministic policy: softmax(actor logits) * a_bound. Entries are
  // positive and sum to a_bound.
  std::vector<double> act(std::span<const double> state) const {
    std::vector<double> a = forward(actor_, state);
    for (double& v : a) v *= cfg_.a_bound;
    return a;
  }

  // Policy plus one OU noise step (noise added to the scaled action).
  std::vector<double> act_noisy(std::span<const double> state) {
    std::vector<double> a = act(state);
    const std::vector<double>& eta = noise_.step(ou_rng_);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += eta[i];
    return a;
  }

  // Resets the OU state to zero and derives a fresh per-episode noise stream.
  void begin_episode() {
    ++episode_;
    noise_.reset();
    ou_rng_ = RngStream(seed_, "ou", static_cast<std::uint64_t>(episode_));
  }

  void observe(Transition t) { replay_.push(std::move(t)); }

  bool ready_to_train() const { return replay_.size() > cfg_.replay_threshold; }

  const ReplayBuffer& replay() const { return replay_; }
  OuNoise& noise() { return noise_; }

  // TD targets y_i = r_i + gamma * Q_target(s'_i, mu_target(s'_i)); target
  // networks only.
  std::vector<double> td_targets(std::span<const Transition* const> batch) const {
    std::vector<double> y(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Transition& tr = *batch[i];
      std::vector<double> a = forward(actor_target_, tr.next_state);
      for (double& v : a) v *= cfg_.a_bound;
      std::vector<double> in(tr.next_state);
      in.insert(in.end(), a.begin(), a.end());
      double q = forward(critic_target_, in)[0];
      y[i] = tr.reward + cfg_.gamma * q;
    }
    return y;
  }

  TrainStats train_on(std::span<const Transition* const> batch) {
    if (batch.empty()) throw std::invalid_argument("train_on: empty batch");
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    const std::vector<double> y = td_targets(batch);

    // Critic: one Adam step on mean squared TD error.
    TrainStats stats;
    critic_grads_.clear();
    Tape tape;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Transition& tr = *batch[i];
      std::vector<double> in(tr.state);
      in.insert(in.end(), tr.action.begin(), tr.action.end());
      double q = forward(critic_, in, &tape)[0];
      double err = q - y[i];
      stats.critic_loss += err * err * inv_b;
      double gout = 2.0 * err * inv_b;
      backward(critic_, tape, std::span(&gout, 1), critic_grads_);
    }
    adam_step(critic_, critic_grads_, critic_adam_);

    // Actor: ascend Q(s, mu(s)); the critic's action gradient flows back
    // through the a_bound-scaled softmax head.
    actor_grads_.clear();
    Tape atape, ctape;
    for (const Transition* tp : batch) {
      const Transition& tr = *tp;
      std::vector<double> mu = forward(actor_, tr.state, &atape);
      std::vector<double> in(tr.state);
      in.reserve(tr.state.size() + mu.size());
      for (double v : mu) in.push_back(v * cfg_.a_bound);
      double q = forward(critic_, in, &ctape)[0];
      stats.actor_loss -= q * inv_b;
      double one = 1.0;
      scratch_grads_.clear();
      std::vector<double> gin = backward(critic_, ctape, std::span(&one, 1), scratch_grads_);
      std::vector<double> gmu(action_dim_);
      for (int j = 0; j < action_dim_; ++j)
        gmu[j] = -gin[state_dim_ + j] * cfg_.a_bound * inv_b;
      backward(actor_, atape, gmu, actor_grads_);
    }
    adam_step(actor_, actor_grads_, actor_adam_);

    soft_update(critic_target_, critic_, cfg_.tau);
    soft_update(actor_target_, actor_, cfg_.tau);
    return stats;
  }

  // Samples a batch (uniform with replacement) and runs one update.
  // Callers must not invoke before ready_to_train().
  TrainStats train_step() {
    if (!ready_to_train())
      throw std::logic_error("train_step: replay size below threshold");
    std::vector<long> idx = replay_.sample_indices(cfg_.batch_size, replay_rng_);
    std::vector<const Transition*> batch(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) batch[i] = &replay_.at(idx[i]);
    return train_on(batch);
  }

  // Mutable network access (tests, targeted inspection).
  DenseNet& actor() { return actor_; }
  DenseNet& critic() { return critic_; }
  DenseNet& actor_target() { return actor_target_; }
  DenseNet& critic_target() { return critic_target_; }
  const DenseNet& actor() const { return actor_; }
  const DenseNet& critic() const { return critic_; }
  const DenseNet& actor_target() const { return actor_target_; }
  const DenseNet& critic_target() const { return critic_target_; }

 private:
  void resize_grads() {
    actor_grads_ = Gradients::zeros_like(actor_);
    critic_grads_ = Gradients::zeros_like(critic_);
    scratch_grads_ = Gradients::zeros_like(critic_);
  }

  DdpgConfig cfg_;
  int state_dim_;
  int action_dim_;
  DenseNet actor_, critic_, actor_target_, critic_target_;
  AdamState actor_adam_, critic_adam_;
  ReplayBuffer replay_;
  OuNoise noise_;
  std::uint64_t seed_;
  long episode_ = -1;
  RngStream ou_rng_;
  RngStream replay_rng_;
  Gradients critic_grads_ = {};
  Gradients actor_grads_ = {};
  Gradients scratch_grads_ = {};
};

// Per-step training record; losses are absent until the replay threshold is
// crossed, the delay is absent when the slot delivered nothing.
struct StepRecord {
  long step = 0;     // global, 1-based
  long episode = 0;  // 1-based
  double reward = 0.0;
  std::optional<double> critic_loss;
  std::optional<double> actor_loss;
  std::optional<double> mean_delay_ms;
  long delivered = 0;
  long dropped = 0;
};

struct TrainOptions {
  long episodes = 1;
  long steps_per_episode = 100;
  long checkpoint_every = 0;  // 0 disables periodic snapshots
  std::function<void(long step, const DdpgAgent&)> checkpoint_sink;
  std::function<void(const StepRecord&)> record_sink;
};

// The full training loop: per episode, reset the environment and noise,
// roll the noisy policy, store transitions, and update once per step after
// the replay threshold is crossed. Works with any environment exposing
// reset() -> StateVector and step(span<const double>) -> StepResult.
template <typename EnvT>
void train(EnvT& env, DdpgAgent& agent, const TrainOptions& opt) {
  long step = 0;
  for (long ep = 1; ep <= opt.episodes; ++ep) {
    std::vector<double> state = env.reset();
    agent.begin_episode();
    for (long t = 1; t <= opt.steps_per_episode; ++t) {
      ++step;
      std::vector<double> action = agent.act_noisy(state);
      auto res = env.step(action);
      agent.observe({state, action, res.reward, res.next_state});

      StepRecord rec;
      rec.step = step;
      rec.episode = ep;
      rec.reward = res.reward;
      rec.delivered = res.metrics.delivered;
      rec.dropped = res.metrics.dropped;
      if (res.metrics.mean_delay_s) rec.mean_delay_ms = *res.metrics.mean_delay_s * 1e3;
      if (agent.ready_to_train()) {
        TrainStats ts = agent.train_step();
        rec.critic_loss = ts.critic_loss;
        rec.actor_loss = ts.actor_loss;
      }
      if (opt.record_sink) opt.record_sink(rec);
      if (opt.checkpoint_every > 0 && step % opt.checkpoint_every == 0 && opt.checkpoint_sink)
        opt.checkpoint_sink(step, agent);
      state = std::move(res.next_state);
    }
  }
}

}  // namespace netrl

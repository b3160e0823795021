#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netrl/baselines.hpp"
#include "netrl/config.hpp"
#include "netrl/ddpg.hpp"
#include "netrl/env.hpp"
#include "netrl/version.hpp"

// Experiment orchestration: training runs that persist metrics, manifests,
// and checkpoints; noise-free evaluation; and the three-policy comparison.
// All file output is byte-deterministic for a given config and seed (floats
// are printed with shortest round-trip formatting).

namespace netrl {

namespace exp_detail {

inline std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(std::optional<double> v) { return v ? fmt(*v) : std::string(); }

}  // namespace exp_detail

inline constexpr const char* kMetricsHeader =
    "step,episode,reward,critic_loss,actor_loss,mean_delay_ms,delivered,dropped";

struct TrainResult {
  long steps = 0;
  std::string metrics_path;
  std::string manifest_path;
  std::string final_checkpoint_path;
};

// Runs the full training loop for cfg.run.episodes x env.steps_per_episode
// steps, writing metrics.csv, manifest.json, periodic ckpt_<step>.bin files,
// and ckpt_final.bin into cfg.run.out_dir. Output files are opened up front
// so an unwritable directory fails before any training happens.
inline TrainResult run_train(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path out(cfg.run.out_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create output dir " + out.string() + ": " + ec.message());

  nlohmann::json manifest{
      {"code_version", kVersion}, {"seed", cfg.run.seed}, {"config", to_json(cfg)}};
  const std::string manifest_dump = manifest.dump(2) + "\n";

  TrainResult result;
  result.metrics_path = (out / "metrics.csv").string();
  result.manifest_path = (out / "manifest.json").string();
  result.final_checkpoint_path = (out / "ckpt_final.bin").string();

  std::ofstream manifest_os(result.manifest_path, std::ios::binary | std::ios::trunc);
  if (!manifest_os) throw std::runtime_error("cannot write " + result.manifest_path);
  manifest_os << manifest_dump;
  manifest_os.close();
  if (!manifest_os) throw std::runtime_error("failed writing " + result.manifest_path);

  std::ofstream csv(result.metrics_path, std::ios::binary | std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot write " + result.metrics_path);
  csv << kMetricsHeader << '\n';

  Env env = cfg.make_env();
  DdpgAgent agent(env.state_dim(), env.action_dim(), cfg.ddpg, cfg.run.seed);

  TrainOptions opt;
  opt.episodes = cfg.run.episodes;
  opt.steps_per_episode = cfg.env.steps_per_episode;
  opt.checkpoint_every = cfg.run.checkpoint_every;
  opt.record_sink = [&](const StepRecord& r) {
    using exp_detail::fmt;
    csv << r.step << ',' << r.episode << ',' << fmt(r.reward) << ',' << fmt(r.critic_loss)
        << ',' << fmt(r.actor_loss) << ',' << fmt(r.mean_delay_ms) << ',' << r.delivered
        << ',' << r.dropped << '\n';
    ++result.steps;
  };
  opt.checkpoint_sink = [&](long step, const DdpgAgent& a) {
    save_snapshot((out / ("ckpt_" + std::to_string(step) + ".bin")).string(),
                  a.snapshot(manifest_dump));
  };
  train(env, agent, opt);

  csv.close();
  if (!csv) throw std::runtime_error("failed writing " + result.metrics_path);
  save_snapshot(result.final_checkpoint_path, agent.snapshot(manifest_dump));
  return result;
}

struct EvalSummary {
  long episodes = 0;
  long slots = 0;
  std::vector<double> slot_delays_ms;          // per-slot means, delivered slots only
  std::vector<double> episode_mean_delay_ms;   // packet-weighted, one per episode
  long injected = 0;
  long delivered = 0;
  long dropped = 0;
  std::optional<double> mean_delay_ms;    // mean of slot_delays_ms
  std::optional<double> stddev_delay_ms;  // sample stddev of slot_delays_ms
  double drop_rate = 0.0;                 // dropped / injected
};

// Rolls a weight policy (state, episode, step) -> weights for
// cfg.run.eval_episodes episodes without exploration noise or learning.
// `mode` overrides the configured forwarding mode so shortest-path policies
// can be scored under single-path forwarding.
template <typename PolicyFn>
EvalSummary eval_policy(const ExperimentConfig& cfg, ForwardingMode mode, PolicyFn&& policy) {
  EnvConfig env_cfg = cfg.env;
  env_cfg.forwarding_mode = mode;
  env_cfg.seed = cfg.run.seed;
  Env env(cfg.build_topology(), cfg.flows, env_cfg);

  EvalSummary sum;
  for (long ep = 0; ep < cfg.run.eval_episodes; ++ep) {
    StateVector state = env.reset();
    double ep_delay_s = 0.0;
    long ep_delivered = 0;
    for (int t = 0; t < cfg.env.steps_per_episode; ++t) {
      std::vector<double> w = policy(std::span<const double>(state), ep, t);
      StepResult res = env.step(w);
      ++sum.slots;
      sum.delivered += res.metrics.delivered;
      sum.dropped += res.metrics.dropped;
      ep_delivered += res.metrics.delivered;
      ep_delay_s += res.metrics.sum_delay_s;
      if (res.metrics.mean_delay_s) sum.slot_delays_ms.push_back(*res.metrics.mean_delay_s * 1e3);
      state = std::move(res.next_state);
    }
    sum.episode_mean_delay_ms.push_back(ep_delivered > 0 ? ep_delay_s / ep_delivered * 1e3
                                                         : std::nan(""));
    sum.injected += env.sim().accounting().injected;
    ++sum.episodes;
  }
  if (!sum.slot_delays_ms.empty()) {
    double m = 0.0;
    for (double d : sum.slot_delays_ms) m += d;
    m /= static_cast<double>(sum.slot_delays_ms.size());
    sum.mean_delay_ms = m;
    if (sum.slot_delays_ms.size() > 1) {
      double ss = 0.0;
      for (double d : sum.slot_delays_ms) ss += (d - m) * (d - m);
      sum.stddev_delay_ms = std::sqrt(ss / static_cast<double>(sum.slot_delays_ms.size() - 1));
    } else {
      sum.stddev_delay_ms = 0.0;
    }
  }
  if (sum.injected > 0) sum.drop_rate = static_cast<double>(sum.dropped) / sum.injected;
  return sum;
}

inline DdpgAgent load_agent_for(const ExperimentConfig& cfg, const std::string& checkpoint_path) {
  AgentSnapshot snap = load_snapshot(checkpoint_path);
  Topology topo = cfg.build_topology();
  const int want_state = topo.node_count() * topo.node_count();
  const int want_action = topo.link_count();
  if (snap.actor.input_dim() != want_state || snap.actor.output_dim() != want_action)
    throw std::runtime_error(
        "checkpoint dimensions do not match config: expected state " +
        std::to_string(want_state) + " / action " + std::to_string(want_action) + ", found state " +
        std::to_string(snap.actor.input_dim()) + " / action " +
        std::to_string(snap.actor.output_dim()));
  return DdpgAgent::from_snapshot(snap, cfg.ddpg, cfg.run.seed);
}

// Noise-free evaluation of a trained agent under the configured forwarding
// mode.
inline EvalSummary run_eval(const ExperimentConfig& cfg, const std::string& checkpoint_path) {
  DdpgAgent agent = load_agent_for(cfg, checkpoint_path);
  return eval_policy(cfg, cfg.env.forwarding_mode,
                     [&](std::span<const double> state, long, long) { return agent.act(state); });
}

struct CompareRow {
  std::string policy;
  EvalSummary summary;
};

// Scores the trained agent against the shortest-path and random-weight
// baselines under identical traffic (same seed, same episode schedule).
// The shortest-path baseline always runs single-path; the others use the
// configured forwarding mode. Writes compare.csv into out_dir when not
// empty.
inline std::vector<CompareRow> run_compare(const ExperimentConfig& cfg,
                                           const std::string& checkpoint_path,
                                           const std::string& out_dir = "") {
  DdpgAgent agent = load_agent_for(cfg, checkpoint_path);
  Topology topo = cfg.build_topology();

  std::vector<CompareRow> rows;
  rows.push_back({"ddpg", eval_policy(cfg, cfg.env.forwarding_mode,
                                      [&](std::span<const double> state, long, long) {
                                        return agent.act(state);
                                      })});

  WeightAssignment ospf = ospf_weights(topo, cfg.baselines.ospf_reference_bw);
  rows.push_back({"ospf", eval_policy(cfg, ForwardingMode::single_path,
                                      [&](std::span<const double>, long, long) {
                                        return ospf.values;
                                      })});

  std::vector<double> random_current;
  long random_episode = -1;
  RngStream random_rng(cfg.run.seed, "baseline-random", 0);
  rows.push_back({"random", eval_policy(cfg, cfg.env.forwarding_mode,
                                        [&](std::span<const double>, long ep, long) {
                                          if (ep != random_episode) {
                                            random_episode = ep;
                                            random_rng = RngStream(
                                                cfg.run.seed, "baseline-random",
                                                static_cast<std::uint64_t>(ep));
                                            random_current.clear();
                                          }
                                          if (cfg.baselines.random_resample_every_step ||
                                              random_current.empty())
                                            random_current =
                                                random_weights(topo, random_rng, kMinLinkWeight,
                                                               cfg.ddpg.a_bound)
                                                    .values;
                                          return random_current;
                                        })});

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
      throw std::runtime_error("cannot create output dir " + out_dir + ": " + ec.message());
    const std::string path = (fs::path(out_dir) / "compare.csv").string();
    std::ofstream csv(path, std::ios::binary | std::ios::trunc);
    if (!csv) throw std::runtime_error("cannot write " + path);
    csv << "policy,mean_delay_ms,stddev_ms,drop_rate\n";
    for (const CompareRow& r : rows) {
      using exp_detail::fmt;
      csv << r.policy << ',' << fmt(r.summary.mean_delay_ms) << ','
          << fmt(r.summary.stddev_delay_ms) << ',' << fmt(r.summary.drop_rate) << '\n';
    }
    if (!csv) throw std::runtime_error("failed writing " + path);
  }
  return rows;
}

}  // namespace netrl

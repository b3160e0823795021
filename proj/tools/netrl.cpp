// Command-line front end: train a routing agent, evaluate a checkpoint, or
// compare it against the shortest-path and random-weight baselines.
//
//   netrl train   <config.json> [--seed S] [--out DIR] [--steps N] [--episodes N]
//   netrl eval    <config.json> <checkpoint> [flags]
//   netrl compare <config.json> <checkpoint> [flags]
//
// A run manifest (manifest.json from a previous run) is accepted wherever a
// config is, which reruns that experiment exactly.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "netrl/config.hpp"
#include "netrl/experiment.hpp"
#include "netrl/version.hpp"

namespace {

struct Overrides {
  long seed = -1;
  std::string out_dir;
  long steps = 0;
  long episodes = 0;
};

void add_common_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--seed", ov.seed, "Override the run seed");
  cmd->add_option("--out", ov.out_dir, "Override the output directory");
  cmd->add_option("--steps", ov.steps, "Override steps per episode");
  cmd->add_option("--episodes", ov.episodes,
                  "Override episode count (training episodes for train, evaluation episodes "
                  "for eval/compare)");
}

netrl::ExperimentConfig load_with(const std::string& path, const Overrides& ov, bool training) {
  netrl::ExperimentConfig cfg = netrl::load_config(path);
  if (ov.seed >= 0) {
    cfg.run.seed = static_cast<std::uint64_t>(ov.seed);
    cfg.env.seed = cfg.run.seed;
  }
  if (!ov.out_dir.empty()) cfg.run.out_dir = ov.out_dir;
  if (ov.steps > 0) cfg.env.steps_per_episode = static_cast<int>(ov.steps);
  if (ov.episodes > 0) {
    if (training)
      cfg.run.episodes = ov.episodes;
    else
      cfg.run.eval_episodes = ov.episodes;
  }
  return cfg;
}

void print_summary(const netrl::EvalSummary& s) {
  std::printf("episodes:   %ld\n", s.episodes);
  std::printf("slots:      %ld (%zu with deliveries)\n", s.slots, s.slot_delays_ms.size());
  if (s.mean_delay_ms)
    std::printf("mean delay: %.4f ms (stddev %.4f)\n", *s.mean_delay_ms, *s.stddev_delay_ms);
  else
    std::printf("mean delay: n/a (nothing delivered)\n");
  std::printf("packets:    %ld injected, %ld delivered, %ld dropped (drop rate %.6f)\n",
              s.injected, s.delivered, s.dropped, s.drop_rate);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packet-level routing simulator with a learned weight controller"};
  app.set_version_flag("--version", std::string(netrl::kVersion));
  app.require_subcommand(1);

  std::string config_path, checkpoint_path;
  Overrides ov;

  CLI::App* train = app.add_subcommand("train", "Train an agent and write metrics/checkpoints");
  train->add_option("config", config_path, "Experiment config (JSON)")->required();
  add_common_flags(train, ov);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint without exploration noise");
  eval->add_option("config", config_path, "Experiment config (JSON)")->required();
  eval->add_option("checkpoint", checkpoint_path, "Agent checkpoint file")->required();
  add_common_flags(eval, ov);

  CLI::App* compare =
      app.add_subcommand("compare", "Score a checkpoint against ospf and random baselines");
  compare->add_option("config", config_path, "Experiment config (JSON)")->required();
  compare->add_option("checkpoint", checkpoint_path, "Agent checkpoint file")->required();
  add_common_flags(compare, ov);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      netrl::ExperimentConfig cfg = load_with(config_path, ov, true);
      netrl::TrainResult res = netrl::run_train(cfg);
      std::printf("trained %ld steps\n", res.steps);
      std::printf("metrics:    %s\n", res.metrics_path.c_str());
      std::printf("manifest:   %s\n", res.manifest_path.c_str());
      std::printf("checkpoint: %s\n", res.final_checkpoint_path.c_str());
    } else if (eval->parsed()) {
      netrl::ExperimentConfig cfg = load_with(config_path, ov, false);
      netrl::EvalSummary s = netrl::run_eval(cfg, checkpoint_path);
      print_summary(s);
    } else if (compare->parsed()) {
      netrl::ExperimentConfig cfg = load_with(config_path, ov, false);
      std::string out_dir = ov.out_dir.empty() ? cfg.run.out_dir : ov.out_dir;
      auto rows = netrl::run_compare(cfg, checkpoint_path, out_dir);
      std::printf("%-8s %14s %12s %10s\n", "policy", "mean_delay_ms", "stddev_ms", "drop_rate");
      for (const auto& r : rows) {
        if (r.summary.mean_delay_ms)
          std::printf("%-8s %14.4f %12.4f %10.6f\n", r.policy.c_str(), *r.summary.mean_delay_ms,
                      *r.summary.stddev_delay_ms, r.summary.drop_rate);
        else
          std::printf("%-8s %14s %12s %10.6f\n", r.policy.c_str(), "n/a", "n/a",
                      r.summary.drop_rate);
      }
      std::printf("wrote %s\n", (std::filesystem::path(out_dir) / "compare.csv").string().c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

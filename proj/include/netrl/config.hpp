#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "netrl/ddpg.hpp"
#include "netrl/env.hpp"
#include "netrl/simkernel.hpp"
#include "netrl/topology.hpp"

// Experiment configuration: one JSON file holds the topology, the traffic,
// the environment and agent hyperparameters, and the run controls. Parsing
// is strict: unknown keys are errors (named with their full path), known
// keys are type-checked, omitted keys take documented defaults. A run
// manifest (which wraps the resolved config under a top-level "config" key)
// is accepted wherever a config is, so a finished run's manifest can be fed
// straight back in to reproduce it.

namespace netrl {

struct RunConfig {
  long episodes = 1;
  long eval_episodes = 5;
  long checkpoint_every = 0;  // steps; 0 disables periodic checkpoints
  std::string out_dir = "runs/out";
  std::uint64_t seed = 1;
};

struct BaselineConfig {
  double ospf_reference_bw = 0.0;  // 0 -> fastest link in the topology
  bool random_resample_every_step = true;
};

struct ExperimentConfig {
  int nodes = 0;
  std::vector<LinkSpec> links;
  std::vector<FlowSpec> flows;
  EnvConfig env;
  DdpgConfig ddpg;
  RunConfig run;
  BaselineConfig baselines;

  Topology build_topology() const { return Topology::build(nodes, links); }
  Env make_env() const { return Env(build_topology(), flows, env); }
};

namespace cfg_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& what) {
  throw std::invalid_argument("config: " + what);
}

inline std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail("\"" + path + "\" must be an object");
}

// Rejects any key not in `allowed`, naming the full path.
inline void check_keys(const json& obj, const std::string& prefix,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known) fail("unknown key \"" + join(prefix, item.key()) + "\"");
  }
}

inline double get_number(const json& obj, const std::string& prefix, const char* key,
                         double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail("\"" + join(prefix, key) + "\" must be a number");
  return v.get<double>();
}

inline double require_number(const json& obj, const std::string& prefix, const char* key) {
  if (!obj.contains(key)) fail("missing key \"" + join(prefix, key) + "\"");
  return get_number(obj, prefix, key, 0.0);
}

inline long get_integer(const json& obj, const std::string& prefix, const char* key,
                        long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail("\"" + join(prefix, key) + "\" must be an integer");
  return v.get<long>();
}

inline long require_integer(const json& obj, const std::string& prefix, const char* key) {
  if (!obj.contains(key)) fail("missing key \"" + join(prefix, key) + "\"");
  return get_integer(obj, prefix, key, 0);
}

inline bool get_bool(const json& obj, const std::string& prefix, const char* key,
                     bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail("\"" + join(prefix, key) + "\" must be a boolean");
  return v.get<bool>();
}

inline std::string get_string(const json& obj, const std::string& prefix, const char* key,
                              const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail("\"" + join(prefix, key) + "\" must be a string");
  return v.get<std::string>();
}

inline std::vector<int> get_int_list(const json& obj, const std::string& prefix,
                                     const char* key, std::vector<int> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) fail("\"" + join(prefix, key) + "\" must be an array of integers");
  std::vector<int> out;
  for (const json& e : v) {
    if (!e.is_number_integer()) fail("\"" + join(prefix, key) + "\" must be an array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

inline ArrivalModel parse_arrival(const std::string& s, const std::string& path) {
  if (s == "poisson") return ArrivalModel::poisson;
  if (s == "cbr") return ArrivalModel::cbr;
  fail("\"" + path + "\" must be \"poisson\" or \"cbr\"");
}

inline ForwardingMode parse_mode(const std::string& s, const std::string& path) {
  if (s == "weighted_multipath") return ForwardingMode::weighted_multipath;
  if (s == "single_path") return ForwardingMode::single_path;
  fail("\"" + path + "\" must be \"weighted_multipath\" or \"single_path\"");
}

}  // namespace cfg_detail

inline ExperimentConfig config_from_json(const nlohmann::json& root) {
  using namespace cfg_detail;
  const json* top = &root;
  expect_object(*top, "<root>");
  // A manifest wraps the config; descend into it.
  if (top->contains("config")) {
    top = &top->at("config");
    expect_object(*top, "config");
  }
  const json& j = *top;
  check_keys(j, "", {"topology", "flows", "env", "ddpg", "run", "baselines"});

  ExperimentConfig cfg;

  if (!j.contains("topology")) fail("missing key \"topology\"");
  const json& jt = j.at("topology");
  expect_object(jt, "topology");
  check_keys(jt, "topology", {"nodes", "links"});
  cfg.nodes = static_cast<int>(require_integer(jt, "topology", "nodes"));
  if (!jt.contains("links")) fail("missing key \"topology.links\"");
  const json& jl = jt.at("links");
  if (!jl.is_array()) fail("\"topology.links\" must be an array");
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string p = "topology.links[" + std::to_string(i) + "]";
    const json& e = jl[i];
    expect_object(e, p);
    check_keys(e, p, {"src", "dst", "bandwidth_bps", "prop_delay_s", "queue_capacity"});
    LinkSpec l;
    l.src = static_cast<int>(require_integer(e, p, "src"));
    l.dst = static_cast<int>(require_integer(e, p, "dst"));
    l.bandwidth_bps = get_number(e, p, "bandwidth_bps", l.bandwidth_bps);
    l.prop_delay_s = get_number(e, p, "prop_delay_s", l.prop_delay_s);
    l.queue_capacity = static_cast<int>(get_integer(e, p, "queue_capacity", l.queue_capacity));
    cfg.links.push_back(l);
  }

  if (j.contains("flows")) {
    const json& jf = j.at("flows");
    if (!jf.is_array()) fail("\"flows\" must be an array");
    for (std::size_t i = 0; i < jf.size(); ++i) {
      const std::string p = "flows[" + std::to_string(i) + "]";
      const json& e = jf[i];
      expect_object(e, p);
      check_keys(e, p,
                 {"src", "dst", "rate_bps", "packet_size_bytes", "arrival", "start_s", "stop_s"});
      FlowSpec f;
      f.src = static_cast<int>(require_integer(e, p, "src"));
      f.dst = static_cast<int>(require_integer(e, p, "dst"));
      f.rate_bps = require_number(e, p, "rate_bps");
      f.packet_size_bytes = static_cast<int>(get_integer(e, p, "packet_size_bytes", 1024));
      f.arrival = parse_arrival(get_string(e, p, "arrival", "poisson"), p + ".arrival");
      f.start_s = get_number(e, p, "start_s", 0.0);
      f.stop_s = get_number(e, p, "stop_s", f.stop_s);
      cfg.flows.push_back(f);
    }
  }

  if (j.contains("ddpg")) {
    const json& jd = j.at("ddpg");
    expect_object(jd, "ddpg");
    check_keys(jd, "ddpg",
               {"gamma", "tau", "actor_lr", "critic_lr", "replay_capacity", "replay_threshold",
                "batch_size", "a_bound", "ou_mu", "ou_theta", "ou_sigma", "actor_hidden",
                "critic_hidden"});
    DdpgConfig& d = cfg.ddpg;
    d.gamma = get_number(jd, "ddpg", "gamma", d.gamma);
    d.tau = get_number(jd, "ddpg", "tau", d.tau);
    d.actor_lr = get_number(jd, "ddpg", "actor_lr", d.actor_lr);
    d.critic_lr = get_number(jd, "ddpg", "critic_lr", d.critic_lr);
    d.replay_capacity = static_cast<int>(get_integer(jd, "ddpg", "replay_capacity", d.replay_capacity));
    d.replay_threshold = static_cast<int>(get_integer(jd, "ddpg", "replay_threshold", d.replay_threshold));
    d.batch_size = static_cast<int>(get_integer(jd, "ddpg", "batch_size", d.batch_size));
    d.a_bound = get_number(jd, "ddpg", "a_bound", d.a_bound);
    d.ou_mu = get_number(jd, "ddpg", "ou_mu", d.ou_mu);
    d.ou_theta = get_number(jd, "ddpg", "ou_theta", d.ou_theta);
    d.ou_sigma = get_number(jd, "ddpg", "ou_sigma", d.ou_sigma);
    d.actor_hidden = get_int_list(jd, "ddpg", "actor_hidden", d.actor_hidden);
    d.critic_hidden = get_int_list(jd, "ddpg", "critic_hidden", d.critic_hidden);
  }

  cfg.env.max_weight = cfg.ddpg.a_bound;  // clamp ceiling tracks the actor scale
  if (j.contains("env")) {
    const json& je = j.at("env");
    expect_object(je, "env");
    check_keys(je, "env",
               {"slot_duration_s", "steps_per_episode", "state_normalizer_bytes",
                "forwarding_mode", "max_weight", "delay_penalty_ms"});
    EnvConfig& e = cfg.env;
    e.slot_duration_s = get_number(je, "env", "slot_duration_s", e.slot_duration_s);
    e.steps_per_episode = static_cast<int>(get_integer(je, "env", "steps_per_episode", e.steps_per_episode));
    e.state_normalizer_bytes = get_number(je, "env", "state_normalizer_bytes", e.state_normalizer_bytes);
    e.forwarding_mode =
        parse_mode(get_string(je, "env", "forwarding_mode", "weighted_multipath"),
                   "env.forwarding_mode");
    e.max_weight = get_number(je, "env", "max_weight", e.max_weight);
    e.delay_penalty_ms = get_number(je, "env", "delay_penalty_ms", e.delay_penalty_ms);
  }

  if (j.contains("run")) {
    const json& jr = j.at("run");
    expect_object(jr, "run");
    check_keys(jr, "run", {"episodes", "eval_episodes", "checkpoint_every", "out_dir", "seed"});
    RunConfig& r = cfg.run;
    r.episodes = get_integer(jr, "run", "episodes", r.episodes);
    r.eval_episodes = get_integer(jr, "run", "eval_episodes", r.eval_episodes);
    r.checkpoint_every = get_integer(jr, "run", "checkpoint_every", r.checkpoint_every);
    r.out_dir = get_string(jr, "run", "out_dir", r.out_dir);
    long seed = get_integer(jr, "run", "seed", static_cast<long>(r.seed));
    if (seed < 0) fail("\"run.seed\" must be >= 0");
    r.seed = static_cast<std::uint64_t>(seed);
  }
  cfg.env.seed = cfg.run.seed;

  if (j.contains("baselines")) {
    const json& jb = j.at("baselines");
    expect_object(jb, "baselines");
    check_keys(jb, "baselines", {"ospf_reference_bw", "random_resample_every_step"});
    cfg.baselines.ospf_reference_bw =
        get_number(jb, "baselines", "ospf_reference_bw", cfg.baselines.ospf_reference_bw);
    cfg.baselines.random_resample_every_step = get_bool(
        jb, "baselines", "random_resample_every_step", cfg.baselines.random_resample_every_step);
  }

  // Semantic validation; topology/flow errors already name the culprit.
  if (cfg.run.episodes < 1) cfg_detail::fail("\"run.episodes\" must be >= 1");
  if (cfg.run.eval_episodes < 1) cfg_detail::fail("\"run.eval_episodes\" must be >= 1");
  if (cfg.run.checkpoint_every < 0) cfg_detail::fail("\"run.checkpoint_every\" must be >= 0");
  Topology topo = cfg.build_topology();
  for (const FlowSpec& f : cfg.flows) validate_flow(f, topo.node_count());
  validate_env_config(cfg.env);
  validate_ddpg_config(cfg.ddpg);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
  return config_from_json(j);
}

// Fully resolved echo: defaults applied, derived values (normalizer, clamp
// ceiling, seed) materialized. Feeding the result back through
// config_from_json yields an equivalent configuration.
inline nlohmann::json to_json(const ExperimentConfig& cfg) {
  using nlohmann::json;
  json jt;
  jt["nodes"] = cfg.nodes;
  json jlinks = json::array();
  for (const LinkSpec& l : cfg.links) {
    jlinks.push_back({{"src", l.src},
                      {"dst", l.dst},
                      {"bandwidth_bps", l.bandwidth_bps},
                      {"prop_delay_s", l.prop_delay_s},
                      {"queue_capacity", l.queue_capacity}});
  }
  jt["links"] = std::move(jlinks);

  json jflows = json::array();
  for (const FlowSpec& f : cfg.flows) {
    json e{{"src", f.src},
           {"dst", f.dst},
           {"rate_bps", f.rate_bps},
           {"packet_size_bytes", f.packet_size_bytes},
           {"arrival", f.arrival == ArrivalModel::cbr ? "cbr" : "poisson"},
           {"start_s", f.start_s}};
    if (std::isfinite(f.stop_s)) e["stop_s"] = f.stop_s;
    jflows.push_back(std::move(e));
  }

  json je{{"slot_duration_s", cfg.env.slot_duration_s},
          {"steps_per_episode", cfg.env.steps_per_episode},
          {"state_normalizer_bytes", resolve_normalizer(cfg.build_topology(), cfg.env)},
          {"forwarding_mode", cfg.env.forwarding_mode == ForwardingMode::single_path
                                  ? "single_path"
                                  : "weighted_multipath"},
          {"max_weight", cfg.env.max_weight},
          {"delay_penalty_ms", cfg.env.delay_penalty_ms}};

  const DdpgConfig& d = cfg.ddpg;
  json jd{{"gamma", d.gamma},
          {"tau", d.tau},
          {"actor_lr", d.actor_lr},
          {"critic_lr", d.critic_lr},
          {"replay_capacity", d.replay_capacity},
          {"replay_threshold", d.replay_threshold},
          {"batch_size", d.batch_size},
          {"a_bound", d.a_bound},
          {"ou_mu", d.ou_mu},
          {"ou_theta", d.ou_theta},
          {"ou_sigma", d.ou_sigma},
          {"actor_hidden", d.actor_hidden},
          {"critic_hidden", d.critic_hidden}};

  json jr{{"episodes", cfg.run.episodes},
          {"eval_episodes", cfg.run.eval_episodes},
          {"checkpoint_every", cfg.run.checkpoint_every},
          {"out_dir", cfg.run.out_dir},
          {"seed", cfg.run.seed}};

  json jb{{"ospf_reference_bw", cfg.baselines.ospf_reference_bw},
          {"random_resample_every_step", cfg.baselines.random_resample_every_step}};

  return json{{"topology", std::move(jt)}, {"flows", std::move(jflows)},
              {"env", std::move(je)},      {"ddpg", std::move(jd)},
              {"run", std::move(jr)},      {"baselines", std::move(jb)}};
}

}  // namespace netrl

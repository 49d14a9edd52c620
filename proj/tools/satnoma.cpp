// Command-line entry point: loads a JSON scenario config, runs training /
// evaluation / verification commands, and writes metrics.csv,
// config.resolved.json, checkpoints, and a run summary per seed.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "satnoma/satnoma.hpp"

namespace {

using namespace satnoma;
namespace fs = std::filesystem;

// SATNOMA_LOG: quiet | info (default) | debug
int log_level() {
  const char* v = std::getenv("SATNOMA_LOG");
  if (!v) return 1;
  const std::string s(v);
  if (s == "quiet") return 0;
  if (s == "debug") return 2;
  return 1;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<uint64_t> seeds;
  int episodes = -1;
  int steps = -1;
  bool sic = false;
  bool extended_obs = false;
  bool trace = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path,
                  "JSON scenario config (library defaults when omitted)");
  cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", o.seeds,
                  "run seed; repeat the flag to queue several sequential runs");
  cmd->add_option("--episodes", o.episodes, "override the episode count");
  cmd->add_option("--steps", o.steps, "override steps per episode");
  cmd->add_flag("--sic", o.sic, "successive interference cancellation in BS cells");
  cmd->add_flag("--extended-obs", o.extended_obs,
                "append each entity's previous efficiency value to its observation");
  cmd->add_flag("--trace", o.trace, "write a per-step trace.csv in each run dir");
}

NetworkConfig base_config(const CommonOpts& o) {
  return o.config_path.empty() ? NetworkConfig{} : load_config(o.config_path);
}

NetworkConfig resolve_config(const CommonOpts& o, uint64_t seed) {
  NetworkConfig cfg = base_config(o);
  cfg.seed = seed;
  if (o.episodes > 0) cfg.train.episodes = o.episodes;
  if (o.steps > 0) cfg.train.steps_per_episode = o.steps;
  if (o.sic) cfg.sic_mode = true;
  if (o.extended_obs) cfg.extended_obs = true;
  const ValidationResult v = validate_config(cfg);
  if (log_level() >= 1)
    for (const std::string& w : v.warnings) std::cerr << "warning: " << w << '\n';
  if (!v.ok()) {
    for (const std::string& e : v.errors)
      std::cerr << "error: invalid config: " << e << '\n';
    throw std::runtime_error("configuration rejected by validation");
  }
  return cfg;
}

std::vector<uint64_t> seed_list(const CommonOpts& o) {
  if (!o.seeds.empty()) return o.seeds;
  return {base_config(o).seed};
}

std::string prepare_run_dir(const std::string& out, uint64_t seed) {
  const fs::path dir = fs::path(out) / ("seed_" + std::to_string(seed));
  fs::create_directories(dir);
  return dir.string();
}

std::ofstream open_trace(const std::string& dir, ResourceEnv* renv, CacheEnv* cenv) {
  std::ofstream trace(dir + "/trace.csv", std::ios::binary | std::ios::trunc);
  trace << "step,agent,action,reward,indicator\n";
  if (renv) renv->set_trace(&trace);
  if (cenv) cenv->set_trace(&trace);
  return trace;
}

// Forwards rows to the CSV file and, at debug verbosity, mirrors them to
// stderr so long runs can be watched.
class TeeSink : public MetricsSink {
 public:
  TeeSink(MetricsSink& inner, bool debug) : inner_(inner), debug_(debug) {}
  void on_episode(const EpisodeStats& s) override {
    inner_.on_episode(s);
    if (debug_)
      std::cerr << "episode " << s.episode << " mean_reward " << s.mean_reward
                << " hit_rate " << s.hit_rate << " critic_loss " << s.critic_loss
                << " noise " << s.noise_scale << '\n';
  }

 private:
  MetricsSink& inner_;
  bool debug_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string pools_to_string(const std::vector<CachePool>& pools) {
  std::string s;
  for (std::size_t f = 0; f < pools.size(); ++f) {
    s += (f ? " " : "") + std::to_string(f) + "={";
    for (std::size_t i = 0; i < pools[f].files.size(); ++i)
      s += (i ? "," : "") + std::to_string(pools[f].files[i]);
    s += "}";
  }
  return s;
}

nlohmann::json frozen_policy_json(const RepairedActions& frozen,
                                  const std::string& source) {
  nlohmann::json j;
  j["frozen_policy"] = source;
  std::vector<int> assoc(frozen.assoc.num_users());
  for (int u = 0; u < frozen.assoc.num_users(); ++u)
    assoc[u] = frozen.assoc.facility_of(u);
  j["frozen_association"] = assoc;
  j["frozen_beta"] = frozen.beta.beta;
  return j;
}

int cmd_train_resource(const CommonOpts& o, bool single, bool independent) {
  const std::string name = single        ? "train-resource --single"
                           : independent ? "train-resource --independent"
                                         : "train-resource";
  for (uint64_t seed : seed_list(o)) {
    const NetworkConfig cfg = resolve_config(o, seed);
    const std::string dir = prepare_run_dir(o.out_dir, seed);
    write_resolved_config(dir, cfg);
    ResourceEnv env(cfg);
    std::ofstream trace;
    if (o.trace) trace = open_trace(dir, &env, nullptr);
    CsvMetricsSink csv(dir + "/metrics.csv");
    TeeSink sink(csv, log_level() >= 2);
    const auto t0 = std::chrono::steady_clock::now();
    const TrainResult res =
        single ? train_loop(env, cfg.train, seed, 1, &sink)
        : independent
            ? train_loop(env, cfg.train, seed, env.n_entities(), &sink,
                         CriticScope::local)
            : train_resource(env, cfg.train, seed, &sink);
    const double secs = seconds_since(t0);
    write_checkpoint(dir, cfg, name, seed, res);
    write_run_summary(dir, name, seed, res.log, res.env_violations, secs);
    if (log_level() >= 1)
      std::cout << name << " seed " << seed << ": " << res.log.size()
                << " episodes, final-window mean reward "
                << format_double(final_window_mean_reward(res.log, 100))
                << ", violations " << res.env_violations << " (" << secs << " s)\n";
  }
  return 0;
}

// The frozen stage-one policy the cache stage trains against: either the
// built-in distance/beam heuristic or the actors of a finished
// train-resource run.
RepairedActions frozen_association(const NetworkConfig& cfg,
                                   const std::string& resource_ckpt, uint64_t seed,
                                   std::string* source) {
  if (resource_ckpt.empty()) {
    *source = "static";
    const Topology topo = generate_topology(cfg, cfg.seed);
    return static_resource_policy(cfg, topo);
  }
  *source = resource_ckpt;
  ResourceEnv renv(cfg);
  const std::vector<AgentBundle> agents = load_checkpoint_agents(
      resource_ckpt, renv.n_entities(), renv.obs_dim(), renv.action_dim(), cfg.train);
  return freeze_policy(renv, agents, cfg.train, seed);
}

int cmd_train_cache(const CommonOpts& o, const std::string& resource_ckpt) {
  for (uint64_t seed : seed_list(o)) {
    const NetworkConfig cfg = resolve_config(o, seed);
    const std::string dir = prepare_run_dir(o.out_dir, seed);
    write_resolved_config(dir, cfg);
    std::string source;
    const RepairedActions frozen = frozen_association(cfg, resource_ckpt, seed, &source);
    CacheEnv env(cfg, frozen.assoc, frozen.beta);
    std::ofstream trace;
    if (o.trace) trace = open_trace(dir, nullptr, &env);
    CsvMetricsSink csv(dir + "/metrics.csv");
    TeeSink sink(csv, log_level() >= 2);
    const auto t0 = std::chrono::steady_clock::now();
    const TrainResult res = train_cache(env, cfg.train, seed, &sink);
    const double secs = seconds_since(t0);
    write_checkpoint(dir, cfg, "train-cache", seed, res);
    write_run_summary(dir, "train-cache", seed, res.log, res.env_violations, secs,
                      frozen_policy_json(frozen, source));
    if (log_level() >= 1)
      std::cout << "train-cache seed " << seed << ": " << res.log.size()
                << " episodes, final-window hit rate "
                << format_double(final_window_hit_rate(res.log, 100))
                << ", violations " << res.env_violations << " (" << secs << " s)\n";
  }
  return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& stage, const std::string& policy,
             const std::string& ckpt, const std::string& resource_ckpt) {
  const std::string name = "eval " + stage + " " + policy;
  for (uint64_t seed : seed_list(o)) {
    const NetworkConfig cfg = resolve_config(o, seed);
    const std::string dir = prepare_run_dir(o.out_dir, seed);
    write_resolved_config(dir, cfg);
    std::vector<EpisodeStats> log;
    uint64_t violations = 0;
    nlohmann::json extra = nlohmann::json::object();
    const auto t0 = std::chrono::steady_clock::now();

    if (stage == "resource") {
      ResourceEnv env(cfg);
      std::ofstream trace;
      if (o.trace) trace = open_trace(dir, &env, nullptr);
      if (policy == "checkpoint") {
        if (ckpt.empty())
          throw std::runtime_error("--policy checkpoint requires --checkpoint <run dir>");
        const std::vector<AgentBundle> agents = load_checkpoint_agents(
            ckpt, env.n_entities(), env.obs_dim(), env.action_dim(), cfg.train);
        log = run_actor_policy(env, agents, cfg.train, seed);
      } else if (policy == "random") {
        log = run_random_resource(env, cfg.train, seed);
      } else if (policy == "static") {
        log = run_fixed_actions(env, static_resource_actions(cfg, env.topology()),
                                cfg.train, seed);
      } else {
        throw std::runtime_error("unknown resource policy: " + policy);
      }
      violations = env.violations();
    } else if (stage == "cache") {
      std::string source;
      const RepairedActions frozen = frozen_association(cfg, resource_ckpt, seed, &source);
      extra = frozen_policy_json(frozen, source);
      CacheEnv env(cfg, frozen.assoc, frozen.beta);
      std::ofstream trace;
      if (o.trace) trace = open_trace(dir, nullptr, &env);
      if (policy == "checkpoint") {
        if (ckpt.empty())
          throw std::runtime_error("--policy checkpoint requires --checkpoint <run dir>");
        const std::vector<AgentBundle> agents = load_checkpoint_agents(
            ckpt, env.n_entities(), env.obs_dim(), env.action_dim(), cfg.train);
        log = run_actor_policy(env, agents, cfg.train, seed);
      } else if (policy == "random") {
        log = run_random_cache(env, cfg.train, seed);
      } else if (policy == "greedy") {
        log = run_fixed_actions(env, greedy_cache_actions(cfg), cfg.train, seed);
      } else {
        throw std::runtime_error("unknown cache policy: " + policy);
      }
      violations = env.violations();
    } else {
      throw std::runtime_error("unknown eval stage: " + stage);
    }

    const double secs = seconds_since(t0);
    write_metrics_csv(dir + "/metrics.csv", log);
    write_run_summary(dir, name, seed, log, violations, secs, extra);
    if (log_level() >= 1)
      std::cout << name << " seed " << seed << ": mean reward "
                << format_double(final_window_mean_reward(log, 100)) << ", hit rate "
                << format_double(final_window_hit_rate(log, 100)) << ", violations "
                << violations << " (" << secs << " s)\n";
  }
  return 0;
}

int cmd_oracle_compare(const CommonOpts& o) {
  const uint64_t seed = seed_list(o).front();
  const NetworkConfig cfg = resolve_config(o, seed);
  const std::string dir = prepare_run_dir(o.out_dir, seed);
  write_resolved_config(dir, cfg);

  const Topology topo = generate_topology(cfg, cfg.seed);
  const RepairedActions frozen = static_resource_policy(cfg, topo);
  const ExpectedCacheValue value(cfg, topo, frozen.assoc, frozen.beta, cfg.seed);

  const CacheOracleResult oracle = exhaustive_cache_oracle(
      cfg, [&](const std::vector<CachePool>& pools) {
        return value.expected_hit_rate(pools);
      });
  const std::vector<CachePool> greedy = default_pools(cfg);
  const bool greedy_match = [&] {
    for (std::size_t f = 0; f < greedy.size(); ++f)
      if (greedy[f].files != oracle.pools[f].files) return false;
    return true;
  }();

  CacheEnv env(cfg, frozen.assoc, frozen.beta);
  CsvMetricsSink csv(dir + "/metrics.csv");
  TeeSink sink(csv, log_level() >= 2);
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult res = train_cache(env, cfg.train, seed, &sink);

  TrainConfig one = cfg.train;
  one.episodes = 1;
  run_actor_policy(env, res.agents, one, seed);
  const std::vector<CachePool> learned = env.last_state().pools;
  const double secs = seconds_since(t0);

  const double oracle_hit = oracle.value;
  const double oracle_obj = value.expected_objective(oracle.pools);
  const double learned_hit = value.expected_hit_rate(learned);
  const double learned_obj = value.expected_objective(learned);

  std::cout << "oracle expected hit rate: " << format_double(oracle_hit) << '\n'
            << "oracle expected objective: " << format_double(oracle_obj) << '\n'
            << "oracle pools: " << pools_to_string(oracle.pools) << '\n'
            << "greedy-popularity matches oracle: " << (greedy_match ? "yes" : "no")
            << '\n'
            << "learned expected hit rate: " << format_double(learned_hit) << '\n'
            << "learned expected objective: " << format_double(learned_obj) << '\n'
            << "learned pools: " << pools_to_string(learned) << '\n'
            << "hit rate gap (oracle - learned): "
            << format_double(oracle_hit - learned_hit) << '\n'
            << "placements evaluated: " << oracle.evaluated << '\n';

  nlohmann::json extra;
  extra["oracle_hit_rate"] = oracle_hit;
  extra["oracle_objective"] = oracle_obj;
  extra["learned_hit_rate"] = learned_hit;
  extra["learned_objective"] = learned_obj;
  extra["hit_rate_gap"] = oracle_hit - learned_hit;
  extra["greedy_matches_oracle"] = greedy_match;
  extra["placements_evaluated"] = oracle.evaluated;
  write_checkpoint(dir, cfg, "oracle-compare", seed, res);
  write_run_summary(dir, "oracle-compare", seed, res.log, res.env_violations, secs,
                    extra);
  return 0;
}

int cmd_gradcheck(const CommonOpts& o) {
  const uint64_t seed = seed_list(o).front();
  const NetworkConfig cfg = resolve_config(o, seed);
  const int h1 = cfg.train.hidden1, h2 = cfg.train.hidden2;
  const int od = cfg.extended_obs ? 2 : 1;
  const int n = cfg.num_users(), nf = cfg.num_facilities();
  const int ad_res = nf + 1, ad_cache = cfg.library_size;

  struct Shape {
    const char* name;
    std::vector<int> sizes;
  };
  const std::vector<Shape> shapes = {
      {"association-power actor", {od, h1, h2, ad_res}},
      {"association-power critic", {n * od + n * ad_res, h1, h2, 1}},
      {"cache actor", {od, h1, h2, ad_cache}},
      {"cache critic", {nf * od + nf * ad_cache, h1, h2, 1}},
  };
  const std::vector<Activation> acts = {Activation::relu, Activation::relu,
                                        Activation::identity};
  constexpr double kTol = 1e-4;
  int fails = 0;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    Rng rng(mix_seed(cfg.seed, 0x6C0 + i));
    const DenseNet net = DenseNet::make(shapes[i].sizes, acts, rng);
    const GradCheckResult r = gradcheck_net(net, rng);
    const bool ok = r.max_rel_err < kTol;
    fails += !ok;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << shapes[i].name << ": max rel err "
              << format_double(r.max_rel_err) << " over " << r.checked
              << " derivatives\n";
  }
  if (fails) std::cerr << "error: " << fails << " gradient check(s) failed\n";
  return fails ? 1 : 0;
}

int cmd_selfcheck() {
  int fails = 0;
  const auto report = [&](const char* name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name
              << (detail.empty() ? "" : ": " + detail) << '\n';
    if (!ok) ++fails;
  };

  {
    double worst = 0.0;
    for (int u : {1, 3, 40, 1000})
      for (double eps : {0.56, 0.83, 1.0}) {
        const ZipfPopularity pop = zipf_pmf(u, eps);
        const double sum =
            std::accumulate(pop.pmf.begin(), pop.pmf.end(), 0.0);
        worst = std::max(worst, std::fabs(sum - 1.0));
      }
    report("popularity normalization", worst < 1e-12,
           "max |sum - 1| = " + format_double(worst));
  }
  {
    const double g0 = sat_beam_gain(0.0, 0.07, 1000.0);
    const double g1 = sat_beam_gain(1e-12, 0.07, 1000.0);
    const double err =
        std::max(std::fabs(g0 - 1000.0), std::fabs(g1 - 1000.0)) / 1000.0;
    report("boresight beam gain", err < 1e-6, "rel err = " + format_double(err));
  }
  {
    Rng rng(42);
    const DenseNet a = DenseNet::make(
        {5, 8, 7, 3},
        {Activation::relu, Activation::tanh_, Activation::identity}, rng);
    const DenseNet b =
        DenseNet::make({4, 6, 2}, {Activation::sigmoid, Activation::identity}, rng);
    const double worst = std::max(gradcheck_net(a, rng).max_rel_err,
                                  gradcheck_net(b, rng).max_rel_err);
    report("gradient check", worst < 1e-4, "max rel err = " + format_double(worst));
  }
  {
    ReplayBuffer buf(3);
    for (int i = 0; i < 5; ++i) {
      Transition t;
      t.obs = {0.0};
      t.actions = {0.0};
      t.rewards = {static_cast<double>(i)};
      t.next_obs = {0.0};
      buf.push(std::move(t));
    }
    Rng rng(7);
    const auto sample = buf.sample(3, rng);
    double sum = 0.0;
    for (const Transition* t : sample) sum += t->rewards[0];
    report("replay buffer FIFO eviction", buf.size() == 3 && sum == 2.0 + 3.0 + 4.0,
           "kept rewards sum = " + format_double(sum));
  }
  {
    NetworkConfig cfg;
    cfg.num_bs = 1;
    cfg.num_sat = 1;
    cfg.num_bs_users = 3;
    cfg.num_sat_users = 1;
    cfg.bs_capacity = 3;
    cfg.sat_capacity = 2;
    cfg.library_size = 5;
    cfg.bs_cache_capacity = 2;
    cfg.sat_cache_capacity = 2;
    cfg.train.episodes = 3;
    cfg.train.steps_per_episode = 5;
    const auto run = [&] {
      ResourceEnv env(cfg);
      return train_resource(env, cfg.train, 99, nullptr);
    };
    const TrainResult r1 = run(), r2 = run();
    bool equal = r1.log.size() == r2.log.size();
    for (std::size_t i = 0; equal && i < r1.log.size(); ++i)
      equal = format_metrics_row(r1.log[i]) == format_metrics_row(r2.log[i]);
    report("training determinism", equal,
           equal ? "3 episodes byte-identical" : "episode rows differ");
  }
  return fails;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Terrestrial-satellite NOMA downlink simulator with edge caching and "
      "multi-agent actor-critic training"};
  app.require_subcommand(1);

  CommonOpts o;
  bool single = false, independent = false;
  std::string resource_ckpt, stage = "resource", policy, ckpt;

  CLI::App* tr = app.add_subcommand(
      "train-resource", "train per-user association/power agents");
  add_common(tr, o);
  auto* single_flag =
      tr->add_flag("--single", single, "one centralized agent over all users");
  tr->add_flag("--independent", independent,
               "per-user agents whose critics see only their own "
               "observation and action (no shared critic input)")
      ->excludes(single_flag);

  CLI::App* tcache = app.add_subcommand(
      "train-cache", "train per-facility cache agents against a frozen association");
  add_common(tcache, o);
  tcache->add_option("--resource-checkpoint", resource_ckpt,
                     "freeze the association from this train-resource run dir "
                     "(default: built-in heuristic)");

  CLI::App* ev = app.add_subcommand("eval", "run a policy without learning");
  add_common(ev, o);
  ev->add_option("--stage", stage, "resource|cache")->capture_default_str();
  ev->add_option("--policy", policy,
                 "resource: checkpoint|random|static; cache: checkpoint|random|greedy")
      ->required();
  ev->add_option("--checkpoint", ckpt,
                 "run directory holding checkpoint/ (for --policy checkpoint)");
  ev->add_option("--resource-checkpoint", resource_ckpt,
                 "association source for --stage cache");

  CLI::App* oc = app.add_subcommand(
      "oracle-compare", "trained cache placement vs exhaustive search optimum");
  add_common(oc, o);

  CLI::App* gc = app.add_subcommand(
      "gradcheck", "finite-difference audit of every training net shape");
  add_common(gc, o);

  CLI::App* sc = app.add_subcommand(
      "selfcheck",
      "fast invariant suite: popularity, beam gain, gradients, replay, determinism");

  try {
    app.parse(argc, argv);
    if (tr->parsed()) return cmd_train_resource(o, single, independent);
    if (tcache->parsed()) return cmd_train_cache(o, resource_ckpt);
    if (ev->parsed()) return cmd_eval(o, stage, policy, ckpt, resource_ckpt);
    if (oc->parsed()) return cmd_oracle_compare(o);
    if (gc->parsed()) return cmd_gradcheck(o);
    if (sc->parsed()) return cmd_selfcheck();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const satnoma::TrainingDiverged& e) {
    std::cerr << "error: training diverged: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

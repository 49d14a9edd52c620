// Acceptance gate: seven release criteria, one [PASS]/[FAIL] line each.
//
//   1  closed-form invariants (popularity normalization, beam boresight,
//      Bessel recurrence, phase-invariant SINR)           runtime bound 10 s
//   2  training numerics (gradient checks, Adam step size, one-batch overfit)
//   3  tiny-instance cache training vs the exhaustive oracle  bound 60 s
//   4  ordering of the learned association policy against the centralized
//      and random baselines, and growth of system efficiency with users
//   5  cache-capacity sweep: learned efficiency and hit rate non-decreasing,
//      full-library cache hits every request
//   6  zero constraint violations across every environment step above
//   7  byte-identical metrics files for identical config + seed
//
// Usage: satnoma_acceptance [criterion numbers...]   (default: all seven)
// Exit code: number of failed criteria.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "satnoma/satnoma.hpp"

using namespace satnoma;
namespace fs = std::filesystem;

namespace {

uint64_t g_env_violations = 0;  // accumulated over every env this binary runs
uint64_t g_env_steps = 0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return std::string(buf);
}

template <class Env>
void absorb(const Env& env, int steps_run) {
  g_env_violations += env.violations();
  g_env_steps += static_cast<uint64_t>(steps_run);
}

// Desk-scale scenario: three base stations plus one satellite, the given
// number of users per facility, a six-file library with three-file caches.
NetworkConfig desk_cfg(int users_per_facility) {
  NetworkConfig cfg;
  cfg.num_bs = 3;
  cfg.num_sat = 1;
  cfg.num_bs_users = 3 * users_per_facility;
  cfg.num_sat_users = users_per_facility;
  cfg.bs_capacity = users_per_facility;
  cfg.sat_capacity = users_per_facility;
  cfg.library_size = 6;
  cfg.bs_cache_capacity = 3;
  cfg.sat_cache_capacity = 3;
  cfg.train.episodes = 300;
  cfg.train.steps_per_episode = 100;
  return cfg;
}

// ---------------------------------------------------------------------------
// 1. Closed-form invariants.
// ---------------------------------------------------------------------------
Outcome criterion1() {
  const double t0 = now_seconds();

  double zipf_dev = 0.0;
  for (int u : {1, 3, 40, 1000}) {
    for (double eps : {0.56, 0.83, 1.0}) {
      const ZipfPopularity pop = zipf_pmf(u, eps);
      double sum = 0.0;
      for (double y : pop.pmf) sum += y;
      zipf_dev = std::max(zipf_dev, std::abs(sum - 1.0));
    }
  }

  double boresight_rel = 0.0;
  for (double theta : {1e-7, 1e-8, 1e-9}) {
    const double g = sat_beam_gain(theta, 0.07, 1000.0);
    boresight_rel = std::max(boresight_rel, std::abs(g - 1000.0) / 1000.0);
  }

  // Three-term recurrence J_{n+1}(x) = (2n/x) J_n(x) - J_{n-1}(x).
  double recurrence_res = 0.0;
  for (double x = 0.1; x <= 20.0 + 1e-9; x += 0.05) {
    const double j0 = bessel_j(0, x), j1 = bessel_j(1, x);
    const double j2 = bessel_j(2, x), j3 = bessel_j(3, x);
    recurrence_res = std::max(recurrence_res, std::abs(j2 - (2.0 / x) * j1 + j0));
    recurrence_res = std::max(recurrence_res, std::abs(j3 - (4.0 / x) * j2 + j1));
  }

  // The satellite phase parameter rotates complex coefficients but must not
  // move a single SINR bit: power gains are cached before the rotation.
  NetworkConfig cfg_a = desk_cfg(3);
  NetworkConfig cfg_b = cfg_a;
  cfg_b.doppler = 0.77;
  const Topology topo = generate_topology(cfg_a, cfg_a.seed);
  Rng ra(907), rb(907), rq(908);
  const ChannelRealization ch_a = realize_channels(cfg_a, topo, ra);
  const ChannelRealization ch_b = realize_channels(cfg_b, topo, rb);

  NetworkState st(cfg_a.num_users(), cfg_a.num_facilities());
  const RepairedActions fixed = static_resource_policy(cfg_a, topo);
  st.assoc = fixed.assoc;
  st.beta = fixed.beta;
  st.pools = default_pools(cfg_a);
  st.requests = sample_requests(zipf_pmf(cfg_a.library_size, cfg_a.zipf_exponent),
                                cfg_a.num_users(), rq);
  const LinkMetrics m_a = system_metrics(st, ch_a, cfg_a);
  const LinkMetrics m_b = system_metrics(st, ch_b, cfg_b);
  bool phase_exact = m_a.sinr.size() == m_b.sinr.size();
  for (std::size_t u = 0; phase_exact && u < m_a.sinr.size(); ++u)
    phase_exact = m_a.sinr[u] == m_b.sinr[u];

  const double elapsed = now_seconds() - t0;
  Outcome o;
  o.pass = zipf_dev < 1e-12 && boresight_rel < 1e-6 && recurrence_res < 1e-10 &&
           phase_exact && elapsed < 10.0;
  o.detail = fmt(
      "popularity dev %.2e (<1e-12), boresight rel %.2e (<1e-6), recurrence "
      "residual %.2e (<1e-10), phase-invariant SINR %s, %.1fs (<10s)",
      zipf_dev, boresight_rel, recurrence_res, phase_exact ? "bit-exact" : "BROKEN",
      elapsed);
  return o;
}

// ---------------------------------------------------------------------------
// 2. Training numerics.
// ---------------------------------------------------------------------------
Outcome criterion2() {
  Rng rng(2025);
  const std::vector<Activation> acts = {Activation::relu, Activation::relu,
                                        Activation::identity};

  // Every (actor, critic) shape instantiated by the runs in this binary:
  // per-user and centralized association agents at both population sizes,
  // and per-facility cache agents on the tiny and desk instances.
  std::set<std::vector<int>> shapes;
  const auto add = [&](int entities, int obs_dim, int act_dim, int groups) {
    const int per = entities / groups;
    shapes.insert({per * obs_dim, 64, 64, per * act_dim});
    shapes.insert({entities * (obs_dim + act_dim), 64, 64, 1});
  };
  add(12, 1, 5, 12);  // desk association, one agent per user
  add(12, 1, 5, 1);   // desk association, centralized
  add(20, 1, 5, 20);  // larger population
  add(1, 1, 5, 1);    // tiny cache instance (one facility, five files)
  add(4, 1, 6, 4);    // desk cache stage (four facilities, six files)

  double worst_grad = 0.0;
  int checked = 0;
  for (const std::vector<int>& s : shapes) {
    const DenseNet net = DenseNet::make(s, acts, rng);
    const GradCheckResult r = gradcheck_net(net, rng);
    worst_grad = std::max(worst_grad, r.max_rel_err);
    checked += r.checked;
  }

  // First optimizer step on a fresh moment state has magnitude lr (up to the
  // epsilon regularizer) regardless of the gradient's scale.
  TrainConfig tc;
  DenseNet scalar = DenseNet::make({1, 1}, {Activation::identity}, rng);
  AdamState opt(scalar, tc.lr);
  NetGrads grads(scalar);
  FwdCache cache;
  forward_cached(scalar, {1.0}, cache);
  backward(scalar, cache, {1.0}, &grads, nullptr);
  const double w0 = scalar.layers[0].w[0], b0 = scalar.layers[0].b[0];
  adam_step(scalar, grads, opt);
  const double dw = w0 - scalar.layers[0].w[0];
  const double db = b0 - scalar.layers[0].b[0];
  const double adam_err =
      std::max(std::abs(dw - tc.lr), std::abs(db - tc.lr));

  // A value head must be able to memorize one fixed minibatch quickly.
  TrainConfig otc;
  otc.discount = 0.0;
  Rng orng(56);
  AgentBundle agent = make_agent(0, 1, 1, 3, 2, otc, orng);
  std::vector<Transition> store;
  for (int i = 0; i < 10; ++i) {
    Transition t;
    t.obs.resize(3);
    t.next_obs.resize(3);
    t.actions.resize(2);
    t.rewards.resize(1);
    for (double& v : t.obs) v = orng.uniform(-1.0, 1.0);
    for (double& v : t.next_obs) v = orng.uniform(-1.0, 1.0);
    for (double& v : t.actions) v = orng.uniform(-1.0, 1.0);
    t.rewards[0] = orng.uniform(0.0, 1.0);
    store.push_back(t);
  }
  Minibatch batch;
  for (const Transition& t : store) batch.push_back(&t);
  const TargetActions tna = target_joint_actions({agent}, batch);
  UpdateWorkspace ws;
  const double initial = critic_update(agent, batch, tna, otc, ws);
  double final_loss = initial;
  for (int i = 1; i < 200; ++i) final_loss = critic_update(agent, batch, tna, otc, ws);

  Outcome o;
  o.pass = worst_grad < 1e-4 && adam_err < 1e-9 && final_loss < 0.01 * initial;
  o.detail = fmt(
      "gradient check %.2e over %d params in %zu shapes (<1e-4), first Adam "
      "step off by %.1e (<1e-9), one-batch value loss %.2e -> %.2e (<1%%)",
      worst_grad, checked, shapes.size(), adam_err, initial, final_loss);
  return o;
}

// ---------------------------------------------------------------------------
// 3. Tiny cache instance against the exhaustive oracle.
// ---------------------------------------------------------------------------
Outcome criterion3() {
  const double t0 = now_seconds();

  NetworkConfig cfg;
  cfg.num_bs = 1;
  cfg.num_sat = 0;
  cfg.num_bs_users = 3;
  cfg.num_sat_users = 0;
  cfg.bs_capacity = 3;
  cfg.area_side = 300.0;
  cfg.library_size = 5;
  cfg.bs_cache_capacity = 2;
  cfg.zipf_exponent = 1.0;
  cfg.train.episodes = 300;
  cfg.train.steps_per_episode = 40;

  const Topology topo = generate_topology(cfg, cfg.seed);
  const RepairedActions fixed = static_resource_policy(cfg, topo);

  CacheEnv train_env(cfg, fixed.assoc, fixed.beta);
  const TrainResult result = train_cache(train_env, cfg.train, 1);
  absorb(train_env, cfg.train.episodes * cfg.train.steps_per_episode);

  CacheEnv eval_env(cfg, fixed.assoc, fixed.beta);
  TrainConfig one = cfg.train;
  one.episodes = 1;
  run_actor_policy(eval_env, result.agents, one, 4242);
  absorb(eval_env, one.steps_per_episode);
  const std::vector<CachePool> learned = eval_env.last_state().pools;

  const ExpectedCacheValue value(cfg, topo, fixed.assoc, fixed.beta, cfg.seed);
  const CacheOracleResult oracle = exhaustive_cache_oracle(
      cfg,
      [&](const std::vector<CachePool>& p) { return value.expected_hit_rate(p); });
  const double learned_hr = value.expected_hit_rate(learned);

  const std::vector<CachePool> greedy_pools = {
      make_pool(cfg.bs_cache_capacity,
                top_k_files(greedy_cache_actions(cfg)[0].scores,
                            cfg.bs_cache_capacity))};
  const bool greedy_exact = greedy_pools[0].files == oracle.pools[0].files;

  std::string learned_files;
  for (int f : learned[0].files) learned_files += std::to_string(f) + " ";

  const double elapsed = now_seconds() - t0;
  Outcome o;
  o.pass = learned_hr >= oracle.value - 0.05 && greedy_exact && elapsed < 60.0;
  o.detail = fmt(
      "trained hit rate %.4f vs oracle %.4f over %llu placements (gap <= "
      "0.05), trained pool [ %s], greedy == oracle %s, %.1fs (<60s)",
      learned_hr, oracle.value,
      static_cast<unsigned long long>(oracle.evaluated), learned_files.c_str(),
      greedy_exact ? "yes" : "NO", elapsed);
  return o;
}

// ---------------------------------------------------------------------------
// 4. Learned association vs baselines, and efficiency growth with users.
// ---------------------------------------------------------------------------
Outcome criterion4() {
  const double t0 = now_seconds();
  const std::vector<uint64_t> seeds = {1, 2, 3};
  const NetworkConfig cfg12 = desk_cfg(3);
  const NetworkConfig cfg20 = desk_cfg(5);
  const int run_steps = cfg12.train.episodes * cfg12.train.steps_per_episode;

  double ee_multi = 0.0, ee_indep = 0.0, ee_single = 0.0, ee_random = 0.0,
         ee_large = 0.0;
  for (uint64_t seed : seeds) {
    ResourceEnv env_m(cfg12);
    const TrainResult rm = train_resource(env_m, cfg12.train, seed);
    absorb(env_m, run_steps);
    ee_multi += final_window_mean_reward(rm.log, 100);

    // Baseline: same per-user actors, but each critic sees only its own
    // observation and action (no shared critic input between users).
    ResourceEnv env_i(cfg12);
    const TrainResult ri = train_loop(env_i, cfg12.train, seed,
                                      env_i.n_entities(), nullptr,
                                      CriticScope::local);
    absorb(env_i, run_steps);
    ee_indep += final_window_mean_reward(ri.log, 100);

    // Reference only (not gated): one centralized agent over the joint
    // observation/action space.
    ResourceEnv env_s(cfg12);
    const TrainResult rs = train_loop(env_s, cfg12.train, seed, 1);
    absorb(env_s, run_steps);
    ee_single += final_window_mean_reward(rs.log, 100);

    ResourceEnv env_r(cfg12);
    const std::vector<EpisodeStats> rr = run_random_resource(env_r, cfg12.train, seed);
    absorb(env_r, run_steps);
    ee_random += final_window_mean_reward(rr, 100);

    ResourceEnv env_l(cfg20);
    const TrainResult rl = train_resource(env_l, cfg20.train, seed);
    absorb(env_l, cfg20.train.episodes * cfg20.train.steps_per_episode);
    ee_large += final_window_mean_reward(rl.log, 100);
  }
  const double n = static_cast<double>(seeds.size());
  ee_multi /= n;
  ee_indep /= n;
  ee_single /= n;
  ee_random /= n;
  ee_large /= n;

  const bool beats_indep = ee_multi >= 0.95 * ee_indep;
  const bool beats_random = ee_multi >= 1.2 * ee_random;
  const bool grows_with_users = ee_large > ee_multi;

  const double elapsed = now_seconds() - t0;
  Outcome o;
  o.pass = beats_indep && beats_random && grows_with_users;
  o.detail = fmt(
      "final-window EE over 3 seeds: shared-critic %.3f vs local-critic %.3f "
      "(>=0.95x %s) vs random %.3f (>=1.2x %s), centralized ref %.3f; 5 "
      "users/facility %.3f > 3 users/facility %.3f %s; %.0fs",
      ee_multi, ee_indep, beats_indep ? "ok" : "VIOLATED", ee_random,
      beats_random ? "ok" : "VIOLATED", ee_single, ee_large, ee_multi,
      grows_with_users ? "ok" : "VIOLATED", elapsed);
  return o;
}

// ---------------------------------------------------------------------------
// 5. Cache capacity sweep on the desk instance.
// ---------------------------------------------------------------------------
Outcome criterion5() {
  const double t0 = now_seconds();
  NetworkConfig base = desk_cfg(3);
  base.train.episodes = 200;
  base.train.steps_per_episode = 50;

  const Topology topo = generate_topology(base, base.seed);
  const RepairedActions fixed = static_resource_policy(base, topo);

  std::vector<double> hit(7, 0.0), ee(7, 0.0);
  double full_capacity_hit = -1.0;
  for (int cap = 1; cap <= 6; ++cap) {
    NetworkConfig cfg = base;
    cfg.bs_cache_capacity = cap;
    cfg.sat_cache_capacity = cap;

    CacheEnv train_env(cfg, fixed.assoc, fixed.beta);
    const TrainResult result = train_cache(train_env, cfg.train, 5);
    absorb(train_env, cfg.train.episodes * cfg.train.steps_per_episode);

    CacheEnv eval_env(cfg, fixed.assoc, fixed.beta);
    TrainConfig one = cfg.train;
    one.episodes = 1;
    const std::vector<EpisodeStats> rollout =
        run_actor_policy(eval_env, result.agents, one, 777);
    absorb(eval_env, one.steps_per_episode);

    const ExpectedCacheValue value(cfg, topo, fixed.assoc, fixed.beta, base.seed);
    hit[cap] = value.expected_hit_rate(eval_env.last_state().pools);
    ee[cap] = value.expected_objective(eval_env.last_state().pools);
    if (cap == 6) full_capacity_hit = rollout.back().hit_rate;
  }

  bool hit_monotone = true, ee_monotone = true;
  for (int cap = 1; cap < 6; ++cap) {
    hit_monotone = hit_monotone && hit[cap + 1] >= hit[cap] - 0.02;
    ee_monotone = ee_monotone && ee[cap + 1] >= ee[cap] * (1.0 - 0.02);
  }
  const bool full_exact = full_capacity_hit == 1.0;

  std::string curve;
  for (int cap = 1; cap <= 6; ++cap) curve += fmt("%.3f ", hit[cap]);

  const double elapsed = now_seconds() - t0;
  Outcome o;
  o.pass = hit_monotone && ee_monotone && full_exact;
  o.detail = fmt(
      "hit rate by capacity [ %s] %s, efficiency %.3f -> %.3f %s (tolerance "
      "0.02), full-library hit rate %.17g %s; %.0fs",
      curve.c_str(), hit_monotone ? "non-decreasing" : "NON-MONOTONE", ee[1],
      ee[6], ee_monotone ? "non-decreasing" : "NON-MONOTONE", full_capacity_hit,
      full_exact ? "== 1 exactly" : "NOT exactly 1", elapsed);
  return o;
}

// ---------------------------------------------------------------------------
// 6. Constraint soundness across everything this binary ran, plus a fuzz of
//    the repair path with hostile raw actions.
// ---------------------------------------------------------------------------
Outcome criterion6() {
  const NetworkConfig cfg = desk_cfg(3);
  Rng rng(661);

  ResourceEnv renv(cfg);
  int fuzz_steps = 0;
  for (int ep = 0; ep < 3; ++ep) {
    renv.reset(mix_seed(99, ep));
    for (int t = 0; t < cfg.train.steps_per_episode; ++t) {
      std::vector<std::vector<double>> raw(cfg.num_users());
      for (auto& row : raw) {
        row.resize(cfg.num_facilities() + 1);
        for (double& v : row) v = rng.uniform(-40.0, 40.0);
      }
      const StepResult res = renv.step_raw(raw);
      ++fuzz_steps;
      if (res.done) break;
    }
  }
  absorb(renv, fuzz_steps);

  const Topology topo = generate_topology(cfg, cfg.seed);
  const RepairedActions fixed = static_resource_policy(cfg, topo);
  CacheEnv cenv(cfg, fixed.assoc, fixed.beta);
  fuzz_steps = 0;
  for (int ep = 0; ep < 3; ++ep) {
    cenv.reset(mix_seed(77, ep));
    for (int t = 0; t < cfg.train.steps_per_episode; ++t) {
      std::vector<std::vector<double>> raw(cfg.num_facilities());
      for (auto& row : raw) {
        row.resize(cfg.library_size);
        for (double& v : row) v = rng.uniform(-5.0, 5.0);
      }
      const StepResult res = cenv.step_raw(raw);
      ++fuzz_steps;
      if (res.done) break;
    }
  }
  absorb(cenv, fuzz_steps);

  Outcome o;
  o.pass = g_env_violations == 0;
  o.detail = fmt(
      "%llu violations across %llu audited environment steps (capacity, "
      "power-factor range, cache size, file-id bounds checked each step)",
      static_cast<unsigned long long>(g_env_violations),
      static_cast<unsigned long long>(g_env_steps));
  return o;
}

// ---------------------------------------------------------------------------
// 7. Byte-identical metrics for identical config + seed.
// ---------------------------------------------------------------------------
Outcome criterion7() {
  NetworkConfig cfg = desk_cfg(3);
  cfg.train.episodes = 60;
  cfg.train.steps_per_episode = 30;

  const fs::path dir = fs::temp_directory_path() / "satnoma_acceptance";
  fs::create_directories(dir);
  const fs::path pa = dir / "metrics_a.csv", pb = dir / "metrics_b.csv";

  std::string state_a, state_b;
  {
    ResourceEnv env(cfg);
    CsvMetricsSink sink(pa.string());
    const TrainResult r = train_resource(env, cfg.train, 11, &sink);
    absorb(env, cfg.train.episodes * cfg.train.steps_per_episode);
    state_a = r.final_rng_state;
  }
  {
    ResourceEnv env(cfg);
    CsvMetricsSink sink(pb.string());
    const TrainResult r = train_resource(env, cfg.train, 11, &sink);
    absorb(env, cfg.train.episodes * cfg.train.steps_per_episode);
    state_b = r.final_rng_state;
  }

  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string bytes_a = slurp(pa), bytes_b = slurp(pb);

  Outcome o;
  o.pass = !bytes_a.empty() && bytes_a == bytes_b && state_a == state_b;
  o.detail = fmt(
      "two runs, same config and seed: %zu-byte metrics files %s, final RNG "
      "states %s",
      bytes_a.size(), bytes_a == bytes_b ? "identical" : "DIFFER",
      state_a == state_b ? "identical" : "DIFFER");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > 7) {
      std::fprintf(stderr, "usage: %s [criterion numbers 1-7]\n", argv[0]);
      return 64;
    }
    wanted.insert(k);
  }
  if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7};

  static const char* names[] = {
      "closed-form invariants",
      "training numerics",
      "tiny cache instance vs exhaustive oracle",
      "association policy vs baselines",
      "cache capacity sweep",
      "constraint soundness",
      "reproducibility",
  };
  Outcome (*runners[])() = {criterion1, criterion2, criterion3, criterion4,
                            criterion5, criterion6, criterion7};

  int failures = 0;
  for (int k : wanted) {
    const Outcome o = runners[k - 1]();
    std::printf("[%s] criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", k,
                names[k - 1], o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(wanted.size()) - failures,
              wanted.size());
  return failures;
}

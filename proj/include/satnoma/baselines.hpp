#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "satnoma/caching.hpp"
#include "satnoma/channel.hpp"
#include "satnoma/config.hpp"
#include "satnoma/environment.hpp"
#include "satnoma/link_metrics.hpp"
#include "satnoma/maddpg.hpp"
#include "satnoma/rng.hpp"
#include "satnoma/state.hpp"
#include "satnoma/topology.hpp"

namespace satnoma {

// ---------------------------------------------------------------------------
// Random baselines. Actions are redrawn once per episode and held across the
// slots of that episode, then passed through the same repair/decode path the
// learned policies use.
// ---------------------------------------------------------------------------

inline ResourceAction random_resource_action(int num_facilities, Rng& rng) {
  ResourceAction a;
  a.logits.assign(num_facilities, 0.0);
  a.logits[static_cast<int>(rng.below(static_cast<uint64_t>(num_facilities)))] = 1.0;
  a.beta = rng.uniform01();
  return a;
}

// Uniform distinct k-subset of {0,...,library-1} marked with score 1.
inline CacheAction random_cache_action(int library_size, int capacity, Rng& rng) {
  if (capacity > library_size)
    throw std::invalid_argument("random_cache_action: capacity exceeds library");
  CacheAction a;
  a.scores.assign(library_size, 0.0);
  for (int j = library_size - capacity; j < library_size; ++j) {
    const int t = static_cast<int>(rng.below(static_cast<uint64_t>(j) + 1));
    a.scores[a.scores[t] > 0.0 ? j : t] = 1.0;
  }
  return a;
}

inline std::vector<EpisodeStats> run_random_resource(ResourceEnv& env,
                                                     const TrainConfig& tc,
                                                     uint64_t seed) {
  Rng rng(mix_seed(seed, 0xBA5E11E5));
  std::vector<EpisodeStats> log;
  log.reserve(tc.episodes);
  const int n = env.n_entities();
  for (int ep = 0; ep < tc.episodes; ++ep) {
    env.reset(mix_seed(seed, 0xE9150000ULL + ep));
    std::vector<ResourceAction> acts(n);
    for (int u = 0; u < n; ++u)
      acts[u] = random_resource_action(env.config().num_facilities(), rng);
    EpisodeStats st;
    st.episode = ep;
    int steps = 0;
    for (int t = 0; t < tc.steps_per_episode; ++t) {
      const StepResult res = env.step(acts);
      st.mean_reward += res.info.objective;
      st.hit_rate += res.info.hit_rate;
      ++steps;
      if (res.done) break;
    }
    if (steps) {
      st.mean_reward /= steps;
      st.hit_rate /= steps;
    }
    log.push_back(st);
  }
  return log;
}

inline std::vector<EpisodeStats> run_random_cache(CacheEnv& env,
                                                  const TrainConfig& tc,
                                                  uint64_t seed) {
  Rng rng(mix_seed(seed, 0xBA5E11E5));
  std::vector<EpisodeStats> log;
  log.reserve(tc.episodes);
  const NetworkConfig& cfg = env.config();
  const int nf = env.n_entities();
  for (int ep = 0; ep < tc.episodes; ++ep) {
    env.reset(mix_seed(seed, 0xE9150000ULL + ep));
    std::vector<CacheAction> acts(nf);
    for (int f = 0; f < nf; ++f)
      acts[f] = random_cache_action(
          cfg.library_size, std::min(cache_capacity_of(cfg, f), cfg.library_size), rng);
    EpisodeStats st;
    st.episode = ep;
    int steps = 0;
    for (int t = 0; t < tc.steps_per_episode; ++t) {
      const StepResult res = env.step(acts);
      st.mean_reward += res.info.objective;
      st.hit_rate += res.info.hit_rate;
      ++steps;
      if (res.done) break;
    }
    if (steps) {
      st.mean_reward /= steps;
      st.hit_rate /= steps;
    }
    log.push_back(st);
  }
  return log;
}

// ---------------------------------------------------------------------------
// Fixed-action policies: the same decoded action every slot of every episode.
// ---------------------------------------------------------------------------

// One-hot encoding of the distance/beam heuristic association plus its power
// factors. Users the heuristic leaves unassociated point at facility 0 and
// rely on the admission repair to drop them again when it is full.
inline std::vector<ResourceAction> static_resource_actions(const NetworkConfig& cfg,
                                                           const Topology& topo) {
  const RepairedActions rep = static_resource_policy(cfg, topo);
  std::vector<ResourceAction> acts(cfg.num_users());
  for (int u = 0; u < cfg.num_users(); ++u) {
    acts[u].logits.assign(cfg.num_facilities(), 0.0);
    const int f = rep.assoc.facility_of(u);
    acts[u].logits[f < 0 ? 0 : f] = 1.0;
    acts[u].beta = rep.beta.beta[u];
  }
  return acts;
}

// Scores selecting the most popular files per facility, i.e. the greedy
// popularity placement {1, ..., capacity}.
inline std::vector<CacheAction> greedy_cache_actions(const NetworkConfig& cfg) {
  std::vector<CacheAction> acts(cfg.num_facilities());
  for (int f = 0; f < cfg.num_facilities(); ++f) {
    acts[f].scores.assign(cfg.library_size, 0.0);
    const int cap = std::min(cache_capacity_of(cfg, f), cfg.library_size);
    for (int i = 0; i < cap; ++i) acts[f].scores[i] = 1.0;
  }
  return acts;
}

template <class Env, class Action>
std::vector<EpisodeStats> run_fixed_actions(Env& env, const std::vector<Action>& acts,
                                            const TrainConfig& tc, uint64_t seed) {
  std::vector<EpisodeStats> log;
  log.reserve(tc.episodes);
  for (int ep = 0; ep < tc.episodes; ++ep) {
    env.reset(mix_seed(seed, 0xE9150000ULL + ep));
    EpisodeStats st;
    st.episode = ep;
    int steps = 0;
    for (int t = 0; t < tc.steps_per_episode; ++t) {
      const StepResult res = env.step(acts);
      st.mean_reward += res.info.objective;
      st.hit_rate += res.info.hit_rate;
      ++steps;
      if (res.done) break;
    }
    if (steps) {
      st.mean_reward /= steps;
      st.hit_rate /= steps;
    }
    log.push_back(st);
  }
  return log;
}

// ---------------------------------------------------------------------------
// Greedy evaluation of trained actors (exploration noise off, no updates).
// ---------------------------------------------------------------------------

template <class Env>
std::vector<EpisodeStats> run_actor_policy(Env& env,
                                           const std::vector<AgentBundle>& agents,
                                           const TrainConfig& tc, uint64_t seed) {
  const int e_total = env.n_entities();
  const int ad = env.action_dim();
  std::vector<EpisodeStats> log;
  log.reserve(tc.episodes);
  std::vector<std::vector<double>> raw(e_total);
  for (int ep = 0; ep < tc.episodes; ++ep) {
    std::vector<std::vector<double>> obs =
        env.reset(mix_seed(seed, 0xE9150000ULL + ep));
    EpisodeStats st;
    st.episode = ep;
    int steps = 0;
    for (int t = 0; t < tc.steps_per_episode; ++t) {
      for (const AgentBundle& a : agents) {
        std::vector<double> o;
        o.reserve(a.obs_in());
        for (int e = a.entity_lo; e < a.entity_hi; ++e)
          o.insert(o.end(), obs[e].begin(), obs[e].end());
        const std::vector<double> act = forward(a.actor, o);
        for (int e = a.entity_lo; e < a.entity_hi; ++e)
          raw[e].assign(act.begin() + (e - a.entity_lo) * ad,
                        act.begin() + (e - a.entity_lo + 1) * ad);
      }
      StepResult res = env.step_raw(raw);
      st.mean_reward += res.info.objective;
      st.hit_rate += res.info.hit_rate;
      obs = std::move(res.obs);
      ++steps;
      if (res.done) break;
    }
    if (steps) {
      st.mean_reward /= steps;
      st.hit_rate /= steps;
    }
    log.push_back(st);
  }
  return log;
}

// Runs the trained association/power actors greedily for one episode and
// returns the final slot's repaired association and power factors — the
// frozen stage-one policy that the cache stage trains against.
inline RepairedActions freeze_policy(ResourceEnv& env,
                                     const std::vector<AgentBundle>& agents,
                                     const TrainConfig& tc, uint64_t seed) {
  TrainConfig one = tc;
  one.episodes = 1;
  run_actor_policy(env, agents, one, seed);
  return RepairedActions{env.last_state().assoc, env.last_state().beta};
}

// ---------------------------------------------------------------------------
// Analytic cache placement value under a frozen association, frozen power
// factors, and one frozen channel realization. Requests are independent
// across users, so the expectation over the request draw is exact:
//   E[objective] = sum_u  P_hit(u) * EE_u(hit) + (1 - P_hit(u)) * EE_u(miss)
// with P_hit(u) the popularity mass of the serving facility's pool.
// ---------------------------------------------------------------------------
class ExpectedCacheValue {
 public:
  ExpectedCacheValue(const NetworkConfig& cfg, const Topology& topo,
                     AssociationMatrix assoc, PowerControlVector beta,
                     uint64_t channel_seed)
      : cfg_(cfg),
        assoc_(std::move(assoc)),
        beta_(std::move(beta)),
        pop_(zipf_pmf(cfg.library_size, cfg.zipf_exponent)) {
    Rng rng(mix_seed(channel_seed, 0xC4A11));
    const ChannelRealization ch = realize_channels(cfg_, topo, rng);
    ptx_ = user_powers(cfg_, assoc_, beta_);
    const int n = assoc_.num_users();
    rate_.assign(n, 0.0);
    for (int u = 0; u < n; ++u) {
      const int f = assoc_.facility_of(u);
      if (f < 0) continue;
      const double sinr =
          f < cfg_.num_bs ? bs_user_sinr(u, ch, assoc_, ptx_, cfg_, cfg_.sic_mode)
                          : sat_user_sinr(u, ch, assoc_, ptx_, cfg_);
      rate_[u] = link_rate(sinr);
    }
  }

  double pool_hit_prob(const CachePool& pool) const {
    double p = 0.0;
    for (int file : pool.files) p += pop_.pmf[file - 1];
    return p;
  }

  double expected_objective(const std::vector<CachePool>& pools) const {
    const int n = assoc_.num_users();
    double v = 0.0;
    for (int u = 0; u < n; ++u) {
      const int f = assoc_.facility_of(u);
      if (f < 0) continue;
      const Tier tier = tier_of(cfg_, f);
      const double ph = pool_hit_prob(pools.at(f));
      v += ph * energy_efficiency(tier, rate_[u], ptx_[u], 1, cfg_) +
           (1.0 - ph) * energy_efficiency(tier, rate_[u], ptx_[u], 0, cfg_);
    }
    return v;
  }

  // Expected fraction of users whose request is served from their facility's
  // cache; an unassociated user never hits, matching the slot metrics.
  double expected_hit_rate(const std::vector<CachePool>& pools) const {
    const int n = assoc_.num_users();
    double v = 0.0;
    for (int u = 0; u < n; ++u) {
      const int f = assoc_.facility_of(u);
      if (f >= 0) v += pool_hit_prob(pools.at(f));
    }
    return n ? v / n : 0.0;
  }

  const NetworkConfig& config() const { return cfg_; }
  const AssociationMatrix& association() const { return assoc_; }
  const std::vector<double>& rates() const { return rate_; }
  const std::vector<double>& powers() const { return ptx_; }

 private:
  NetworkConfig cfg_;
  AssociationMatrix assoc_;
  PowerControlVector beta_;
  ZipfPopularity pop_;
  std::vector<double> rate_, ptx_;
};

// ---------------------------------------------------------------------------
// Exhaustive cache placement search. Enumerates every per-facility
// combination of `capacity` files out of the library (joint across
// facilities), keeping the first maximizer in lexicographic enumeration
// order. Guarded so the joint search space stays brute-forceable.
// ---------------------------------------------------------------------------

inline constexpr uint64_t kMaxOracleCombinations = 1000000;

inline uint64_t n_choose_k(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    const uint64_t num = static_cast<uint64_t>(n - k + i);
    if (r > kMaxOracleCombinations * 2 / std::max<uint64_t>(num, 1))
      return kMaxOracleCombinations + 1;  // saturate: caller only guards a cap
    r = r * num / static_cast<uint64_t>(i);
  }
  return r;
}

namespace detail {

// All k-subsets of {1..n} in lexicographic order.
inline std::vector<std::vector<int>> all_combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i + 1;
  while (true) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i + 1) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

}  // namespace detail

struct CacheOracleResult {
  std::vector<CachePool> pools;
  double value = 0.0;
  uint64_t evaluated = 0;
};

template <class Eval>
CacheOracleResult exhaustive_cache_oracle(const NetworkConfig& cfg, Eval&& eval) {
  const int nf = cfg.num_facilities();
  uint64_t total = 1;
  std::vector<std::vector<std::vector<int>>> candidates(nf);
  for (int f = 0; f < nf; ++f) {
    const int cap = std::min(cache_capacity_of(cfg, f), cfg.library_size);
    const uint64_t c = n_choose_k(cfg.library_size, cap);
    if (c == 0 || total > kMaxOracleCombinations / c)
      throw std::invalid_argument(
          "exhaustive_cache_oracle: joint search space exceeds " +
          std::to_string(kMaxOracleCombinations) + " placements");
    total *= c;
    candidates[f] = detail::all_combinations(cfg.library_size, cap);
  }

  std::vector<std::size_t> idx(nf, 0);
  std::vector<CachePool> pools(nf);
  CacheOracleResult best;
  bool first = true;
  while (true) {
    for (int f = 0; f < nf; ++f) {
      const int cap = std::min(cache_capacity_of(cfg, f), cfg.library_size);
      pools[f] = make_pool(cap, candidates[f][idx[f]]);
    }
    const double v = eval(std::as_const(pools));
    ++best.evaluated;
    if (first || v > best.value) {
      best.value = v;
      best.pools = pools;
      first = false;
    }
    int f = nf - 1;
    while (f >= 0 && ++idx[f] == candidates[f].size()) {
      idx[f] = 0;
      --f;
    }
    if (f < 0) break;
  }
  return best;
}

}  // namespace satnoma

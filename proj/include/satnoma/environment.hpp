#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "satnoma/channel.hpp"
#include "satnoma/config.hpp"
#include "satnoma/link_metrics.hpp"
#include "satnoma/state.hpp"
#include "satnoma/topology.hpp"

namespace satnoma {

// One user's joint decision: a preference logit per facility (argmax picks
// the association request) and a power factor.
struct ResourceAction {
  std::vector<double> logits;
  double beta = 0.0;
};

// One facility's caching decision: a score per library file; the top
// cache-capacity scores become the installed set.
struct CacheAction {
  std::vector<double> scores;
};

struct StepInfo {
  double objective = 0.0;        // system EE this slot
  double hit_rate = 0.0;
  double delay_reward_sum = 0.0;
  uint64_t violations = 0;       // cumulative feasibility violations observed
};

struct StepResult {
  std::vector<std::vector<double>> obs;  // per entity
  std::vector<double> rewards;           // per entity
  bool done = false;
  StepInfo info;
};

struct RepairedActions {
  AssociationMatrix assoc;
  PowerControlVector beta;
};

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double clip01(double x) {
  if (!std::isfinite(x)) return 0.0;
  return std::clamp(x, 0.0, 1.0);
}

inline int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace detail

// Greedy admission repair: users are processed in ascending index order and
// keep their argmax facility while it has capacity left; once a facility is
// full, later users requesting it stay unassociated for the slot. Power
// factors are clipped into [0, 1]. Total: any action vector maps to a
// feasible (association, beta) pair.
inline RepairedActions repair_actions(const std::vector<ResourceAction>& actions,
                                      const NetworkConfig& cfg) {
  const int n = static_cast<int>(actions.size());
  const int nf = cfg.num_facilities();
  RepairedActions out{AssociationMatrix(n, nf), PowerControlVector{}};
  out.beta.beta.resize(n);
  for (int u = 0; u < n; ++u) {
    if (static_cast<int>(actions[u].logits.size()) != nf)
      throw std::invalid_argument("repair_actions: logit vector has wrong length");
    const int want = detail::argmax_lowest(actions[u].logits);
    if (out.assoc.column_count(want) < serve_capacity_of(cfg, want))
      out.assoc.assign(u, want);
    out.beta.beta[u] = detail::clip01(actions[u].beta);
  }
  return out;
}

// Decodes a score vector into a size-k file set: the k highest scores win,
// ties resolved toward the lower file index; the result is sorted ascending.
inline std::vector<int> top_k_files(const std::vector<double>& scores, int k) {
  const int u = static_cast<int>(scores.size());
  if (k < 0 || k > u) throw std::invalid_argument("top_k_files: k out of range");
  std::vector<int> order(u);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  std::vector<int> files(order.begin(), order.begin() + k);
  for (int& f : files) ++f;  // to 1-based ids
  std::sort(files.begin(), files.end());
  return files;
}

// Feasibility surface checked after every step: one facility per user, column
// loads within serve capacity, powers within the per-user share, power
// factors in [0, 1], cache pools within capacity and the library.
inline bool verify_constraints(const NetworkConfig& cfg, const AssociationMatrix& assoc,
                               const PowerControlVector& beta,
                               const std::vector<CachePool>& pools) {
  const int n = assoc.num_users();
  for (int u = 0; u < n; ++u) {
    if (assoc.row_sum(u) > 1) return false;
    const double b = beta.beta[u];
    if (!(b >= 0.0 && b <= 1.0)) return false;
    const int f = assoc.facility_of(u);
    if (f >= 0) {
      const double p = transmit_power(b, p_max_of(cfg, f), serve_capacity_of(cfg, f));
      if (p > p_max_of(cfg, f) / serve_capacity_of(cfg, f) + 1e-12) return false;
    }
  }
  for (int f = 0; f < cfg.num_facilities(); ++f) {
    if (assoc.column_count(f) > serve_capacity_of(cfg, f)) return false;
    const CachePool& pool = pools[f];
    if (static_cast<int>(pool.files.size()) > pool.capacity) return false;
    for (int file : pool.files)
      if (file < 1 || file > cfg.library_size) return false;
  }
  return true;
}

// Most-popular-prefix pools, one per facility (the default cache contents
// while association/power policies are being trained).
inline std::vector<CachePool> default_pools(const NetworkConfig& cfg) {
  std::vector<CachePool> pools;
  pools.reserve(cfg.num_facilities());
  for (int f = 0; f < cfg.num_facilities(); ++f) {
    const int cap = std::min(cache_capacity_of(cfg, f), cfg.library_size);
    std::vector<int> files(cap);
    std::iota(files.begin(), files.end(), 1);
    pools.push_back(make_pool(cache_capacity_of(cfg, f), std::move(files)));
  }
  return pools;
}

// Per-slot resource-allocation environment. One agent entity per user; every
// agent is rewarded with an equal share of the system energy-efficiency
// objective, so the agents optimize a common goal and the shares sum back to
// the logged objective. The observation stays personal: the 1-bit
// did-my-own-efficiency-improve indicator (optionally with the previous
// efficiency value appended). Fading and requests are redrawn every slot from
// the episode rng; topology and popularity stay fixed for the run.
class ResourceEnv {
 public:
  explicit ResourceEnv(const NetworkConfig& cfg)
      : cfg_(cfg),
        topo_(generate_topology(cfg, cfg.seed)),
        pop_(zipf_pmf(cfg.library_size, cfg.zipf_exponent)),
        pools_(default_pools(cfg)),
        rng_(cfg.seed),
        prev_ee_(cfg.num_users(), 0.0) {}

  int n_entities() const { return cfg_.num_users(); }
  int obs_dim() const { return cfg_.extended_obs ? 2 : 1; }
  int action_dim() const { return cfg_.num_facilities() + 1; }
  int episode_length() const { return cfg_.train.steps_per_episode; }

  const NetworkConfig& config() const { return cfg_; }
  const Topology& topology() const { return topo_; }
  const ZipfPopularity& popularity() const { return pop_; }
  const std::vector<CachePool>& pools() const { return pools_; }
  void set_pools(std::vector<CachePool> pools) {
    if (static_cast<int>(pools.size()) != cfg_.num_facilities())
      throw std::invalid_argument("set_pools: need one pool per facility");
    pools_ = std::move(pools);
  }

  uint64_t violations() const { return violations_; }
  void set_trace(std::ostream* sink) { trace_ = sink; }

  std::vector<std::vector<double>> reset(uint64_t seed) {
    rng_ = Rng(seed);
    t_ = 0;
    done_ = false;
    std::fill(prev_ee_.begin(), prev_ee_.end(), 0.0);
    return std::vector<std::vector<double>>(
        n_entities(), std::vector<double>(obs_dim(), 0.0));
  }

  StepResult step(const std::vector<ResourceAction>& actions) {
    if (done_) throw std::logic_error("ResourceEnv::step: episode already finished");
    if (static_cast<int>(actions.size()) != n_entities())
      throw std::invalid_argument("ResourceEnv::step: one action per user required");

    RepairedActions rep = repair_actions(actions, cfg_);
    last_state_.emplace(n_entities(), cfg_.num_facilities());
    last_state_->assoc = rep.assoc;
    last_state_->beta = rep.beta;
    last_state_->pools = pools_;

    last_channels_ = realize_channels(cfg_, topo_, rng_);
    last_state_->requests = sample_requests(pop_, n_entities(), rng_);
    last_metrics_ = system_metrics(*last_state_, last_channels_, cfg_);

    if (!verify_constraints(cfg_, rep.assoc, rep.beta, pools_)) ++violations_;

    StepResult res;
    res.rewards.assign(n_entities(),
                       last_metrics_.objective / static_cast<double>(n_entities()));
    res.obs.resize(n_entities());
    for (int u = 0; u < n_entities(); ++u) {
      const double ee = last_metrics_.ee[u];
      res.obs[u].push_back(ee >= prev_ee_[u] ? 1.0 : 0.0);
      if (cfg_.extended_obs) res.obs[u].push_back(ee);
      prev_ee_[u] = ee;
    }
    ++t_;
    done_ = t_ >= episode_length();
    res.done = done_;
    res.info = {last_metrics_.objective, last_metrics_.hit_rate,
                last_metrics_.delay_reward_sum, violations_};
    if (trace_) {
      for (int u = 0; u < n_entities(); ++u)
        *trace_ << t_ - 1 << ',' << u << ",f=" << rep.assoc.facility_of(u)
                << "|beta=" << rep.beta.beta[u] << ',' << res.rewards[u] << ','
                << res.obs[u][0] << '\n';
    }
    return res;
  }

  // Raw-vector entry point used by the trainers: per user, `action_dim`
  // values laid out as [facility logits..., beta channel]; the beta channel
  // passes through a sigmoid before the usual repair.
  StepResult step_raw(const std::vector<std::vector<double>>& raw) {
    std::vector<ResourceAction> actions(raw.size());
    for (std::size_t u = 0; u < raw.size(); ++u) {
      if (static_cast<int>(raw[u].size()) != action_dim())
        throw std::invalid_argument("ResourceEnv::step_raw: wrong action length");
      actions[u].logits.assign(raw[u].begin(), raw[u].end() - 1);
      actions[u].beta = detail::sigmoid(raw[u].back());
    }
    return step(actions);
  }

  // last-slot audit hooks (valid after a step)
  const NetworkState& last_state() const { return *last_state_; }
  const ChannelRealization& last_channels() const { return last_channels_; }
  const LinkMetrics& last_metrics() const { return last_metrics_; }

 private:
  NetworkConfig cfg_;
  Topology topo_;
  ZipfPopularity pop_;
  std::vector<CachePool> pools_;
  Rng rng_;
  std::vector<double> prev_ee_;
  std::optional<NetworkState> last_state_;
  ChannelRealization last_channels_;
  LinkMetrics last_metrics_;
  int t_ = 0;
  bool done_ = false;
  uint64_t violations_ = 0;
  std::ostream* trace_ = nullptr;
};

// Per-slot cache-placement environment. One agent entity per facility;
// association and power factors stay frozen (they come from a resource
// policy trained beforehand, or any fixed assignment); each step installs
// the decoded file sets, draws fresh fading and requests, and rewards each
// facility with the summed EE of the users it serves.
class CacheEnv {
 public:
  CacheEnv(const NetworkConfig& cfg, AssociationMatrix assoc, PowerControlVector beta)
      : cfg_(cfg),
        topo_(generate_topology(cfg, cfg.seed)),
        pop_(zipf_pmf(cfg.library_size, cfg.zipf_exponent)),
        assoc_(std::move(assoc)),
        beta_(std::move(beta)),
        rng_(cfg.seed),
        prev_reward_(cfg.num_facilities(), 0.0) {
    if (assoc_.num_users() != cfg.num_users() ||
        assoc_.num_facilities() != cfg.num_facilities() ||
        static_cast<int>(beta_.beta.size()) != cfg.num_users())
      throw std::invalid_argument("CacheEnv: frozen policy has wrong dimensions");
  }

  int n_entities() const { return cfg_.num_facilities(); }
  int obs_dim() const { return cfg_.extended_obs ? 2 : 1; }
  int action_dim() const { return cfg_.library_size; }
  int episode_length() const { return cfg_.train.steps_per_episode; }

  const NetworkConfig& config() const { return cfg_; }
  const Topology& topology() const { return topo_; }
  const ZipfPopularity& popularity() const { return pop_; }
  const AssociationMatrix& association() const { return assoc_; }
  const PowerControlVector& power_factors() const { return beta_; }

  uint64_t violations() const { return violations_; }
  void set_trace(std::ostream* sink) { trace_ = sink; }

  std::vector<std::vector<double>> reset(uint64_t seed) {
    rng_ = Rng(seed);
    t_ = 0;
    done_ = false;
    std::fill(prev_reward_.begin(), prev_reward_.end(), 0.0);
    return std::vector<std::vector<double>>(
        n_entities(), std::vector<double>(obs_dim(), 0.0));
  }

  StepResult step(const std::vector<CacheAction>& actions) {
    if (done_) throw std::logic_error("CacheEnv::step: episode already finished");
    if (static_cast<int>(actions.size()) != n_entities())
      throw std::invalid_argument("CacheEnv::step: one action per facility required");

    last_state_.emplace(cfg_.num_users(), cfg_.num_facilities());
    last_state_->assoc = assoc_;
    last_state_->beta = beta_;
    last_state_->pools.clear();
    for (int f = 0; f < n_entities(); ++f) {
      if (static_cast<int>(actions[f].scores.size()) != cfg_.library_size)
        throw std::invalid_argument("CacheEnv::step: score vector has wrong length");
      const int cap = std::min(cache_capacity_of(cfg_, f), cfg_.library_size);
      last_state_->pools.push_back(
          make_pool(cache_capacity_of(cfg_, f), top_k_files(actions[f].scores, cap)));
    }

    last_channels_ = realize_channels(cfg_, topo_, rng_);
    last_state_->requests = sample_requests(pop_, cfg_.num_users(), rng_);
    last_metrics_ = system_metrics(*last_state_, last_channels_, cfg_);

    if (!verify_constraints(cfg_, assoc_, beta_, last_state_->pools)) ++violations_;

    StepResult res;
    res.rewards = last_metrics_.facility_reward;
    res.obs.resize(n_entities());
    for (int f = 0; f < n_entities(); ++f) {
      const double r = res.rewards[f];
      res.obs[f].push_back(r >= prev_reward_[f] ? 1.0 : 0.0);
      if (cfg_.extended_obs) res.obs[f].push_back(r);
      prev_reward_[f] = r;
    }
    ++t_;
    done_ = t_ >= episode_length();
    res.done = done_;
    res.info = {last_metrics_.objective, last_metrics_.hit_rate,
                last_metrics_.delay_reward_sum, violations_};
    if (trace_) {
      for (int f = 0; f < n_entities(); ++f) {
        *trace_ << t_ - 1 << ',' << f << ",files=";
        const auto& files = last_state_->pools[f].files;
        for (std::size_t i = 0; i < files.size(); ++i)
          *trace_ << (i ? "|" : "") << files[i];
        *trace_ << ',' << res.rewards[f] << ',' << res.obs[f][0] << '\n';
      }
    }
    return res;
  }

  StepResult step_raw(const std::vector<std::vector<double>>& raw) {
    std::vector<CacheAction> actions(raw.size());
    for (std::size_t f = 0; f < raw.size(); ++f) actions[f].scores = raw[f];
    return step(actions);
  }

  const NetworkState& last_state() const { return *last_state_; }
  const ChannelRealization& last_channels() const { return last_channels_; }
  const LinkMetrics& last_metrics() const { return last_metrics_; }

 private:
  NetworkConfig cfg_;
  Topology topo_;
  ZipfPopularity pop_;
  AssociationMatrix assoc_;
  PowerControlVector beta_;
  Rng rng_;
  std::vector<double> prev_reward_;
  std::optional<NetworkState> last_state_;
  ChannelRealization last_channels_;
  LinkMetrics last_metrics_;
  int t_ = 0;
  bool done_ = false;
  uint64_t violations_ = 0;
  std::ostream* trace_ = nullptr;
};

// Deterministic non-learned resource policy: users (in index order) pick the
// unfilled facility with the strongest expected link — d^(-xi) pathloss for
// base stations, the geometric beam/free-space gain for satellites — scaled
// by that facility's per-user power share. Power factors are fixed at 0.5.
// Used to freeze an association for cache training and as an eval reference.
inline RepairedActions static_resource_policy(const NetworkConfig& cfg,
                                              const Topology& topo) {
  const int n = cfg.num_users();
  const int nf = cfg.num_facilities();
  RepairedActions out{AssociationMatrix(n, nf), PowerControlVector{}};
  out.beta.beta.assign(n, 0.5);
  for (int u = 0; u < n; ++u) {
    int best = -1;
    double best_metric = -1.0;
    for (int f = 0; f < nf; ++f) {
      if (out.assoc.column_count(f) >= serve_capacity_of(cfg, f)) continue;
      double gain;
      if (tier_of(cfg, f) == Tier::bs) {
        gain = std::pow(topo.bs_distance(u, f, cfg.num_bs), -cfg.pathloss_exponent);
      } else {
        const int k = f - cfg.num_bs;
        const std::size_t idx = static_cast<std::size_t>(u) * cfg.num_sat + k;
        gain = sat_link_coeff(cfg, topo.dist_sat[idx], topo.theta_sat[idx]).gain;
      }
      const double metric = gain * p_max_of(cfg, f) / serve_capacity_of(cfg, f);
      if (metric > best_metric) {
        best_metric = metric;
        best = f;
      }
    }
    if (best >= 0) out.assoc.assign(u, best);
  }
  return out;
}

}  // namespace satnoma

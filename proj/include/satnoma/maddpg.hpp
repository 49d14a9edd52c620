#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "satnoma/config.hpp"
#include "satnoma/neural.hpp"
#include "satnoma/replay_buffer.hpp"
#include "satnoma/rng.hpp"

namespace satnoma {

// What the critic is allowed to condition on. `joint` is the centralized
// critic over every entity's observation and action; `local` restricts the
// critic to the agent's own slice, which turns the shared loop into
// independent per-agent DDPG (the classic baseline the centralized-critic
// algorithm is measured against).
enum class CriticScope { joint, local };

// One learning agent: deterministic actor over its own observation slice, a
// critic whose input is fixed by its CriticScope, lagged target copies of
// both, and their Adam states. An agent controls a contiguous range of
// environment entities — one entity each for the multi-agent setting, all of
// them for the single-agent (centralized DDPG) reduction.
struct AgentBundle {
  DenseNet actor, critic, target_actor, target_critic;
  AdamState actor_opt, critic_opt;
  int entity_lo = 0, entity_hi = 0;
  int obs_dim = 0, act_dim = 0;   // per entity
  int n_entities = 0;             // total in the environment
  CriticScope scope = CriticScope::joint;

  int obs_in() const { return (entity_hi - entity_lo) * obs_dim; }
  int act_out() const { return (entity_hi - entity_lo) * act_dim; }
  int joint_dim() const { return n_entities * (obs_dim + act_dim); }
  int critic_in() const {
    return scope == CriticScope::joint ? joint_dim() : obs_in() + act_out();
  }
};

inline AgentBundle make_agent(int entity_lo, int entity_hi, int n_entities,
                              int obs_dim, int act_dim, const TrainConfig& tc,
                              Rng& rng, CriticScope scope = CriticScope::joint) {
  AgentBundle a;
  a.entity_lo = entity_lo;
  a.entity_hi = entity_hi;
  a.n_entities = n_entities;
  a.obs_dim = obs_dim;
  a.act_dim = act_dim;
  a.scope = scope;
  const std::vector<Activation> acts = {Activation::relu, Activation::relu,
                                        Activation::identity};
  a.actor = DenseNet::make({a.obs_in(), tc.hidden1, tc.hidden2, a.act_out()}, acts, rng);
  a.critic = DenseNet::make({a.critic_in(), tc.hidden1, tc.hidden2, 1}, acts, rng);
  if (a.scope == CriticScope::joint &&
      a.critic.input_dim() != n_entities * obs_dim + n_entities * act_dim)
    throw std::logic_error("make_agent: critic must see the full joint state-action");
  a.target_actor = a.actor;
  a.target_critic = a.critic;
  a.actor_opt = AdamState(a.actor, tc.lr);
  a.critic_opt = AdamState(a.critic, tc.lr);
  return a;
}

// Exploration noise schedule: exponential decay from noise_scale to
// noise_floor across the first noise_decay_fraction of the episode budget,
// floored afterwards.
inline double noise_scale_at(const TrainConfig& tc, int episode) {
  if (tc.noise_scale <= 0.0) return 0.0;
  if (tc.noise_floor >= tc.noise_scale) return tc.noise_floor;
  const double horizon = tc.noise_decay_fraction * tc.episodes;
  if (horizon <= 0.0 || episode >= horizon) return tc.noise_floor;
  return tc.noise_scale *
         std::pow(tc.noise_floor / tc.noise_scale, episode / horizon);
}

// Actor output plus zero-mean Gaussian noise on every component. The raw
// vector is what gets stored and differentiated; the environment decodes it
// (argmax / sigmoid / top-k) on its side.
inline void select_action_into(const AgentBundle& agent,
                               const std::vector<double>& obs, double noise_scale,
                               Rng& rng, FwdCache& cache, std::vector<double>& out) {
  forward_cached(agent.actor, obs, cache);
  out = cache.a.back();
  for (double& v : out) v += noise_scale * rng.gaussian();
}

inline std::vector<double> select_action(const AgentBundle& agent,
                                         const std::vector<double>& obs,
                                         double noise_scale, Rng& rng) {
  FwdCache cache;
  std::vector<double> out;
  select_action_into(agent, obs, noise_scale, rng, cache, out);
  return out;
}

using Minibatch = std::vector<const Transition*>;

// Joint next-slot actions under the target policies, one flat row of width
// `width` per minibatch item. Computed once per step, shared by every
// critic's update.
struct TargetActions {
  std::vector<double> flat;
  int width = 0;
  const double* row(std::size_t b) const { return flat.data() + b * width; }
};

// Reused buffers for the per-step updates; keeps the hot path allocation-free.
struct UpdateWorkspace {
  FwdCache actor_cache, critic_cache;
  std::vector<double> joint_in;  // critic input: all obs then all actions
  std::vector<double> upstream1{0.0};
  std::vector<double> xgrad, slice, up;
  BwdScratch bwd;
  TargetActions tna;
  std::unique_ptr<NetGrads> critic_grads, actor_grads;

  // Gradient accumulator matching `net`, zeroed. All agents in a run share
  // shapes, so one accumulator per role is reused across them.
  NetGrads& grads_for(std::unique_ptr<NetGrads>& slot, const DenseNet& net) {
    if (!slot || slot->dw.size() != net.layers.size() ||
        (net.layers.size() && slot->dw[0].size() != net.layers[0].w.size()) ||
        (net.layers.size() && slot->dw.back().size() != net.layers.back().w.size())) {
      slot = std::make_unique<NetGrads>(net);
    } else {
      slot->zero();
    }
    return *slot;
  }
};

namespace detail {

inline double agent_reward(const AgentBundle& a, const Transition& t) {
  double r = 0.0;
  for (int e = a.entity_lo; e < a.entity_hi; ++e) r += t.rewards[e];
  return r;
}

inline void fill_joint(std::vector<double>& dst, const std::vector<double>& obs,
                       const double* act, std::size_t act_len) {
  dst.resize(obs.size() + act_len);
  std::copy(obs.begin(), obs.end(), dst.begin());
  std::copy(act, act + act_len, dst.begin() + obs.size());
}

// Builds the critic input for either scope from the full joint observation
// vector and a full-width joint action row: everything for a joint critic,
// only the agent's own slices for a local one.
inline void fill_critic_input(std::vector<double>& dst, const AgentBundle& a,
                              const std::vector<double>& obs,
                              const double* acts_full) {
  if (a.scope == CriticScope::joint) {
    fill_joint(dst, obs, acts_full,
               static_cast<std::size_t>(a.n_entities) * a.act_dim);
    return;
  }
  dst.resize(static_cast<std::size_t>(a.obs_in()) + a.act_out());
  std::copy(obs.begin() + a.entity_lo * a.obs_dim,
            obs.begin() + a.entity_hi * a.obs_dim, dst.begin());
  std::copy(acts_full + a.entity_lo * a.act_dim,
            acts_full + a.entity_hi * a.act_dim, dst.begin() + a.obs_in());
}

}  // namespace detail

inline void compute_target_actions(const std::vector<AgentBundle>& agents,
                                   const Minibatch& batch, TargetActions& tna,
                                   FwdCache& cache,
                                   std::vector<double>& obs_slice) {
  const AgentBundle& first = agents.front();
  tna.width = first.n_entities * first.act_dim;
  tna.flat.resize(batch.size() * static_cast<std::size_t>(tna.width));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Transition& t = *batch[b];
    double* row = tna.flat.data() + b * tna.width;
    for (const AgentBundle& a : agents) {
      obs_slice.assign(t.next_obs.begin() + a.entity_lo * a.obs_dim,
                       t.next_obs.begin() + a.entity_hi * a.obs_dim);
      forward_cached(a.target_actor, obs_slice, cache);
      const std::vector<double>& act = cache.a.back();
      std::copy(act.begin(), act.end(), row + a.entity_lo * a.act_dim);
    }
  }
}

inline TargetActions target_joint_actions(const std::vector<AgentBundle>& agents,
                                          const Minibatch& batch) {
  TargetActions tna;
  FwdCache cache;
  std::vector<double> slice;
  compute_target_actions(agents, batch, tna, cache, slice);
  return tna;
}

// One critic regression step against the soft targets
//   y = r_i + discount * Q'_i(next joint obs, target joint actions).
// Returns the minibatch MSE measured before the parameters move.
inline double critic_update(AgentBundle& agent, const Minibatch& batch,
                            const TargetActions& target_actions,
                            const TrainConfig& tc, UpdateWorkspace& ws) {
  NetGrads& grads = ws.grads_for(ws.critic_grads, agent.critic);
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Transition& t = *batch[b];
    detail::fill_critic_input(ws.joint_in, agent, t.next_obs, target_actions.row(b));
    forward_cached(agent.target_critic, ws.joint_in, ws.critic_cache);
    const double y = detail::agent_reward(agent, t) +
                     tc.discount * ws.critic_cache.a.back()[0];

    detail::fill_critic_input(ws.joint_in, agent, t.obs, t.actions.data());
    forward_cached(agent.critic, ws.joint_in, ws.critic_cache);
    const double err = ws.critic_cache.a.back()[0] - y;
    loss += err * err;
    ws.upstream1[0] = 2.0 * err * inv_b;
    backward(agent.critic, ws.critic_cache, ws.upstream1, &grads, nullptr, &ws.bwd);
  }
  loss *= inv_b;
  clip_grad_norm(grads, tc.grad_clip);
  adam_step(agent.critic, grads, agent.critic_opt);
  return loss;
}

// One deterministic policy-gradient ascent step: the critic's action
// gradient at a_i = actor(o_i) (for a joint critic, other entities' actions
// come straight from the batch) is chained through the actor. Returns the
// minibatch mean Q under the refreshed action, measured before the step.
inline double actor_update(AgentBundle& agent, const Minibatch& batch,
                           const TrainConfig& tc, UpdateWorkspace& ws) {
  NetGrads& grads = ws.grads_for(ws.actor_grads, agent.actor);
  double qsum = 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (const Transition* tp : batch) {
    const Transition& t = *tp;
    ws.slice.assign(t.obs.begin() + agent.entity_lo * agent.obs_dim,
                    t.obs.begin() + agent.entity_hi * agent.obs_dim);
    forward_cached(agent.actor, ws.slice, ws.actor_cache);
    const std::vector<double>& a_i = ws.actor_cache.a.back();

    detail::fill_critic_input(ws.joint_in, agent, t.obs, t.actions.data());
    const std::size_t base =
        agent.scope == CriticScope::joint
            ? static_cast<std::size_t>(agent.n_entities) * agent.obs_dim +
                  static_cast<std::size_t>(agent.entity_lo) * agent.act_dim
            : static_cast<std::size_t>(agent.obs_in());
    std::copy(a_i.begin(), a_i.end(), ws.joint_in.begin() + base);
    forward_cached(agent.critic, ws.joint_in, ws.critic_cache);
    qsum += ws.critic_cache.a.back()[0];

    ws.upstream1[0] = 1.0;
    backward(agent.critic, ws.critic_cache, ws.upstream1, nullptr, &ws.xgrad, &ws.bwd);
    // gradient ascent on Q == descent on -Q
    ws.up.resize(agent.act_out());
    for (int i = 0; i < agent.act_out(); ++i) ws.up[i] = -ws.xgrad[base + i] * inv_b;
    backward(agent.actor, ws.actor_cache, ws.up, &grads, nullptr, &ws.bwd);
  }
  clip_grad_norm(grads, tc.grad_clip);
  adam_step(agent.actor, grads, agent.actor_opt);
  return qsum * inv_b;
}

inline void soft_update_agent(AgentBundle& agent, double tau) {
  soft_update(agent.target_actor, agent.actor, tau);
  soft_update(agent.target_critic, agent.critic, tau);
}

struct EpisodeStats {
  int episode = 0;
  double mean_reward = 0.0;  // per-step system EE, averaged over the episode
  double hit_rate = 0.0;
  double actor_loss = 0.0;   // minimized quantity: -mean Q
  double critic_loss = 0.0;
  double noise_scale = 0.0;
};

class MetricsSink {
 public:
  virtual ~MetricsSink() = default;
  virtual void on_episode(const EpisodeStats&) = 0;
};

struct TrainingDiverged : std::runtime_error {
  explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

struct TrainResult {
  std::vector<EpisodeStats> log;
  std::vector<AgentBundle> agents;
  uint64_t env_violations = 0;
  std::string final_rng_state;  // trainer stream state after the last episode
};

// Shared training loop for both stages. n_groups == n_entities gives the
// multi-agent setting (one agent per user or facility); n_groups == 1 gives
// the single centralized agent over the concatenated action space; a local
// critic scope turns the multi-agent setting into independent per-agent
// DDPG. Per step, once the buffer holds a batch: one shared uniform
// minibatch, then a critic step, an actor step, and a target soft update for
// every agent.
template <class Env>
TrainResult train_loop(Env& env, const TrainConfig& tc, uint64_t seed,
                       int n_groups, MetricsSink* sink = nullptr,
                       CriticScope scope = CriticScope::joint) {
  const int e_total = env.n_entities();
  const int od = env.obs_dim(), ad = env.action_dim();
  if (n_groups < 1 || n_groups > e_total || e_total % n_groups != 0)
    throw std::invalid_argument("train_loop: n_groups must evenly divide the entities");
  const int per = e_total / n_groups;

  Rng rng(mix_seed(seed, 0xA9E27));
  std::vector<AgentBundle> agents;
  agents.reserve(n_groups);
  for (int g = 0; g < n_groups; ++g)
    agents.push_back(make_agent(g * per, (g + 1) * per, e_total, od, ad, tc, rng, scope));

  ReplayBuffer buffer(tc.buffer_capacity);
  UpdateWorkspace ws;
  TrainResult out;
  out.log.reserve(tc.episodes);

  std::vector<double> flat_obs(static_cast<std::size_t>(e_total) * od);
  std::vector<std::vector<double>> raw(e_total);
  auto flatten = [&](const std::vector<std::vector<double>>& obs,
                     std::vector<double>& dst) {
    for (int e = 0; e < e_total; ++e)
      std::copy(obs[e].begin(), obs[e].end(), dst.begin() + e * od);
  };

  for (int ep = 0; ep < tc.episodes; ++ep) {
    const double noise = noise_scale_at(tc, ep);
    flatten(env.reset(mix_seed(seed, 0xE9150000ULL + ep)), flat_obs);

    double reward_acc = 0.0, hit_acc = 0.0, closs_acc = 0.0, aloss_acc = 0.0;
    int steps = 0, updates = 0;
    for (int t = 0; t < tc.steps_per_episode; ++t) {
      Transition tr;
      tr.obs = flat_obs;
      tr.actions.resize(static_cast<std::size_t>(e_total) * ad);
      for (AgentBundle& a : agents) {
        ws.slice.assign(flat_obs.begin() + a.entity_lo * od,
                        flat_obs.begin() + a.entity_hi * od);
        select_action_into(a, ws.slice, noise, rng, ws.actor_cache, ws.up);
        std::copy(ws.up.begin(), ws.up.end(), tr.actions.begin() + a.entity_lo * ad);
      }
      for (int e = 0; e < e_total; ++e)
        raw[e].assign(tr.actions.begin() + e * ad, tr.actions.begin() + (e + 1) * ad);

      StepResult res = env.step_raw(raw);
      tr.rewards = res.rewards;
      tr.next_obs.resize(flat_obs.size());
      flatten(res.obs, tr.next_obs);

      buffer.push(std::move(tr));
      reward_acc += res.info.objective;
      hit_acc += res.info.hit_rate;
      ++steps;

      if (buffer.size() >= static_cast<std::size_t>(tc.batch_size)) {
        const Minibatch mb = buffer.sample(tc.batch_size, rng);
        compute_target_actions(agents, mb, ws.tna, ws.actor_cache, ws.slice);
        for (AgentBundle& a : agents) {
          const double l = critic_update(a, mb, ws.tna, tc, ws);
          if (!std::isfinite(l))
            throw TrainingDiverged("critic loss became non-finite at episode " +
                                   std::to_string(ep));
          closs_acc += l;
        }
        for (AgentBundle& a : agents) {
          const double q = actor_update(a, mb, tc, ws);
          if (!std::isfinite(q))
            throw TrainingDiverged("actor objective became non-finite at episode " +
                                   std::to_string(ep));
          aloss_acc += -q;
        }
        for (AgentBundle& a : agents) soft_update_agent(a, tc.tau);
        ++updates;
      }

      std::copy(tr.next_obs.begin(), tr.next_obs.end(), flat_obs.begin());
      if (res.done) break;
    }

    for (const AgentBundle& a : agents)
      if (!all_finite(a.actor) || !all_finite(a.critic))
        throw TrainingDiverged("parameters became non-finite at episode " +
                               std::to_string(ep));

    EpisodeStats st;
    st.episode = ep;
    st.mean_reward = steps ? reward_acc / steps : 0.0;
    st.hit_rate = steps ? hit_acc / steps : 0.0;
    const int upd_total = updates * n_groups;
    st.critic_loss = upd_total ? closs_acc / upd_total : 0.0;
    st.actor_loss = upd_total ? aloss_acc / upd_total : 0.0;
    st.noise_scale = noise;
    if (sink) sink->on_episode(st);
    out.log.push_back(st);
  }
  out.agents = std::move(agents);
  out.env_violations = env.violations();
  out.final_rng_state = rng.state();
  return out;
}

// Stage one: learn per-user association and power control.
template <class Env>
TrainResult train_resource(Env& env, const TrainConfig& tc, uint64_t seed,
                           MetricsSink* sink = nullptr) {
  return train_loop(env, tc, seed, env.n_entities(), sink);
}

// Stage two: learn per-facility cache placement against a frozen stage-one
// policy (the environment holds the frozen association).
template <class Env>
TrainResult train_cache(Env& env, const TrainConfig& tc, uint64_t seed,
                        MetricsSink* sink = nullptr) {
  return train_loop(env, tc, seed, env.n_entities(), sink);
}

}  // namespace satnoma

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "satnoma/config.hpp"
#include "satnoma/maddpg.hpp"
#include "satnoma/neural.hpp"

namespace satnoma {

// Full round-trip precision: a double printed this way parses back bit-exact,
// which is what makes metrics files byte-comparable across reruns.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

inline constexpr const char* kMetricsHeader =
    "episode,mean_reward,hit_rate,actor_loss,critic_loss,noise_scale";

inline std::string format_metrics_row(const EpisodeStats& s) {
  std::string row = std::to_string(s.episode);
  row += ',';
  row += format_double(s.mean_reward);
  row += ',';
  row += format_double(s.hit_rate);
  row += ',';
  row += format_double(s.actor_loss);
  row += ',';
  row += format_double(s.critic_loss);
  row += ',';
  row += format_double(s.noise_scale);
  return row;
}

// Streams one CSV row per finished episode, flushing each so a crashed run
// still leaves a usable log. The header is written exactly once, on open.
class CsvMetricsSink : public MetricsSink {
 public:
  explicit CsvMetricsSink(const std::string& path)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot open metrics file: " + path);
    out_ << kMetricsHeader << '\n';
    out_.flush();
  }

  void on_episode(const EpisodeStats& s) override {
    out_ << format_metrics_row(s) << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("metrics file write failed");
  }

 private:
  std::ofstream out_;
};

inline void write_metrics_csv(const std::string& path,
                              const std::vector<EpisodeStats>& log) {
  CsvMetricsSink sink(path);
  for (const EpisodeStats& s : log) sink.on_episode(s);
}

inline uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

inline std::string config_hash(const NetworkConfig& cfg) {
  nlohmann::json j = cfg;
  return hex64(fnv1a64(j.dump()));
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path);
}

// Every field serialized, defaults included: the run is reconstructible from
// this file with no reference to the original input config.
inline void write_resolved_config(const std::string& dir, const NetworkConfig& cfg) {
  nlohmann::json j = cfg;
  write_text_file(dir + "/config.resolved.json", j.dump(2) + "\n");
}

// Parameter snapshots for every agent, in the flat binary net layout, plus a
// manifest tying them to the resolved config, completed episode count, and
// the trainer's RNG stream state.
inline void write_checkpoint(const std::string& dir, const NetworkConfig& cfg,
                             const std::string& command, uint64_t seed,
                             const TrainResult& result) {
  namespace fs = std::filesystem;
  const fs::path base = fs::path(dir) / "checkpoint";
  fs::create_directories(base);
  for (std::size_t i = 0; i < result.agents.size(); ++i) {
    const AgentBundle& a = result.agents[i];
    const std::string tag = std::to_string(i);
    save_net(a.actor, (base / ("actor_" + tag + ".bin")).string());
    save_net(a.critic, (base / ("critic_" + tag + ".bin")).string());
    save_net(a.target_actor, (base / ("target_actor_" + tag + ".bin")).string());
    save_net(a.target_critic, (base / ("target_critic_" + tag + ".bin")).string());
  }
  nlohmann::json m;
  m["command"] = command;
  m["config_hash"] = config_hash(cfg);
  m["seed"] = seed;
  m["episodes_completed"] = result.log.size();
  m["rng_state"] = result.final_rng_state;
  m["num_agents"] = result.agents.size();
  m["critic_scope"] = (!result.agents.empty() &&
                       result.agents.front().scope == CriticScope::local)
                          ? "local"
                          : "joint";
  m["env_violations"] = result.env_violations;
  write_text_file((base / "manifest.json").string(), m.dump(2) + "\n");
}

inline double final_window_mean_reward(const std::vector<EpisodeStats>& log,
                                       int window) {
  if (log.empty()) return 0.0;
  const int n = static_cast<int>(log.size());
  const int w = std::min(window, n);
  double acc = 0.0;
  for (int i = n - w; i < n; ++i) acc += log[i].mean_reward;
  return acc / w;
}

inline double final_window_hit_rate(const std::vector<EpisodeStats>& log,
                                    int window) {
  if (log.empty()) return 0.0;
  const int n = static_cast<int>(log.size());
  const int w = std::min(window, n);
  double acc = 0.0;
  for (int i = n - w; i < n; ++i) acc += log[i].hit_rate;
  return acc / w;
}

inline void write_run_summary(const std::string& dir, const std::string& command,
                              uint64_t seed, const std::vector<EpisodeStats>& log,
                              uint64_t violations, double wall_seconds,
                              const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json s;
  s["command"] = command;
  s["seed"] = seed;
  s["episodes"] = log.size();
  s["final_window"] = std::min<std::size_t>(100, log.size());
  s["mean_reward_final_window"] = final_window_mean_reward(log, 100);
  s["hit_rate_final_window"] = final_window_hit_rate(log, 100);
  s["constraint_violations"] = violations;
  s["wall_seconds"] = wall_seconds;
  for (auto it = extra.begin(); it != extra.end(); ++it) s[it.key()] = it.value();
  write_text_file(dir + "/summary.json", s.dump(2) + "\n");
}

// Rebuilds the agent bundles of a finished run from its checkpoint directory.
// Net shapes are derived from the environment dimensions and the training
// hyperparameters; the binary loader rejects any size mismatch. Optimizer
// state is not serialized: resumed runs restart Adam's moment estimates.
inline std::vector<AgentBundle> load_checkpoint_agents(const std::string& run_dir,
                                                       int n_entities, int obs_dim,
                                                       int action_dim,
                                                       const TrainConfig& tc) {
  namespace fs = std::filesystem;
  const fs::path base = fs::path(run_dir) / "checkpoint";
  std::ifstream mf(base / "manifest.json");
  if (!mf)
    throw std::runtime_error("cannot open checkpoint manifest under: " + run_dir);
  const nlohmann::json m = nlohmann::json::parse(mf);
  const int n_agents = m.at("num_agents").get<int>();
  if (n_agents < 1 || n_entities % n_agents != 0)
    throw std::runtime_error("checkpoint agent count does not divide the entities");
  const CriticScope scope = m.value("critic_scope", "joint") == std::string("local")
                                ? CriticScope::local
                                : CriticScope::joint;
  const int per = n_entities / n_agents;
  Rng shape_rng(1);  // placeholder init; every parameter is overwritten below
  std::vector<AgentBundle> agents;
  agents.reserve(n_agents);
  for (int g = 0; g < n_agents; ++g) {
    AgentBundle a = make_agent(g * per, (g + 1) * per, n_entities, obs_dim,
                               action_dim, tc, shape_rng, scope);
    const std::string tag = std::to_string(g);
    load_net(a.actor, (base / ("actor_" + tag + ".bin")).string());
    load_net(a.critic, (base / ("critic_" + tag + ".bin")).string());
    load_net(a.target_actor, (base / ("target_actor_" + tag + ".bin")).string());
    load_net(a.target_critic, (base / ("target_critic_" + tag + ".bin")).string());
    agents.push_back(std::move(a));
  }
  return agents;
}

}  // namespace satnoma

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace satnoma {

// RL hyperparameters (defaults follow the training setup the simulator is
// calibrated against: Adam 1e-3, discount 0.95, batch 10, 100-step episodes).
struct TrainConfig {
  double lr = 0.001;
  double discount = 0.95;
  int batch_size = 10;
  std::size_t buffer_capacity = 50000;
  double tau = 0.01;               // target-network soft-update rate
  double noise_scale = 0.3;        // initial exploration noise (std dev)
  double noise_floor = 0.01;       // terminal noise level
  double noise_decay_fraction = 0.6;  // fraction of episodes spent decaying
  int episodes = 1000;
  int steps_per_episode = 100;
  int hidden1 = 64;
  int hidden2 = 64;
  double grad_clip = 10.0;         // global gradient-norm ceiling
};

// Full scenario parameterization. Facilities are indexed 0..num_bs-1 for
// base stations, then num_bs..num_bs+num_sat-1 for satellites. File indices
// are 1-based (1..library_size). All units are SI, linear (no dB).
struct NetworkConfig {
  // population / topology
  int num_bs = 6;              // M
  int num_sat = 2;             // K
  int num_bs_users = 24;       // N_b
  int num_sat_users = 8;       // N_s
  int bs_capacity = 5;         // max users a BS may serve at once
  int sat_capacity = 5;        // max users a satellite may serve at once
  double area_side = 500.0;    // m, side of the deployment square
  double sat_altitude = 600e3; // m

  // radio
  double p_bs_max = 10.0;      // W, BS power budget
  double p_sat_max = 1000.0;   // W, satellite power budget
  double noise_density = 1e-10;   // W
  double pathloss_exponent = 3.0;
  double carrier_freq = 2e9;   // Hz
  double light_speed = 299792458.0;  // m/s
  double g_max = 1000.0;       // satellite boresight antenna gain, linear (30 dB)
  double rx_gain = 1.0;        // user terminal gain toward the satellite
  double theta_3db = 0.07;     // rad, satellite beam half-power angle
  double doppler = 0.0;        // satellite phase parameter (phase = e^{j*pi*doppler})

  // content / caching
  int library_size = 40;       // U
  double file_size_bits = 1e6; // s, per file
  double zipf_exponent = 0.83; // popularity skew
  int bs_cache_capacity = 3;   // files per BS cache (< library_size)
  int sat_cache_capacity = 3;  // files per satellite cache (< library_size)
  double p_retrieve_bs = 0.1;       // W, serve from local BS cache
  double p_retrieve_core = 0.5;     // W, BS fetch from core network
  double p_retrieve_sat = 0.2;      // W, serve from satellite cache
  double p_retrieve_sat_core = 1.0; // W, satellite fetch via gateway
  double delay_bs_backhaul = 0.05;  // s
  double delay_sat_backhaul = 0.25; // s
  double delay_cache_hit = 0.005;   // s

  // simulation
  uint64_t seed = 1;
  bool sic_mode = false;       // successive interference cancellation in BS cells
  bool extended_obs = false;   // append the entity's previous efficiency/reward value

  TrainConfig train;

  int num_users() const { return num_bs_users + num_sat_users; }
  int num_facilities() const { return num_bs + num_sat; }
};

struct ValidationResult {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

// Checks every config field against its admissible range. Returns the full
// list of violations (does not stop at the first).
inline ValidationResult validate_config(const NetworkConfig& c) {
  ValidationResult r;
  auto err = [&](const std::string& m) { r.errors.push_back(m); };
  auto warn = [&](const std::string& m) { r.warnings.push_back(m); };

  if (c.num_bs < 0) err("num_bs must be >= 0");
  if (c.num_sat < 0) err("num_sat must be >= 0");
  if (c.num_bs + c.num_sat < 1) err("need at least one facility (num_bs + num_sat >= 1)");
  if (c.num_bs_users < 0) err("num_bs_users must be >= 0");
  if (c.num_sat_users < 0) err("num_sat_users must be >= 0");
  if (c.num_users() < 1) err("need at least one user");
  if (c.bs_capacity < 1) err("bs_capacity must be >= 1");
  if (c.sat_capacity < 1) err("sat_capacity must be >= 1");
  if (c.area_side < 0) err("area_side must be >= 0");
  if (c.sat_altitude <= 0) err("sat_altitude must be > 0");

  if (c.p_bs_max <= 0) err("p_bs_max must be > 0");
  if (c.p_sat_max <= 0) err("p_sat_max must be > 0");
  if (c.noise_density <= 0) err("noise_density must be > 0");
  if (c.pathloss_exponent <= 0) err("pathloss_exponent must be > 0");
  if (c.carrier_freq <= 0) err("carrier_freq must be > 0");
  if (c.light_speed <= 0) err("light_speed must be > 0");
  if (c.g_max <= 0) err("g_max must be > 0");
  if (c.rx_gain <= 0) err("rx_gain must be > 0");
  if (c.theta_3db <= 0) err("theta_3db must be > 0");

  if (c.library_size < 1) err("library_size must be >= 1");
  if (c.file_size_bits <= 0) err("file_size_bits must be > 0");
  if (c.zipf_exponent <= 0) {
    err("zipf_exponent must be > 0");
  } else if (c.zipf_exponent < 0.56 || c.zipf_exponent > 0.83) {
    warn("zipf_exponent outside the calibrated range [0.56, 0.83]");
  }
  if (c.bs_cache_capacity < 1) err("bs_cache_capacity must be >= 1");
  if (c.sat_cache_capacity < 1) err("sat_cache_capacity must be >= 1");
  if (c.bs_cache_capacity >= c.library_size)
    err("bs_cache_capacity must be strictly smaller than library_size");
  if (c.sat_cache_capacity >= c.library_size)
    err("sat_cache_capacity must be strictly smaller than library_size");
  if (c.p_retrieve_bs <= 0) err("p_retrieve_bs must be > 0");
  if (c.p_retrieve_core <= 0) err("p_retrieve_core must be > 0");
  if (c.p_retrieve_sat <= 0) err("p_retrieve_sat must be > 0");
  if (c.p_retrieve_sat_core <= 0) err("p_retrieve_sat_core must be > 0");
  if (c.delay_bs_backhaul <= 0) err("delay_bs_backhaul must be > 0");
  if (c.delay_sat_backhaul <= 0) err("delay_sat_backhaul must be > 0");
  if (c.delay_cache_hit <= 0) err("delay_cache_hit must be > 0");

  const TrainConfig& t = c.train;
  if (t.lr <= 0) err("train.lr must be > 0");
  if (t.discount < 0 || t.discount > 1) err("train.discount must be in [0, 1]");
  if (t.batch_size < 1) err("train.batch_size must be >= 1");
  if (static_cast<std::size_t>(t.batch_size) > t.buffer_capacity)
    err("train.batch_size must not exceed train.buffer_capacity");
  if (t.tau <= 0 || t.tau > 1) err("train.tau must be in (0, 1]");
  if (t.noise_scale < 0) err("train.noise_scale must be >= 0");
  if (t.noise_floor < 0) err("train.noise_floor must be >= 0");
  if (t.noise_scale > 0 && t.noise_floor <= 0)
    err("train.noise_floor must be > 0 when noise_scale > 0");
  if (t.noise_decay_fraction <= 0 || t.noise_decay_fraction > 1)
    err("train.noise_decay_fraction must be in (0, 1]");
  if (t.episodes < 1) err("train.episodes must be >= 1");
  if (t.steps_per_episode < 1) err("train.steps_per_episode must be >= 1");
  if (t.hidden1 < 1 || t.hidden2 < 1) err("train.hidden sizes must be >= 1");
  if (t.grad_clip <= 0) err("train.grad_clip must be > 0");
  return r;
}

// ---- JSON binding ---------------------------------------------------------
// Missing keys keep their defaults; unknown keys are rejected so config typos
// cannot silently change an experiment.

namespace detail {

template <typename T>
void get_if_present(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline const std::vector<std::string>& train_keys() {
  static const std::vector<std::string> keys = {
      "lr", "discount", "batch_size", "buffer_capacity", "tau",
      "noise_scale", "noise_floor", "noise_decay_fraction", "episodes",
      "steps_per_episode", "hidden1", "hidden2", "grad_clip"};
  return keys;
}

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "num_bs", "num_sat", "num_bs_users", "num_sat_users", "bs_capacity",
      "sat_capacity", "area_side", "sat_altitude", "p_bs_max", "p_sat_max",
      "noise_density", "pathloss_exponent", "carrier_freq", "light_speed",
      "g_max", "rx_gain", "theta_3db", "doppler", "library_size",
      "file_size_bits", "zipf_exponent", "bs_cache_capacity",
      "sat_cache_capacity", "p_retrieve_bs", "p_retrieve_core",
      "p_retrieve_sat", "p_retrieve_sat_core", "delay_bs_backhaul",
      "delay_sat_backhaul", "delay_cache_hit", "seed", "sic_mode",
      "extended_obs", "train"};
  return keys;
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const TrainConfig& t) {
  j = nlohmann::json{{"lr", t.lr},
                     {"discount", t.discount},
                     {"batch_size", t.batch_size},
                     {"buffer_capacity", t.buffer_capacity},
                     {"tau", t.tau},
                     {"noise_scale", t.noise_scale},
                     {"noise_floor", t.noise_floor},
                     {"noise_decay_fraction", t.noise_decay_fraction},
                     {"episodes", t.episodes},
                     {"steps_per_episode", t.steps_per_episode},
                     {"hidden1", t.hidden1},
                     {"hidden2", t.hidden2},
                     {"grad_clip", t.grad_clip}};
}

inline void from_json(const nlohmann::json& j, TrainConfig& t) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& keys = detail::train_keys();
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      throw std::runtime_error("unknown config key: train." + it.key());
  }
  detail::get_if_present(j, "lr", t.lr);
  detail::get_if_present(j, "discount", t.discount);
  detail::get_if_present(j, "batch_size", t.batch_size);
  detail::get_if_present(j, "buffer_capacity", t.buffer_capacity);
  detail::get_if_present(j, "tau", t.tau);
  detail::get_if_present(j, "noise_scale", t.noise_scale);
  detail::get_if_present(j, "noise_floor", t.noise_floor);
  detail::get_if_present(j, "noise_decay_fraction", t.noise_decay_fraction);
  detail::get_if_present(j, "episodes", t.episodes);
  detail::get_if_present(j, "steps_per_episode", t.steps_per_episode);
  detail::get_if_present(j, "hidden1", t.hidden1);
  detail::get_if_present(j, "hidden2", t.hidden2);
  detail::get_if_present(j, "grad_clip", t.grad_clip);
}

inline void to_json(nlohmann::json& j, const NetworkConfig& c) {
  j = nlohmann::json{{"num_bs", c.num_bs},
                     {"num_sat", c.num_sat},
                     {"num_bs_users", c.num_bs_users},
                     {"num_sat_users", c.num_sat_users},
                     {"bs_capacity", c.bs_capacity},
                     {"sat_capacity", c.sat_capacity},
                     {"area_side", c.area_side},
                     {"sat_altitude", c.sat_altitude},
                     {"p_bs_max", c.p_bs_max},
                     {"p_sat_max", c.p_sat_max},
                     {"noise_density", c.noise_density},
                     {"pathloss_exponent", c.pathloss_exponent},
                     {"carrier_freq", c.carrier_freq},
                     {"light_speed", c.light_speed},
                     {"g_max", c.g_max},
                     {"rx_gain", c.rx_gain},
                     {"theta_3db", c.theta_3db},
                     {"doppler", c.doppler},
                     {"library_size", c.library_size},
                     {"file_size_bits", c.file_size_bits},
                     {"zipf_exponent", c.zipf_exponent},
                     {"bs_cache_capacity", c.bs_cache_capacity},
                     {"sat_cache_capacity", c.sat_cache_capacity},
                     {"p_retrieve_bs", c.p_retrieve_bs},
                     {"p_retrieve_core", c.p_retrieve_core},
                     {"p_retrieve_sat", c.p_retrieve_sat},
                     {"p_retrieve_sat_core", c.p_retrieve_sat_core},
                     {"delay_bs_backhaul", c.delay_bs_backhaul},
                     {"delay_sat_backhaul", c.delay_sat_backhaul},
                     {"delay_cache_hit", c.delay_cache_hit},
                     {"seed", c.seed},
                     {"sic_mode", c.sic_mode},
                     {"extended_obs", c.extended_obs},
                     {"train", c.train}};
}

inline void from_json(const nlohmann::json& j, NetworkConfig& c) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& keys = detail::config_keys();
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      throw std::runtime_error("unknown config key: " + it.key());
  }
  detail::get_if_present(j, "num_bs", c.num_bs);
  detail::get_if_present(j, "num_sat", c.num_sat);
  detail::get_if_present(j, "num_bs_users", c.num_bs_users);
  detail::get_if_present(j, "num_sat_users", c.num_sat_users);
  detail::get_if_present(j, "bs_capacity", c.bs_capacity);
  detail::get_if_present(j, "sat_capacity", c.sat_capacity);
  detail::get_if_present(j, "area_side", c.area_side);
  detail::get_if_present(j, "sat_altitude", c.sat_altitude);
  detail::get_if_present(j, "p_bs_max", c.p_bs_max);
  detail::get_if_present(j, "p_sat_max", c.p_sat_max);
  detail::get_if_present(j, "noise_density", c.noise_density);
  detail::get_if_present(j, "pathloss_exponent", c.pathloss_exponent);
  detail::get_if_present(j, "carrier_freq", c.carrier_freq);
  detail::get_if_present(j, "light_speed", c.light_speed);
  detail::get_if_present(j, "g_max", c.g_max);
  detail::get_if_present(j, "rx_gain", c.rx_gain);
  detail::get_if_present(j, "theta_3db", c.theta_3db);
  detail::get_if_present(j, "doppler", c.doppler);
  detail::get_if_present(j, "library_size", c.library_size);
  detail::get_if_present(j, "file_size_bits", c.file_size_bits);
  detail::get_if_present(j, "zipf_exponent", c.zipf_exponent);
  detail::get_if_present(j, "bs_cache_capacity", c.bs_cache_capacity);
  detail::get_if_present(j, "sat_cache_capacity", c.sat_cache_capacity);
  detail::get_if_present(j, "p_retrieve_bs", c.p_retrieve_bs);
  detail::get_if_present(j, "p_retrieve_core", c.p_retrieve_core);
  detail::get_if_present(j, "p_retrieve_sat", c.p_retrieve_sat);
  detail::get_if_present(j, "p_retrieve_sat_core", c.p_retrieve_sat_core);
  detail::get_if_present(j, "delay_bs_backhaul", c.delay_bs_backhaul);
  detail::get_if_present(j, "delay_sat_backhaul", c.delay_sat_backhaul);
  detail::get_if_present(j, "delay_cache_hit", c.delay_cache_hit);
  detail::get_if_present(j, "seed", c.seed);
  detail::get_if_present(j, "sic_mode", c.sic_mode);
  detail::get_if_present(j, "extended_obs", c.extended_obs);
  if (j.contains("train")) c.train = j.at("train").get<TrainConfig>();
}

inline NetworkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return j.get<NetworkConfig>();
}

}  // namespace satnoma

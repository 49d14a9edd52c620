#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "satnoma/config.hpp"
#include "satnoma/rng.hpp"

namespace satnoma {

// BS-user links never get closer than this (3-D separation floor, m); with
// area_side == 0 every terrestrial distance collapses to exactly this value.
inline constexpr double kMinTerrestrialDistance = 10.0;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Node placement plus the derived per-link geometry the channel model needs.
// Satellites are described by their boresight ground point; their slant
// distance and off-boresight angle to each user follow from the altitude.
struct Topology {
  std::vector<Vec2> bs_positions;
  std::vector<Vec2> sat_positions;   // boresight ground points
  std::vector<Vec2> user_positions;
  std::vector<double> dist_bs;       // [user * M + bs], m
  std::vector<double> dist_sat;      // [user * K + sat], m
  std::vector<double> theta_sat;     // [user * K + sat], rad, in [0, pi/2)

  double bs_distance(int user, int bs, int num_bs) const {
    return dist_bs[static_cast<std::size_t>(user) * num_bs + bs];
  }
};

// Uniform placement in the area square, deterministic under the seed.
// Draw order (fixed): BS positions, satellite ground points, user positions.
inline Topology generate_topology(const NetworkConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  Topology t;
  const int m = cfg.num_bs, k = cfg.num_sat, n = cfg.num_users();

  auto draw_point = [&]() {
    Vec2 p;
    p.x = rng.uniform(0.0, cfg.area_side);
    p.y = rng.uniform(0.0, cfg.area_side);
    return p;
  };

  t.bs_positions.reserve(m);
  for (int i = 0; i < m; ++i) t.bs_positions.push_back(draw_point());
  t.sat_positions.reserve(k);
  for (int i = 0; i < k; ++i) t.sat_positions.push_back(draw_point());
  t.user_positions.reserve(n);
  for (int i = 0; i < n; ++i) t.user_positions.push_back(draw_point());

  t.dist_bs.resize(static_cast<std::size_t>(n) * m);
  for (int u = 0; u < n; ++u) {
    for (int b = 0; b < m; ++b) {
      const double dx = t.user_positions[u].x - t.bs_positions[b].x;
      const double dy = t.user_positions[u].y - t.bs_positions[b].y;
      const double d = std::sqrt(dx * dx + dy * dy);
      t.dist_bs[static_cast<std::size_t>(u) * m + b] =
          std::max(kMinTerrestrialDistance, d);
    }
  }

  t.dist_sat.resize(static_cast<std::size_t>(n) * k);
  t.theta_sat.resize(static_cast<std::size_t>(n) * k);
  for (int u = 0; u < n; ++u) {
    for (int s = 0; s < k; ++s) {
      const double dx = t.user_positions[u].x - t.sat_positions[s].x;
      const double dy = t.user_positions[u].y - t.sat_positions[s].y;
      const double ground = std::sqrt(dx * dx + dy * dy);
      const std::size_t idx = static_cast<std::size_t>(u) * k + s;
      t.dist_sat[idx] = std::sqrt(ground * ground + cfg.sat_altitude * cfg.sat_altitude);
      t.theta_sat[idx] = std::atan2(ground, cfg.sat_altitude);
    }
  }
  return t;
}

}  // namespace satnoma

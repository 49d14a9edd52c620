#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "satnoma/channel.hpp"
#include "satnoma/config.hpp"
#include "satnoma/state.hpp"

namespace satnoma {

// Additive interference seen by one user, split by origin. For a terrestrial
// user: intra = co-cell NOMA users, cross = users of other base stations,
// tier = satellite-served users. For a satellite user: intra = same
// satellite, cross = other satellites' users, tier = terrestrial users.
struct SinrBreakdown {
  double signal = 0.0;
  double intra = 0.0;
  double cross = 0.0;
  double tier = 0.0;
  double sinr = 0.0;
};

namespace detail {

// SIC decoding order inside a NOMA cell: descending channel gain, ties by
// ascending user index. With SIC on, user n decodes and cancels every co-cell
// user behind it in this order and keeps interference only from users ahead
// of it (the spec's worked example: the strong user cancels the weak one).
inline bool sic_interferes(double gain_other, int other, double gain_self, int self) {
  if (gain_other != gain_self) return gain_other > gain_self;
  return other < self;
}

}  // namespace detail

// SINR of a user served by a base station. Interference terms follow the
// literal model: each interfering user contributes its *own* serving-link
// gain times its transmit power, except satellite-tier interferers whose
// terrestrial channel toward this user's BS is used (that cross-tier link
// reuses the Rayleigh/pathloss model).
inline SinrBreakdown bs_user_sinr_detail(int user, const ChannelRealization& ch,
                                         const AssociationMatrix& assoc,
                                         const std::vector<double>& powers,
                                         const NetworkConfig& cfg, bool sic_mode) {
  SinrBreakdown out;
  const int m = assoc.facility_of(user);
  if (m < 0 || m >= cfg.num_bs) return out;  // not on a BS: SINR 0 by contract

  const double own_gain = ch.bs_gain(user, m);
  out.signal = own_gain * powers[user];

  const int n = assoc.num_users();
  for (int other = 0; other < n; ++other) {
    if (other == user) continue;
    const int f = assoc.facility_of(other);
    if (f < 0) continue;
    if (f == m) {
      const double g = ch.bs_gain(other, m);
      if (!sic_mode || detail::sic_interferes(g, other, own_gain, user))
        out.intra += g * powers[other];
    } else if (f < cfg.num_bs) {
      out.cross += ch.bs_gain(other, f) * powers[other];
    } else {
      // satellite-served user heard over its terrestrial link to this BS
      out.tier += ch.bs_gain(other, m) * powers[other];
    }
  }
  out.sinr = out.signal / (out.intra + out.cross + out.tier + cfg.noise_density);
  return out;
}

// SINR of a user served by a satellite. All interfering users are weighted
// by their link gain toward this user's serving satellite (terrestrial
// interferers reuse the beam/free-space model for their satellite-pointing
// links, which the source model names but never defines separately).
inline SinrBreakdown sat_user_sinr_detail(int user, const ChannelRealization& ch,
                                          const AssociationMatrix& assoc,
                                          const std::vector<double>& powers,
                                          const NetworkConfig& cfg) {
  SinrBreakdown out;
  const int f_self = assoc.facility_of(user);
  if (f_self < cfg.num_bs) return out;  // not on a satellite
  const int k = f_self - cfg.num_bs;

  out.signal = ch.sat_gain(user, k) * powers[user];

  const int n = assoc.num_users();
  for (int other = 0; other < n; ++other) {
    if (other == user) continue;
    const int f = assoc.facility_of(other);
    if (f < 0) continue;
    const double g = ch.sat_gain(other, k);
    if (f < cfg.num_bs)
      out.tier += g * powers[other];
    else if (f == f_self)
      out.intra += g * powers[other];
    else
      out.cross += g * powers[other];
  }
  out.sinr = out.signal / (out.tier + out.intra + out.cross + cfg.noise_density);
  return out;
}

inline double bs_user_sinr(int user, const ChannelRealization& ch,
                           const AssociationMatrix& assoc,
                           const std::vector<double>& powers,
                           const NetworkConfig& cfg, bool sic_mode) {
  return bs_user_sinr_detail(user, ch, assoc, powers, cfg, sic_mode).sinr;
}

inline double sat_user_sinr(int user, const ChannelRealization& ch,
                            const AssociationMatrix& assoc,
                            const std::vector<double>& powers,
                            const NetworkConfig& cfg) {
  return sat_user_sinr_detail(user, ch, assoc, powers, cfg).sinr;
}

// Achievable spectral efficiency, b/s/Hz.
inline double link_rate(double sinr) { return std::log2(1.0 + sinr); }

// Energy efficiency of one served user. Terrestrial users pay a retrieval
// power on top of transmission (local cache on a hit, core fetch on a miss);
// satellite users are scored on transmit power alone. Zero rate is zero
// efficiency regardless of power; a positive rate with no positive power to
// divide by is a caller error.
inline double energy_efficiency(Tier tier, double rate, double p_transmit, int hit,
                                const NetworkConfig& cfg) {
  if (rate < 0) throw std::domain_error("energy_efficiency: negative rate");
  if (rate == 0.0) return 0.0;
  double denom = p_transmit;
  if (tier == Tier::bs)
    denom += hit ? cfg.p_retrieve_bs : cfg.p_retrieve_core;
  if (denom <= 0) throw std::domain_error("energy_efficiency: degenerate power");
  return rate / denom;
}

// Everything the simulator reports about one slot.
struct LinkMetrics {
  std::vector<double> sinr;
  std::vector<double> rate;
  std::vector<double> ee;       // per-user objective contribution
  std::vector<double> power;    // transmit watts
  std::vector<SinrBreakdown> breakdown;
  std::vector<uint8_t> hit;     // cache hit flag per user
  std::vector<uint8_t> associated;
  std::vector<double> facility_reward;  // sum of served users' ee
  double objective = 0.0;       // sum of facility rewards (== total ee)
  double hit_rate = 0.0;
  double delay_reward_sum = 0.0;
};

// Evaluates one slot: hits from the serving facility's pool, SINR with the
// current association/powers, per-user EE, and per-facility reward sums.
// The objective is accumulated facility-by-facility so it equals the sum of
// facility rewards bit-for-bit.
inline LinkMetrics system_metrics(const NetworkState& state,
                                  const ChannelRealization& ch,
                                  const NetworkConfig& cfg) {
  const int n = state.assoc.num_users();
  const int nf = cfg.num_facilities();
  if (static_cast<int>(state.beta.beta.size()) != n)
    throw std::invalid_argument("system_metrics: beta size mismatch");
  if (static_cast<int>(state.pools.size()) != nf)
    throw std::invalid_argument("system_metrics: pool count mismatch");
  if (static_cast<int>(state.requests.file.size()) != n)
    throw std::invalid_argument("system_metrics: request count mismatch");

  LinkMetrics m;
  m.sinr.assign(n, 0.0);
  m.rate.assign(n, 0.0);
  m.ee.assign(n, 0.0);
  m.breakdown.assign(n, SinrBreakdown{});
  m.hit.assign(n, 0);
  m.associated.assign(n, 0);
  m.facility_reward.assign(nf, 0.0);
  m.power = user_powers(cfg, state.assoc, state.beta);

  double hits = 0.0;
  for (int u = 0; u < n; ++u) {
    const int f = state.assoc.facility_of(u);
    if (f < 0) continue;  // unassociated: contributes nothing this slot
    m.associated[u] = 1;
    const Tier tier = tier_of(cfg, f);
    m.hit[u] = static_cast<uint8_t>(hit_indicator(state.requests.file[u], state.pools[f]));
    hits += m.hit[u];

    m.breakdown[u] = tier == Tier::bs
                         ? bs_user_sinr_detail(u, ch, state.assoc, m.power, cfg, cfg.sic_mode)
                         : sat_user_sinr_detail(u, ch, state.assoc, m.power, cfg);
    m.sinr[u] = m.breakdown[u].sinr;
    m.rate[u] = link_rate(m.sinr[u]);
    m.ee[u] = energy_efficiency(tier, m.rate[u], m.power[u], m.hit[u], cfg);
    m.facility_reward[f] += m.ee[u];
    m.delay_reward_sum += cache_delay_reward(
        m.hit[u], cfg.file_size_bits,
        tier == Tier::bs ? cfg.delay_bs_backhaul : cfg.delay_sat_backhaul);
  }
  for (int f = 0; f < nf; ++f) m.objective += m.facility_reward[f];
  m.hit_rate = n > 0 ? hits / n : 0.0;
  return m;
}

}  // namespace satnoma

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "satnoma/bessel.hpp"
#include "satnoma/config.hpp"
#include "satnoma/rng.hpp"
#include "satnoma/topology.hpp"

namespace satnoma {

// Satellite antenna pattern: gain toward a user seen at off-boresight angle
// theta, with beam shape
//
//   G(theta) = g_max * [ J1(L)/(2L) + 36 * J3(L)/L^3 ]^2,
//   L = 2.07123 * sin(theta) / sin(theta_3db).
//
// At boresight the bracket's analytic limit is 1/4 + 3/4 = 1, so theta == 0
// returns exactly g_max.
inline double sat_beam_gain(double theta, double theta_3db, double g_max) {
  if (!(theta >= 0.0) || theta >= M_PI / 2)
    throw std::domain_error("sat_beam_gain: theta must be in [0, pi/2)");
  if (theta_3db <= 0) throw std::domain_error("sat_beam_gain: theta_3db must be > 0");
  const double lambda = 2.07123 * std::sin(theta) / std::sin(theta_3db);
  if (lambda == 0.0) return g_max;
  const double bracket =
      bessel_j(1, lambda) / (2.0 * lambda) +
      36.0 * bessel_j(3, lambda) / (lambda * lambda * lambda);
  return g_max * bracket * bracket;
}

// One realized link. `gain` is the squared magnitude computed directly from
// the model quantities (never from the complex coefficient), so SINR values
// are independent of phase rotation to the last bit.
struct LinkCoeff {
  std::complex<double> h;
  double gain;
};

// Deterministic satellite downlink coefficient: free-space amplitude scaled
// by the beam gain toward the user and the terminal gain, with a fixed phase
// e^{j*pi*doppler}.
inline LinkCoeff sat_link_coeff(const NetworkConfig& cfg, double distance, double theta) {
  if (distance <= 0) throw std::domain_error("sat_link_coeff: distance must be > 0");
  const double g_tx = sat_beam_gain(theta, cfg.theta_3db, cfg.g_max);
  const double fspl_amp =
      cfg.light_speed / (4.0 * M_PI * cfg.carrier_freq * distance);
  const double gain = g_tx * cfg.rx_gain * fspl_amp * fspl_amp;
  const double mag = std::sqrt(gain);
  const double phase = M_PI * cfg.doppler;
  return {std::complex<double>(mag * std::cos(phase), mag * std::sin(phase)), gain};
}

// Rayleigh-faded terrestrial coefficient: squared magnitude of a standard
// complex Gaussian (unit-mean exponential) times d^(-xi) pathloss, uniform
// phase. Consumes a fixed number of rng draws per call.
inline LinkCoeff bs_link_coeff(Rng& rng, double distance, double pathloss_exponent) {
  if (distance <= 0) throw std::domain_error("bs_link_coeff: distance must be > 0");
  const double a = rng.gaussian();
  const double b = rng.gaussian();
  const double fade = 0.5 * (a * a + b * b);  // Exp(1)
  const double gain = fade * std::pow(distance, -pathloss_exponent);
  const double mag = std::sqrt(gain);
  const double phase = rng.uniform(0.0, 2.0 * M_PI);
  return {std::complex<double>(mag * std::cos(phase), mag * std::sin(phase)), gain};
}

// One time slot's channel state: every user x BS link (faded) and every
// user x satellite link (deterministic geometry). Gains are cached squared
// magnitudes; SINR math reads only these.
struct ChannelRealization {
  int users = 0, bs = 0, sats = 0;
  std::vector<std::complex<double>> h_bs;   // [user * bs + b]
  std::vector<std::complex<double>> h_sat;  // [user * sats + k]
  std::vector<double> gain_bs;
  std::vector<double> gain_sat;

  double bs_gain(int user, int b) const {
    return gain_bs[static_cast<std::size_t>(user) * bs + b];
  }
  double sat_gain(int user, int k) const {
    return gain_sat[static_cast<std::size_t>(user) * sats + k];
  }
};

// Fills the full link matrices. Pure in (cfg, topology, rng state): equal
// inputs give bit-identical realizations. Draw order is row-major over the
// terrestrial matrix; satellite links consume no randomness.
inline ChannelRealization realize_channels(const NetworkConfig& cfg,
                                           const Topology& topo, Rng& rng) {
  ChannelRealization ch;
  ch.users = cfg.num_users();
  ch.bs = cfg.num_bs;
  ch.sats = cfg.num_sat;
  ch.h_bs.resize(static_cast<std::size_t>(ch.users) * ch.bs);
  ch.gain_bs.resize(ch.h_bs.size());
  ch.h_sat.resize(static_cast<std::size_t>(ch.users) * ch.sats);
  ch.gain_sat.resize(ch.h_sat.size());

  for (int u = 0; u < ch.users; ++u) {
    for (int b = 0; b < ch.bs; ++b) {
      const std::size_t i = static_cast<std::size_t>(u) * ch.bs + b;
      LinkCoeff c = bs_link_coeff(rng, topo.dist_bs[i], cfg.pathloss_exponent);
      ch.h_bs[i] = c.h;
      ch.gain_bs[i] = c.gain;
    }
  }
  for (int u = 0; u < ch.users; ++u) {
    for (int k = 0; k < ch.sats; ++k) {
      const std::size_t i = static_cast<std::size_t>(u) * ch.sats + k;
      LinkCoeff c = sat_link_coeff(cfg, topo.dist_sat[i], topo.theta_sat[i]);
      ch.h_sat[i] = c.h;
      ch.gain_sat[i] = c.gain;
    }
  }
  return ch;
}

}  // namespace satnoma

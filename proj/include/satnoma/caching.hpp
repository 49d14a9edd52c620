#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "satnoma/config.hpp"
#include "satnoma/rng.hpp"

namespace satnoma {

enum class Tier { bs, sat };

// Zipf popularity over a 1-based file library: y_u proportional to u^(-eps).
// Probabilities are normalized with an extended-precision accumulator so the
// pmf sums to 1 within 1e-12 even for large libraries.
struct ZipfPopularity {
  std::vector<double> pmf;  // pmf[u-1] = P(request file u)
  std::vector<double> cdf;  // inclusive running sum, cdf.back() == 1

  int library_size() const { return static_cast<int>(pmf.size()); }
  double prob(int file) const { return pmf.at(file - 1); }
};

inline ZipfPopularity zipf_pmf(int library_size, double exponent) {
  if (library_size < 1) throw std::invalid_argument("zipf_pmf: library_size must be >= 1");
  if (exponent <= 0) throw std::invalid_argument("zipf_pmf: exponent must be > 0");
  ZipfPopularity z;
  z.pmf.resize(library_size);
  long double total = 0.0L;
  for (int u = 1; u <= library_size; ++u)
    total += std::pow(static_cast<long double>(u), -static_cast<long double>(exponent));
  z.cdf.resize(library_size);
  long double run = 0.0L;
  for (int u = 1; u <= library_size; ++u) {
    const long double p =
        std::pow(static_cast<long double>(u), -static_cast<long double>(exponent)) / total;
    z.pmf[u - 1] = static_cast<double>(p);
    run += p;
    z.cdf[u - 1] = static_cast<double>(run);
  }
  z.cdf[library_size - 1] = 1.0;  // guard the top against rounding
  return z;
}

// One facility's cached file set, kept sorted ascending. File ids are 1-based.
struct CachePool {
  int capacity = 0;
  std::vector<int> files;

  bool contains(int file) const {
    return std::binary_search(files.begin(), files.end(), file);
  }
};

inline CachePool make_pool(int capacity, std::vector<int> files) {
  std::sort(files.begin(), files.end());
  if (std::adjacent_find(files.begin(), files.end()) != files.end())
    throw std::invalid_argument("cache pool: duplicate file index");
  if (static_cast<int>(files.size()) > capacity)
    throw std::invalid_argument("cache pool: more files than capacity");
  return CachePool{capacity, std::move(files)};
}

// Per-slot content requests: one i.i.d. Zipf draw per user (inverse CDF,
// one uniform per user), plus the hit flags filled in once the serving
// facility is known.
struct RequestBatch {
  std::vector<int> file;      // requested file id per user
  std::vector<uint8_t> hit;   // 1 if served from the facility cache
};

inline RequestBatch sample_requests(const ZipfPopularity& pop, int num_users, Rng& rng) {
  RequestBatch b;
  b.file.resize(num_users);
  b.hit.assign(num_users, 0);
  for (int u = 0; u < num_users; ++u) {
    const double x = rng.uniform01();
    const auto it = std::upper_bound(pop.cdf.begin(), pop.cdf.end(), x);
    b.file[u] = static_cast<int>(it - pop.cdf.begin()) + 1;
    if (b.file[u] > pop.library_size()) b.file[u] = pop.library_size();
  }
  return b;
}

inline int hit_indicator(int file, const CachePool& pool) {
  return pool.contains(file) ? 1 : 0;
}

// Backhaul-time saved by a cache hit: J * s / T (bits per second of avoided
// fetch delay). Reporting metric only; it does not enter the trained reward.
inline double cache_delay_reward(int hit, double file_size_bits, double backhaul_delay_s) {
  if (backhaul_delay_s <= 0)
    throw std::invalid_argument("cache_delay_reward: delay must be > 0");
  return hit ? file_size_bits / backhaul_delay_s : 0.0;
}

inline double cache_hit_rate(const RequestBatch& batch) {
  if (batch.hit.empty())
    throw std::invalid_argument("cache_hit_rate: empty request batch");
  double s = 0.0;
  for (uint8_t h : batch.hit) s += h;
  return s / static_cast<double>(batch.hit.size());
}

// Total power drawn on behalf of one user in a slot: transmit power plus the
// content-retrieval power of the serving tier (local cache on a hit, core /
// gateway fetch on a miss).
inline double total_user_power(Tier tier, double p_transmit, int hit,
                               const NetworkConfig& cfg) {
  if (p_transmit < 0) throw std::invalid_argument("total_user_power: negative transmit power");
  if (tier == Tier::bs)
    return p_transmit + (hit ? cfg.p_retrieve_bs : cfg.p_retrieve_core);
  return p_transmit + (hit ? cfg.p_retrieve_sat : cfg.p_retrieve_sat_core);
}

}  // namespace satnoma

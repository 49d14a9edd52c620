#pragma once

#include <stdexcept>
#include <vector>

#include "satnoma/caching.hpp"
#include "satnoma/config.hpp"

namespace satnoma {

// Facility index space: 0..num_bs-1 are base stations, then satellites.
inline Tier tier_of(const NetworkConfig& cfg, int facility) {
  if (facility < 0 || facility >= cfg.num_facilities())
    throw std::out_of_range("tier_of: facility index out of range");
  return facility < cfg.num_bs ? Tier::bs : Tier::sat;
}

inline int serve_capacity_of(const NetworkConfig& cfg, int facility) {
  return tier_of(cfg, facility) == Tier::bs ? cfg.bs_capacity : cfg.sat_capacity;
}

inline int cache_capacity_of(const NetworkConfig& cfg, int facility) {
  return tier_of(cfg, facility) == Tier::bs ? cfg.bs_cache_capacity
                                            : cfg.sat_cache_capacity;
}

inline double p_max_of(const NetworkConfig& cfg, int facility) {
  return tier_of(cfg, facility) == Tier::bs ? cfg.p_bs_max : cfg.p_sat_max;
}

// Downlink power allocated to one user: its power factor times an equal
// share of the facility budget, so a full facility can never exceed p_max.
inline double transmit_power(double beta, double p_max, int capacity) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::domain_error("transmit_power: beta must be in [0, 1]");
  if (capacity < 1) throw std::invalid_argument("transmit_power: capacity must be >= 1");
  if (p_max <= 0) throw std::invalid_argument("transmit_power: p_max must be > 0");
  return beta * p_max / capacity;
}

// Binary user-facility association with at most one facility per user and a
// per-facility admission cap. Stored as a facility index per user (-1 when
// unassociated) with column counts maintained incrementally.
class AssociationMatrix {
 public:
  AssociationMatrix(int num_users, int num_facilities)
      : facility_(num_users, -1), column_(num_facilities, 0) {}

  int num_users() const { return static_cast<int>(facility_.size()); }
  int num_facilities() const { return static_cast<int>(column_.size()); }

  void assign(int user, int facility) {
    check_user(user);
    if (facility < 0 || facility >= num_facilities())
      throw std::out_of_range("AssociationMatrix::assign: facility out of range");
    clear(user);
    facility_[user] = facility;
    ++column_[facility];
  }

  void clear(int user) {
    check_user(user);
    if (facility_[user] >= 0) {
      --column_[facility_[user]];
      facility_[user] = -1;
    }
  }

  // -1 when the user is unassociated this slot
  int facility_of(int user) const {
    check_user(user);
    return facility_[user];
  }

  int alpha(int user, int facility) const {
    check_user(user);
    return facility_[user] == facility ? 1 : 0;
  }

  int row_sum(int user) const { return facility_of(user) >= 0 ? 1 : 0; }
  int column_count(int facility) const { return column_.at(facility); }

 private:
  void check_user(int user) const {
    if (user < 0 || user >= num_users())
      throw std::out_of_range("AssociationMatrix: user index out of range");
  }

  std::vector<int> facility_;
  std::vector<int> column_;
};

// Per-user power factors, each in [0, 1].
struct PowerControlVector {
  std::vector<double> beta;

  bool valid() const {
    for (double b : beta)
      if (!(b >= 0.0 && b <= 1.0)) return false;
    return true;
  }
};

// The simulator's mutable world for one slot.
struct NetworkState {
  AssociationMatrix assoc;
  PowerControlVector beta;
  std::vector<CachePool> pools;  // one per facility
  RequestBatch requests;

  NetworkState(int num_users, int num_facilities)
      : assoc(num_users, num_facilities) {}
};

// Per-user transmit powers implied by (association, beta): an unassociated
// user transmits nothing.
inline std::vector<double> user_powers(const NetworkConfig& cfg,
                                       const AssociationMatrix& assoc,
                                       const PowerControlVector& beta) {
  const int n = assoc.num_users();
  std::vector<double> p(n, 0.0);
  for (int u = 0; u < n; ++u) {
    const int f = assoc.facility_of(u);
    if (f < 0) continue;
    p[u] = transmit_power(beta.beta[u], p_max_of(cfg, f), serve_capacity_of(cfg, f));
  }
  return p;
}

}  // namespace satnoma

#pragma once

#include <vector>

#include "starnoma/noma_rates.hpp"

namespace starnoma {

// All vectors here are in decoding-slot order of one cluster.

inline void check_gains(const RVec& gamma, const RVec& r)
{
  if (gamma.size() == 0) throw UsageError("empty cluster");
  if (gamma.size() != r.size()) throw UsageError("gain and SINR-floor lengths differ");
  for (Eigen::Index k = 0; k < gamma.size(); ++k) {
    if (!(gamma(k) > 0.0)) throw DomainError("equivalent gain must be positive");
    if (r(k) < 0.0) throw DomainError("SINR floor must be nonnegative");
  }
}

// Smallest coefficients meeting every floor with equality (backward recursion)
inline RVec min_power_coefficients(const RVec& gamma, const RVec& r)
{
  check_gains(gamma, r);
  const Eigen::Index K = gamma.size();
  RVec rho(K);
  double later = 0.0;
  for (Eigen::Index k = K - 1; k >= 0; --k) {
    rho(k) = r(k) * (later + 1.0 / gamma(k));
    later += rho(k);
  }
  return rho;
}

struct Feasibility {
  bool feasible = false;
  double load = 0.0;    // sum_k r_k/Gamma_k prod_{i<k}(1 + r_i)
  double margin = 0.0;  // 1 - load
};

inline Feasibility check_feasibility(const RVec& gamma, const RVec& r)
{
  check_gains(gamma, r);
  Feasibility f;
  double prod = 1.0;
  for (Eigen::Index k = 0; k < gamma.size(); ++k) {
    f.load += r(k) / gamma(k) * prod;
    prod *= 1.0 + r(k);
  }
  f.margin = 1.0 - f.load;
  f.feasible = f.load <= 1.0;
  return f;
}

// Earlier users get exactly their floor, the last user takes the rest
inline RVec optimal_power(const RVec& gamma, const RVec& r)
{
  Feasibility f = check_feasibility(gamma, r);
  if (!f.feasible) throw InfeasibleError("QoS floors exceed the power budget");
  const Eigen::Index K = gamma.size();
  RVec rho(K);
  double used = 0.0;
  for (Eigen::Index k = 0; k + 1 < K; ++k) {
    rho(k) = r(k) / (1.0 + r(k)) * (1.0 - used + 1.0 / gamma(k));
    used += rho(k);
  }
  rho(K - 1) = 1.0 - used;
  return rho;
}

// Cluster sum rate from the per-slot SINRs
inline double cluster_objective(const RVec& rho, const RVec& gamma)
{
  const Eigen::Index K = gamma.size();
  if (rho.size() != K) throw UsageError("power and gain lengths differ");
  double total = 0.0, later = 0.0;
  for (Eigen::Index k = K - 1; k >= 0; --k) {
    total += log2_1p(gamma(k) * rho(k) / (gamma(k) * later + 1.0));
    later += rho(k);
  }
  return total;
}

// Per-slot rates of one cluster
inline RVec cluster_rates(const RVec& rho, const RVec& gamma)
{
  const Eigen::Index K = gamma.size();
  RVec out(K);
  double later = 0.0;
  for (Eigen::Index k = K - 1; k >= 0; --k) {
    out(k) = log2_1p(gamma(k) * rho(k) / (gamma(k) * later + 1.0));
    later += rho(k);
  }
  return out;
}

}  // namespace starnoma

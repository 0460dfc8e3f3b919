#pragma once

#include <vector>

#include "starnoma/noma_rates.hpp"
#include "starnoma/power_allocation.hpp"
#include "starnoma/star_ris.hpp"

namespace starnoma {

// Everything fixed during one optimisation run
struct Problem {
  const ChannelSet* channels = nullptr;
  Layout layout;
  double noise = 1.0;
  double p_max = 1.0;
  double r_min = 0.0;
  RisVariant variant;

  static Problem from_scenario(const Scenario& s, const ChannelSet& ch, RisKind kind = RisKind::star)
  {
    Problem p;
    p.channels = &ch;
    p.layout = s.layout;
    p.noise = s.noise_power;
    p.p_max = s.p_max;
    p.r_min = s.config.r_min;
    p.variant = RisVariant::make(kind, s.num_elements);
    return p;
  }
};

// Decision variables of the joint problem
struct SystemState {
  RVec rho;                // per user
  std::vector<CVec> w;     // per cluster
  StarCoefficients coeffs;
  DecodingOrder order;
};

inline BeamGains state_gains(const Problem& p, const SystemState& s)
{
  return beam_gains(combined_channels(*p.channels, s.coeffs), s.w, p.noise);
}

inline RateReport state_rates(const Problem& p, const SystemState& s)
{
  return evaluate_rates(state_gains(p, s), s.rho, s.order, p.layout);
}

// Gamma values of cluster c in the slot order of o
inline RVec slot_gains(const RVec& gamma, const DecodingOrder& o, const Layout& l, int c)
{
  RVec g(o.perm[c].size());
  for (size_t k = 0; k < o.perm[c].size(); ++k) g(k) = gamma(o.user(l, c, static_cast<int>(k)));
  return g;
}

// Per-user QoS floor for the convex subproblems: min(R_min, current rate)
inline RVec qos_floors(const Problem& p, const RateReport& r)
{
  RVec f(r.rate.size());
  for (Eigen::Index u = 0; u < f.size(); ++u) f(u) = std::max(0.0, std::min(p.r_min, r.rate(u)));
  return f;
}

// Total shortfall below R_min
inline double qos_deficit(const Problem& p, const RVec& rates)
{
  double d = 0.0;
  for (Eigen::Index u = 0; u < rates.size(); ++u) d += std::max(0.0, p.r_min - rates(u));
  return d;
}

inline bool meets_floors(const RVec& rates, const RVec& floors, double tol)
{
  for (Eigen::Index u = 0; u < rates.size(); ++u)
    if (rates(u) < floors(u) - tol) return false;
  return true;
}

// Noise-normalised slack point (A, B) of every user at a given state
struct SlackPoint {
  RVec A, B;
  bool degenerate = false;  // some |h w|^2 rho was zero and got clamped
};

inline SlackPoint init_slacks(const BeamGains& g, const RVec& rho, const DecodingOrder& o, const Layout& l)
{
  SlackPoint sp;
  sp.A.resize(l.num_users());
  sp.B.resize(l.num_users());
  for (int c = 0; c < l.num_clusters(); ++c)
    for (size_t k = 0; k < o.perm[c].size(); ++k) {
      const int u = o.user(l, c, static_cast<int>(k));
      double p = g.power(u, c) / g.noise;
      double sig = p * rho(u);
      if (!(sig > 1e-18)) {
        sig = 1e-18;
        sp.degenerate = true;
      }
      sp.A(u) = 1.0 / sig;
      sp.B(u) = p * later_power(rho, o, l, c, static_cast<int>(k)) + inter_cluster(g, u, c) / g.noise + 1.0;
    }
  return sp;
}

// Floors raised toward R_min wherever the expansion point already supports more
inline RVec ratchet_floors(const Problem& p, const RVec& floors, const SlackPoint& at)
{
  RVec f = floors;
  for (Eigen::Index u = 0; u < f.size(); ++u) {
    double r = std::log1p(1.0 / (at.A(u) * at.B(u))) * kLog2E;
    f(u) = std::max(f(u), std::min(p.r_min, r));
  }
  return f;
}

// First-order lower bound of log2(1 + 1/(AB)) around (A0, B0)
struct TaylorPlane {
  double f0 = 0.0, gA = 0.0, gB = 0.0, A0 = 0.0, B0 = 0.0;

  double operator()(double A, double B) const { return f0 + gA * (A - A0) + gB * (B - B0); }
};

inline TaylorPlane taylor_plane(double A0, double B0)
{
  if (!(A0 > 0.0) || !(B0 > 0.0)) throw DomainError("Taylor point must be positive");
  TaylorPlane t;
  t.A0 = A0;
  t.B0 = B0;
  t.f0 = log2_1p(1.0 / (A0 * B0));
  t.gA = -kLog2E / (A0 * (1.0 + A0 * B0));
  t.gB = -kLog2E / (B0 * (1.0 + A0 * B0));
  return t;
}

inline double taylor_bound(double A, double B, double A0, double B0) { return taylor_plane(A0, B0)(A, B); }

}  // namespace starnoma

#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "starnoma/scenario.hpp"

namespace starnoma {

inline double log2_1p(double x) { return std::log1p(x) * kLog2E; }

// |h_u w_c|^2 for every user u and beam c, plus the noise power
struct BeamGains {
  RMat power;  // K x C
  double noise = 1.0;
};

inline BeamGains beam_gains(const std::vector<CVec>& h, const std::vector<CVec>& w, double noise)
{
  BeamGains g;
  g.noise = noise;
  g.power.resize(static_cast<Eigen::Index>(h.size()), static_cast<Eigen::Index>(w.size()));
  for (size_t u = 0; u < h.size(); ++u)
    for (size_t c = 0; c < w.size(); ++c) g.power(u, c) = std::norm(h[u].dot(w[c].conjugate()));
  return g;
}

// perm[c][k] = local index of the user decoded k-th in cluster c
struct DecodingOrder {
  std::vector<std::vector<int>> perm;

  bool operator==(const DecodingOrder& o) const { return perm == o.perm; }
  bool operator!=(const DecodingOrder& o) const { return !(*this == o); }

  int user(const Layout& l, int c, int k) const { return l.users[c][perm[c][k]]; }

  static DecodingOrder identity(const Layout& l)
  {
    DecodingOrder o;
    for (const auto& us : l.users) {
      o.perm.emplace_back(us.size());
      std::iota(o.perm.back().begin(), o.perm.back().end(), 0);
    }
    return o;
  }
};

inline void check_order(const DecodingOrder& o, const Layout& l)
{
  if (o.perm.size() != l.users.size()) throw UsageError("decoding order has wrong cluster count");
  for (size_t c = 0; c < o.perm.size(); ++c) {
    std::vector<int> p = o.perm[c];
    std::sort(p.begin(), p.end());
    for (size_t k = 0; k < p.size(); ++k)
      if (p[k] != static_cast<int>(k) || p.size() != l.users[c].size())
        throw UsageError("decoding order is not a permutation");
  }
}

inline double inter_cluster(const BeamGains& g, int u, int c)
{
  double s = 0.0;
  for (Eigen::Index cp = 0; cp < g.power.cols(); ++cp)
    if (cp != c) s += g.power(u, cp);
  return s;
}

// Gamma_u: intra-cluster beam gain over inter-cluster interference plus noise
inline double equivalent_gain(const BeamGains& g, const Layout& l, int u)
{
  const int c = l.cluster_of.at(u);
  return g.power(u, c) / (inter_cluster(g, u, c) + g.noise);
}

inline RVec equivalent_gains(const BeamGains& g, const Layout& l)
{
  RVec gam(l.num_users());
  for (int u = 0; u < l.num_users(); ++u) gam(u) = equivalent_gain(g, l, u);
  return gam;
}

// Ascending Gamma inside each cluster; ties go to the lower user index
inline DecodingOrder decoding_order(const RVec& gamma, const Layout& l)
{
  DecodingOrder o;
  for (const auto& us : l.users) {
    std::vector<int> p(us.size());
    std::iota(p.begin(), p.end(), 0);
    std::stable_sort(p.begin(), p.end(), [&](int a, int b) { return gamma(us[a]) < gamma(us[b]); });
    o.perm.push_back(std::move(p));
  }
  return o;
}

inline double later_power(const RVec& rho, const DecodingOrder& o, const Layout& l, int c, int k)
{
  double s = 0.0;
  for (size_t n = k + 1; n < o.perm[c].size(); ++n) s += rho(o.user(l, c, static_cast<int>(n)));
  return s;
}

// SINR of the slot-j user while decoding the slot-k message, j >= k (j == k: own signal)
inline double sinr_at(const BeamGains& g, const RVec& rho, const DecodingOrder& o, const Layout& l, int c, int j,
                      int k)
{
  const int uj = o.user(l, c, j);
  const int uk = o.user(l, c, k);
  const double p = g.power(uj, c);
  return p * rho(uk) / (p * later_power(rho, o, l, c, k) + inter_cluster(g, uj, c) + g.noise);
}

inline double sinr_self(const BeamGains& g, const RVec& rho, const DecodingOrder& o, const Layout& l, int c, int k)
{
  return sinr_at(g, rho, o, l, c, k, k);
}

inline double sinr_cross(const BeamGains& g, const RVec& rho, const DecodingOrder& o, const Layout& l, int c, int j,
                         int k)
{
  if (j <= k) throw UsageError("sinr_cross needs a later decoder (j > k)");
  return sinr_at(g, rho, o, l, c, j, k);
}

struct RateReport {
  RVec sinr;  // own-signal SINR per user
  RVec rate;  // per user
  std::vector<RMat> cross;  // cross[c](j, k) = R_{j->k} (slot indices), j >= k
  double total = 0.0;
};

inline RateReport evaluate_rates(const BeamGains& g, const RVec& rho, const DecodingOrder& o, const Layout& l)
{
  check_order(o, l);
  if (rho.size() != l.num_users()) throw UsageError("power coefficient vector has wrong length");
  RateReport r;
  r.sinr.resize(l.num_users());
  r.rate.resize(l.num_users());
  for (int c = 0; c < l.num_clusters(); ++c) {
    const int kc = static_cast<int>(l.users[c].size());
    RMat cr = RMat::Zero(kc, kc);
    for (int j = 0; j < kc; ++j)
      for (int k = 0; k <= j; ++k) cr(j, k) = log2_1p(sinr_at(g, rho, o, l, c, j, k));
    for (int k = 0; k < kc; ++k) {
      const int u = o.user(l, c, k);
      r.sinr(u) = sinr_self(g, rho, o, l, c, k);
      r.rate(u) = cr(k, k);
    }
    r.cross.push_back(std::move(cr));
  }
  r.total = r.rate.sum();
  return r;
}

inline double sum_rate(const RateReport& r) { return r.total; }

struct SicViolation {
  int cluster, decoder_slot, message_slot;
  double margin;
};

// Later decoders must reach the own rate of every earlier message
inline std::vector<SicViolation> verify_sic(const RateReport& r, double tol = 1e-9)
{
  std::vector<SicViolation> v;
  for (size_t c = 0; c < r.cross.size(); ++c) {
    const auto& cr = r.cross[c];
    for (Eigen::Index j = 0; j < cr.rows(); ++j)
      for (Eigen::Index k = 0; k < j; ++k)
        if (cr(j, k) < cr(k, k) - tol)
          v.push_back({static_cast<int>(c), static_cast<int>(j), static_cast<int>(k), cr(j, k) - cr(k, k)});
  }
  return v;
}

}  // namespace starnoma

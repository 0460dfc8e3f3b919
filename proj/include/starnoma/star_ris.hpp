#pragma once

#include <utility>
#include <vector>

#include "starnoma/scenario.hpp"

namespace starnoma {

enum class RisKind {
  star,    // energy splitting, beta_t + beta_r = 1 per element
  split,   // conventional pair: first half transmits, rest reflects
  double_  // reflect and transmit with full amplitude on every element (upper bound)
};

inline const char* to_string(RisKind k)
{
  switch (k) {
    case RisKind::star: return "star";
    case RisKind::split: return "split";
    default: return "double";
  }
}

struct RisVariant {
  RisKind kind = RisKind::star;
  std::vector<bool> t_mask;  // elements that may transmit
  std::vector<bool> r_mask;  // elements that may reflect

  static RisVariant make(RisKind kind, int M)
  {
    if (M < 1) throw UsageError("RIS needs at least one element");
    RisVariant v;
    v.kind = kind;
    v.t_mask.assign(M, true);
    v.r_mask.assign(M, true);
    if (kind == RisKind::split) {
      const int mt = M / 2;
      for (int m = 0; m < M; ++m) {
        v.t_mask[m] = m < mt;
        v.r_mask[m] = m >= mt;
      }
    }
    return v;
  }

  int size() const { return static_cast<int>(t_mask.size()); }

  std::vector<int> elements(Side s) const
  {
    std::vector<int> e;
    const auto& mask = s == Side::transmission ? t_mask : r_mask;
    for (int m = 0; m < size(); ++m)
      if (mask[m]) e.push_back(m);
    return e;
  }
};

struct StarCoefficients {
  RVec beta_t, beta_r;    // amplitudes squared
  RVec theta_t, theta_r;  // phases in [0, 2pi)

  int size() const { return static_cast<int>(beta_t.size()); }
  const RVec& beta(Side s) const { return s == Side::transmission ? beta_t : beta_r; }
  const RVec& theta(Side s) const { return s == Side::transmission ? theta_t : theta_r; }
};

inline void check_coefficients(const StarCoefficients& c, const RisVariant& v, double tol = 1e-9)
{
  const int M = c.size();
  if (c.beta_r.size() != M || c.theta_t.size() != M || c.theta_r.size() != M || v.size() != M)
    throw ConstraintError("coefficient vectors have inconsistent sizes");
  for (int m = 0; m < M; ++m) {
    double bt = c.beta_t(m), br = c.beta_r(m);
    if (bt < -tol || bt > 1.0 + tol || br < -tol || br > 1.0 + tol)
      throw ConstraintError("amplitude coefficient outside [0, 1]");
    for (double th : {c.theta_t(m), c.theta_r(m)})
      if (!(th >= 0.0 && th < 2.0 * kPi + tol)) throw ConstraintError("phase outside [0, 2pi)");
    switch (v.kind) {
      case RisKind::star:
        if (std::abs(bt + br - 1.0) > tol) throw ConstraintError("beta_t + beta_r != 1");
        break;
      case RisKind::split:
        if (std::abs(bt - (v.t_mask[m] ? 1.0 : 0.0)) > tol || std::abs(br - (v.r_mask[m] ? 1.0 : 0.0)) > tol)
          throw ConstraintError("split element amplitude does not match its mode");
        break;
      case RisKind::double_:
        if (std::abs(bt - 1.0) > tol || std::abs(br - 1.0) > tol)
          throw ConstraintError("double RIS needs unit amplitudes");
        break;
    }
  }
}

// beta = 1/2 (or the variant's fixed amplitudes) with phases drawn uniformly
inline StarCoefficients initial_coefficients(const RisVariant& v, std::mt19937_64& rng)
{
  const int M = v.size();
  StarCoefficients c;
  c.beta_t.resize(M);
  c.beta_r.resize(M);
  c.theta_t.resize(M);
  c.theta_r.resize(M);
  std::uniform_real_distribution<double> ud(0.0, 2.0 * kPi);
  for (int m = 0; m < M; ++m) {
    switch (v.kind) {
      case RisKind::star: c.beta_t(m) = c.beta_r(m) = 0.5; break;
      case RisKind::split:
        c.beta_t(m) = v.t_mask[m] ? 1.0 : 0.0;
        c.beta_r(m) = v.r_mask[m] ? 1.0 : 0.0;
        break;
      case RisKind::double_: c.beta_t(m) = c.beta_r(m) = 1.0; break;
    }
    c.theta_t(m) = wrap_phase(ud(rng));
    c.theta_r(m) = wrap_phase(ud(rng));
  }
  return c;
}

// Theta_p = diag(sqrt(beta_p) e^{j theta_p})
inline CVec theta_diagonal(const StarCoefficients& c, Side s)
{
  const RVec& b = c.beta(s);
  const RVec& t = c.theta(s);
  CVec d(b.size());
  for (Eigen::Index m = 0; m < b.size(); ++m) d(m) = std::polar(std::sqrt(std::max(b(m), 0.0)), t(m));
  return d;
}

inline CMat theta_matrix(const StarCoefficients& c, Side s) { return theta_diagonal(c, s).asDiagonal(); }

// u_p with entries sqrt(beta) e^{-j theta}, so that |g^H Theta F w|^2 = |u^H diag(g^H) F w|^2
inline CVec passive_vector(const StarCoefficients& c, Side s) { return theta_diagonal(c, s).conjugate(); }

// Splits an incident signal into its transmitted and reflected parts
inline std::pair<cplx, cplx> split_signal(cplx s, double beta_t, double theta_t, double beta_r, double theta_r)
{
  if (beta_t < 0.0 || beta_t > 1.0 || beta_r < 0.0 || beta_r > 1.0)
    throw ConstraintError("amplitude coefficient outside [0, 1]");
  if (std::abs(beta_t + beta_r - 1.0) > 1e-9) throw ConstraintError("beta_t + beta_r != 1");
  return {std::polar(std::sqrt(beta_t), theta_t) * s, std::polar(std::sqrt(beta_r), theta_r) * s};
}

// Row vector h = g^H Theta F of one user (length N_T)
inline CVec combined_channel(const ChannelSet& ch, const StarCoefficients& c, int user)
{
  const Side s = ch.side.at(user);
  CVec t = ch.g[user].conjugate().cwiseProduct(theta_diagonal(c, s));
  return (t.transpose() * ch.F).transpose();
}

inline std::vector<CVec> combined_channels(const ChannelSet& ch, const StarCoefficients& c)
{
  std::vector<CVec> h;
  for (size_t u = 0; u < ch.g.size(); ++u) h.push_back(combined_channel(ch, c, static_cast<int>(u)));
  return h;
}

// diag(g^H) F w: cascaded channel seen by the passive vector (length M)
inline CVec cascaded(const ChannelSet& ch, int user, const CVec& w)
{
  return ch.g[user].conjugate().cwiseProduct(ch.F * w);
}

}  // namespace starnoma

#pragma once

#include <array>
#include <vector>

#include "starnoma/conic/solve.hpp"
#include "starnoma/system.hpp"

namespace starnoma {

struct TrSdp {
  conic::ConicProgram program;
  std::array<conic::MatrixVar, 2> U;         // T side, R side (id < 0 when absent)
  std::array<std::vector<int>, 2> elements;  // element index of each row of U
  std::vector<conic::ScalarVar> A, B, R;
  int rank_constraints = 0;
};

inline int side_index(Side s) { return s == Side::transmission ? 0 : 1; }

// Passive-beamforming subproblem over U_p = u_p u_p^H for fixed rho, w and order.
// eps > 0 adds e_p^H U_p e_p >= eps Tr(U_p) for each side.
inline TrSdp build_tr_sdp(const Problem& p, const std::vector<CVec>& w, const RVec& rho, const DecodingOrder& o,
                          const SlackPoint& at, const RVec& floors, double eps,
                          const std::array<CVec, 2>& lead = {})
{
  using namespace conic;
  const Layout& l = p.layout;
  const ChannelSet& ch = *p.channels;
  const int C = l.num_clusters();
  const int K = l.num_users();
  const RisVariant& v = p.variant;
  const int M = v.size();
  TrSdp s;
  auto& prog = s.program;

  std::array<bool, 2> used{false, false};
  for (int u = 0; u < K; ++u) used[side_index(ch.side[u])] = true;
  for (int q = 0; q < 2; ++q) {
    s.elements[q] = v.elements(q == 0 ? Side::transmission : Side::reflection);
    bool need = v.kind == RisKind::star ? true : used[q];
    if (need && !s.elements[q].empty()) s.U[q] = prog.add_psd(static_cast<int>(s.elements[q].size()), true, "passive");
  }

  // amplitude constraints on the diagonals
  if (v.kind == RisKind::star) {
    for (int m = 0; m < M; ++m)
      prog.add_constraint(entry_real(s.U[0], M, m, m) + entry_real(s.U[1], M, m, m), Relation::equal, 1.0,
                          "amplitude");
  } else {
    for (int q = 0; q < 2; ++q) {
      if (s.U[q].id < 0) continue;
      const int n = static_cast<int>(s.elements[q].size());
      for (int i = 0; i < n; ++i) prog.add_constraint(entry_real(s.U[q], n, i, i), Relation::equal, 1.0, "amplitude");
    }
  }

  if (eps > 0.0) {
    for (int q = 0; q < 2; ++q) {
      if (s.U[q].id < 0) continue;
      const int n = static_cast<int>(s.elements[q].size());
      if (lead[q].size() != n) throw UsageError("leading eigenvector has wrong size");
      CMat E = lead[q] * lead[q].adjoint() - eps * CMat::Identity(n, n);
      prog.add_constraint(trace_product(s.U[q], E), Relation::greater_equal, 0.0, "rank");
      ++s.rank_constraints;
    }
  }

  // per user: Tr(U H_bar(u, c')) = |h_u w_c'|^2 / noise
  auto gain_expr = [&](int u, int c) {
    const int q = side_index(ch.side[u]);
    CVec hb = cascaded(ch, u, w[c]);
    CVec hs(s.elements[q].size());
    for (size_t i = 0; i < s.elements[q].size(); ++i) hs(i) = hb(s.elements[q][i]);
    if (s.U[q].id < 0) return LinExpr(0.0);
    return trace_product(s.U[q], hs * hs.adjoint() / p.noise);
  };

  s.A.resize(K);
  s.B.resize(K);
  s.R.resize(K);
  LinExpr objective;
  for (int c = 0; c < C; ++c)
    for (size_t k = 0; k < o.perm[c].size(); ++k) {
      const int u = o.user(l, c, static_cast<int>(k));
      s.A[u] = prog.add_scalar(-kInf, kInf, "A");
      s.B[u] = prog.add_scalar(-kInf, kInf, "B");
      s.R[u] = prog.add_scalar(-kInf, kInf, "R");
      TaylorPlane t = taylor_plane(at.A(u), at.B(u));
      LinExpr taylor = LinExpr(s.R[u]) - t.gA * LinExpr(s.A[u]) - t.gB * LinExpr(s.B[u]);
      prog.add_constraint(taylor, Relation::less_equal, t.f0 - t.gA * t.A0 - t.gB * t.B0, "taylor");
      prog.add_constraint(LinExpr(s.R[u]), Relation::greater_equal, floors(u), "qos");
      LinExpr own = gain_expr(u, c);
      hyperbolic_as_psd(prog, LinExpr(s.A[u]), rho(u) * own);
      LinExpr interf = LinExpr(s.B[u]) - later_power(rho, o, l, c, static_cast<int>(k)) * own;
      for (int cp = 0; cp < C; ++cp)
        if (cp != c) interf -= gain_expr(u, cp);
      prog.add_constraint(interf, Relation::greater_equal, 1.0, "interference");
      objective += LinExpr(s.R[u]);
    }
  prog.maximize(objective);
  return s;
}

// Coefficients from (U_t, U_r): amplitudes from the diagonals, phases from the leading eigenvectors
inline StarCoefficients extract_coefficients(const TrSdp& s, const std::array<CMat, 2>& U, const RisVariant& v,
                                             const StarCoefficients& fallback)
{
  const int M = v.size();
  StarCoefficients c = fallback;
  std::array<RVec, 2> diag{RVec::Zero(M), RVec::Zero(M)};
  std::array<RVec, 2> phase{fallback.theta_t, fallback.theta_r};
  for (int q = 0; q < 2; ++q) {
    if (s.U[q].id < 0) continue;
    conic::EigPair ep = conic::max_eigpair(U[q]);
    for (size_t i = 0; i < s.elements[q].size(); ++i) {
      const int m = s.elements[q][i];
      diag[q](m) = std::max(U[q](i, i).real(), 0.0);
      cplx um = ep.vector(i);
      if (std::abs(um) > 1e-12) phase[q](m) = wrap_phase(-std::arg(um));
    }
  }
  c.theta_t = phase[0];
  c.theta_r = phase[1];
  for (int m = 0; m < M; ++m) {
    if (v.kind == RisKind::star) {
      double tot = diag[0](m) + diag[1](m);
      c.beta_t(m) = tot > 0.0 ? diag[0](m) / tot : 0.5;
      c.beta_r(m) = 1.0 - c.beta_t(m);
    } else {
      c.beta_t(m) = v.t_mask[m] ? 1.0 : 0.0;
      c.beta_r(m) = v.r_mask[m] ? 1.0 : 0.0;
    }
  }
  return c;
}

// min(1, lambda_max/Tr + step), worst side
inline double update_epsilon(const std::vector<CMat>& U, double step)
{
  double ratio = 1.0;
  for (const auto& X : U) ratio = std::min(ratio, conic::rank_one_ratio(X));
  return std::min(1.0, ratio + step);
}

struct RelaxOptions {
  double step = 0.1;   // initial increment of eps
  double rho = 1e-3;   // rank-one accuracy
  double tol = 1e-4;   // objective change
  int max_iters = 100;
  int max_failures = 8;  // consecutive failed subproblems before giving up
  double solver_tol = 1e-9;
};

struct RelaxTrace {
  double eps = 0.0;
  double ratio = 0.0;
  double objective = 0.0;
};

struct RelaxResult {
  StarCoefficients coeffs;
  std::vector<RelaxTrace> accepted;
  int solves = 0;
  int failures = 0;
  double final_eps = 0.0;
  double initial_rate = 0.0;
  double final_rate = 0.0;
  double min_eigenvalue = 0.0;
  bool rank_one = false;  // stopped with lambda_max/Tr >= 1 - rho on both sides
  bool improved = false;  // extracted coefficients raise the sum rate (QoS is left to the caller)
};

// Sequential rank-one relaxation over the STAR-RIS coefficients
inline RelaxResult sequential_relaxation(const Problem& p, const SystemState& start, const RelaxOptions& opt = {})
{
  const Layout& l = p.layout;
  RelaxResult res;
  res.coeffs = start.coeffs;
  BeamGains g0 = state_gains(p, start);
  RateReport r0 = evaluate_rates(g0, start.rho, start.order, l);
  res.initial_rate = res.final_rate = r0.total;
  const RVec floors = qos_floors(p, r0);
  SlackPoint at = init_slacks(g0, start.rho, start.order, l);

  // rank-one starting point u u^H
  std::array<CMat, 2> Uprev;
  {
    TrSdp shape = build_tr_sdp(p, start.w, start.rho, start.order, at, floors, 0.0);
    for (int q = 0; q < 2; ++q) {
      if (shape.U[q].id < 0) continue;
      CVec u = passive_vector(start.coeffs, q == 0 ? Side::transmission : Side::reflection);
      CVec us(shape.elements[q].size());
      for (size_t i = 0; i < shape.elements[q].size(); ++i) us(i) = u(shape.elements[q][i]);
      Uprev[q] = us * us.adjoint();
    }
  }

  double eps = 0.0;
  double step = opt.step;
  double prev_obj = -conic::kInf;
  double last_ratio = 0.0;
  bool have = false;
  int consecutive = 0;
  TrSdp last;
  std::array<CMat, 2> Ubest;
  for (int it = 0; it < opt.max_iters; ++it) {
    std::array<CVec, 2> lead;
    for (int q = 0; q < 2; ++q)
      if (Uprev[q].size() > 0) lead[q] = conic::max_eigpair(Uprev[q]).vector;
    TrSdp sdp = build_tr_sdp(p, start.w, start.rho, start.order, at, ratchet_floors(p, floors, at), eps, lead);
    conic::SolveResult sol = conic::solve(sdp.program, {opt.solver_tol, 100});
    ++res.solves;
    if (!sol.ok()) {
      ++res.failures;
      ++consecutive;
      if (!have || last_ratio >= 1.0 - opt.rho) break;
      step *= 0.5;
      if (consecutive >= opt.max_failures) break;
    } else {
      consecutive = 0;
      std::vector<CMat> Us;
      for (int q = 0; q < 2; ++q)
        if (sdp.U[q].id >= 0) {
          Uprev[q] = sol.value(sdp.U[q]);
          Us.push_back(Uprev[q]);
          res.min_eigenvalue = std::min(res.min_eigenvalue, conic::min_eigenvalue(Uprev[q]));
        }
      for (size_t u = 0; u < sdp.A.size(); ++u) {
        at.A(u) = std::max(sol.value(sdp.A[u]), 1e-300);
        at.B(u) = std::max(sol.value(sdp.B[u]), 1.0);
      }
      last_ratio = update_epsilon(Us, 0.0);
      res.accepted.push_back({eps, last_ratio, sol.objective});
      have = true;
      last = std::move(sdp);
      Ubest = Uprev;
      step = opt.step;
      bool converged = std::abs(sol.objective - prev_obj) <= opt.tol * std::max(1.0, std::abs(sol.objective));
      prev_obj = sol.objective;
      if (last_ratio >= 1.0 - opt.rho && converged) {
        res.rank_one = true;
        res.final_eps = std::min(1.0, last_ratio + step);
        break;
      }
    }
    if (have && last_ratio >= 1.0 - opt.rho) {
      // rank-one target met: hold eps while the objective settles
      eps = std::max(eps, 1.0 - opt.rho);
    } else {
      std::vector<CMat> Us;
      for (int q = 0; q < 2; ++q)
        if (Uprev[q].size() > 0) Us.push_back(Uprev[q]);
      eps = update_epsilon(Us, step);
    }
    res.final_eps = have ? std::min(1.0, last_ratio + step) : eps;
  }
  res.rank_one = have && last_ratio >= 1.0 - opt.rho;
  if (!have) return res;

  StarCoefficients cand = extract_coefficients(last, Ubest, p.variant, start.coeffs);
  SystemState trial = start;
  trial.coeffs = cand;
  RateReport r = state_rates(p, trial);
  if (r.total >= r0.total) {
    res.coeffs = cand;
    res.final_rate = r.total;
    res.improved = true;
  }
  return res;
}

}  // namespace starnoma

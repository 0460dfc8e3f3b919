#pragma once

#include <vector>

#include "starnoma/conic/solve.hpp"
#include "starnoma/system.hpp"

namespace starnoma {

struct ActiveSdp {
  conic::ConicProgram program;
  std::vector<conic::MatrixVar> W;  // per cluster
  std::vector<conic::ScalarVar> A, B, R;
};

// Beamforming subproblem for fixed rho, order and RIS coefficients.
// h holds the combined channel rows, all powers are normalised by the noise.
inline ActiveSdp build_active_sdp(const Problem& p, const std::vector<CVec>& h, const RVec& rho,
                                  const DecodingOrder& o, const SlackPoint& at, const RVec& floors)
{
  using namespace conic;
  const Layout& l = p.layout;
  const int C = l.num_clusters();
  const int K = l.num_users();
  const int N = static_cast<int>(h.at(0).size());
  ActiveSdp s;
  auto& prog = s.program;
  for (int c = 0; c < C; ++c) s.W.push_back(prog.add_psd(N, true, "beam"));
  s.A.resize(K);
  s.B.resize(K);
  s.R.resize(K);
  std::vector<CMat> H(K);
  for (int u = 0; u < K; ++u) {
    H[u] = h[u].conjugate() * h[u].transpose() / p.noise;
    s.A[u] = prog.add_scalar(-kInf, kInf, "A");
    s.B[u] = prog.add_scalar(-kInf, kInf, "B");
    s.R[u] = prog.add_scalar(-kInf, kInf, "R");
  }

  LinExpr objective;
  for (int c = 0; c < C; ++c)
    for (size_t k = 0; k < o.perm[c].size(); ++k) {
      const int u = o.user(l, c, static_cast<int>(k));
      TaylorPlane t = taylor_plane(at.A(u), at.B(u));
      LinExpr taylor = LinExpr(s.R[u]) - t.gA * LinExpr(s.A[u]) - t.gB * LinExpr(s.B[u]);
      prog.add_constraint(taylor, Relation::less_equal, t.f0 - t.gA * t.A0 - t.gB * t.B0, "taylor");
      prog.add_constraint(LinExpr(s.R[u]), Relation::greater_equal, floors(u), "qos");
      hyperbolic_as_psd(prog, LinExpr(s.A[u]), rho(u) * trace_product(s.W[c], H[u]));
      LinExpr interf = LinExpr(s.B[u]) - later_power(rho, o, l, c, static_cast<int>(k)) * trace_product(s.W[c], H[u]);
      for (int cp = 0; cp < C; ++cp)
        if (cp != c) interf -= trace_product(s.W[cp], H[u]);
      prog.add_constraint(interf, Relation::greater_equal, 1.0, "interference");
      objective += LinExpr(s.R[u]);
    }
  LinExpr power;
  for (int c = 0; c < C; ++c) power += trace_product(s.W[c], CMat::Identity(N, N));
  prog.add_constraint(power, Relation::less_equal, p.p_max, "power");
  prog.maximize(objective);
  return s;
}

struct ScaOptions {
  double tol = 1e-4;
  int max_iters = 50;
  double solver_tol = 1e-9;
};

enum class ScaStatus { converged, max_iters, solver_failure };

struct ScaResult {
  std::vector<CVec> beams;        // best true-rate iterate
  std::vector<double> objective;  // subproblem optimum per iteration
  std::vector<double> true_rate;  // sum rate at the extracted beams per iteration
  std::vector<double> rank_residual;
  double initial_rate = 0.0;
  double final_rate = 0.0;
  double min_eigenvalue = 0.0;  // over every returned block
  int iterations = 0;
  ScaStatus status = ScaStatus::converged;
  conic::SolveStatus last_solver_status = conic::SolveStatus::optimal;
};

// Successive convex approximation over the beamformers
inline ScaResult sca_active(const Problem& p, const SystemState& start, const ScaOptions& opt = {})
{
  const Layout& l = p.layout;
  std::vector<CVec> h = combined_channels(*p.channels, start.coeffs);
  ScaResult res;
  res.beams = start.w;
  BeamGains g0 = beam_gains(h, start.w, p.noise);
  RateReport r0 = evaluate_rates(g0, start.rho, start.order, l);
  res.initial_rate = res.final_rate = r0.total;
  const RVec floors = qos_floors(p, r0);
  SlackPoint at = init_slacks(g0, start.rho, start.order, l);
  double prev = -conic::kInf;

  for (int it = 0; it < opt.max_iters; ++it) {
    ActiveSdp sdp = build_active_sdp(p, h, start.rho, start.order, at, ratchet_floors(p, floors, at));
    conic::SolveResult sol = conic::solve(sdp.program, {opt.solver_tol, 100});
    res.last_solver_status = sol.status;
    if (!sol.ok()) {
      res.status = ScaStatus::solver_failure;
      break;
    }
    res.iterations = it + 1;
    std::vector<CVec> w;
    double worst = 0.0;
    for (const auto& Wv : sdp.W) {
      const CMat& Wc = sol.value(Wv);
      conic::RankOne r1 = conic::rank_one_extract(Wc);
      worst = std::max(worst, r1.residual);
      res.min_eigenvalue = std::min(res.min_eigenvalue, conic::min_eigenvalue(Wc));
      w.push_back(r1.vector);
    }
    BeamGains g = beam_gains(h, w, p.noise);
    RateReport r = evaluate_rates(g, start.rho, start.order, l);
    res.objective.push_back(sol.objective);
    res.true_rate.push_back(r.total);
    res.rank_residual.push_back(worst);
    if (r.total > res.final_rate && meets_floors(r.rate, floors, 1e-7)) {
      res.final_rate = r.total;
      res.beams = w;
    }
    // next expansion point: the subproblem's own slacks keep its solution feasible
    for (int u = 0; u < l.num_users(); ++u) {
      at.A(u) = std::max(sol.value(sdp.A[u]), 1e-300);
      at.B(u) = std::max(sol.value(sdp.B[u]), 1.0);
    }
    if (std::abs(sol.objective - prev) <= opt.tol * std::max(1.0, std::abs(sol.objective))) {
      res.status = ScaStatus::converged;
      return res;
    }
    prev = sol.objective;
    res.status = ScaStatus::max_iters;
  }
  return res;
}

}  // namespace starnoma

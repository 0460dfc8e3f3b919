#pragma once

// Primal-dual interior point method for
//   minimize c'x  s.t.  Gx + s = h,  Ax = b,  s in K
// with K a product of a nonnegative orthant and Hermitian PSD cones.
// Homogeneous self-dual embedding, Nesterov-Todd scaling, Mehrotra
// predictor-corrector.

#include <algorithm>
#include <cmath>
#include <limits>
#ifdef STARNOMA_IPM_TRACE
#include <cstdio>
#endif
#include <vector>

#include <Eigen/Cholesky>

#include "starnoma/conic/hermitian.hpp"

namespace starnoma::conic::detail {

struct BlockShape {
  int n = 0;
  bool complex = true;
};

inline int svec_size(int n, bool cx) { return cx ? n * n : n * (n + 1) / 2; }

struct ConeSpec {
  int lp = 0;
  std::vector<BlockShape> blocks;

  int dim() const
  {
    int d = lp;
    for (const auto& b : blocks) d += svec_size(b.n, b.complex);
    return d;
  }
  int degree() const
  {
    int d = lp;
    for (const auto& b : blocks) d += b.n;
    return d;
  }
  std::vector<int> offsets() const
  {
    std::vector<int> off;
    int o = lp;
    for (const auto& b : blocks) {
      off.push_back(o);
      o += svec_size(b.n, b.complex);
    }
    return off;
  }
};

inline constexpr double kSqrt2 = 1.41421356237309504880;

inline CMat unpack(const double* v, int n, bool cx)
{
  CMat X(n, n);
  for (int i = 0; i < n; ++i) X(i, i) = v[i];
  int k = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double re = v[k++] / kSqrt2;
      double im = cx ? v[k++] / kSqrt2 : 0.0;
      X(i, j) = cplx(re, im);
      X(j, i) = cplx(re, -im);
    }
  return X;
}

inline void pack(const CMat& X, double* v, bool cx)
{
  const int n = static_cast<int>(X.rows());
  for (int i = 0; i < n; ++i) v[i] = X(i, i).real();
  int k = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      cplx a = 0.5 * (X(i, j) + std::conj(X(j, i)));
      v[k++] = kSqrt2 * a.real();
      if (cx) v[k++] = kSqrt2 * a.imag();
    }
}

struct IpmData {
  RVec c;
  RMat G;
  RVec h;
  RMat A;  // p x n, p may be 0
  RVec b;
  ConeSpec cone;
};

struct IpmOptions {
  double feastol = 1e-7;
  double abstol = 1e-7;
  double reltol = 1e-7;
  int max_iters = 100;
  int stall_iters = 15;  // give up after this many iterations without halving the merit
  double inaccurate_factor = 100.0;  // best iterate within this multiple of the tolerances counts as reduced accuracy
};

enum class IpmStatus { optimal, optimal_inaccurate, primal_infeasible, dual_infeasible, max_iters, numerical_error };

struct IpmResult {
  IpmStatus status = IpmStatus::numerical_error;
  RVec x, y, s, z;
  double pres = 0.0, dres = 0.0, gap = 0.0, relgap = 0.0;
  double pcost = 0.0, dcost = 0.0;
  int iterations = 0;
};

class Scaling {
 public:
  Scaling(const ConeSpec& cone) : cone_(cone), off_(cone.offsets())
  {
    d_ = RVec::Ones(cone.lp);
    lam_lp_ = RVec::Ones(cone.lp);
    for (const auto& b : cone.blocks) {
      r_.push_back(CMat::Identity(b.n, b.n));
      rti_.push_back(CMat::Identity(b.n, b.n));
      lam_blk_.push_back(RVec::Ones(b.n));
    }
  }

  // Nesterov-Todd scaling point of interior s, z
  bool initialize(const RVec& s, const RVec& z)
  {
    for (int i = 0; i < cone_.lp; ++i) {
      if (!(s(i) > 0.0 && z(i) > 0.0)) return false;
      d_(i) = std::sqrt(s(i) / z(i));
      lam_lp_(i) = std::sqrt(s(i) * z(i));
    }
    for (size_t k = 0; k < cone_.blocks.size(); ++k) {
      const auto& b = cone_.blocks[k];
      CMat Ls, Lz;
      if (!cholesky(unpack(s.data() + off_[k], b.n, b.complex), b.complex, Ls)) return false;
      if (!cholesky(unpack(z.data() + off_[k], b.n, b.complex), b.complex, Lz)) return false;
      if (!set_block(k, Ls, Lz, CMat::Identity(b.n, b.n), CMat::Identity(b.n, b.n))) return false;
    }
    return true;
  }

  // Move to the scaling point of lambda + alpha*ds, lambda + alpha*dz (scaled space)
  bool update(const RVec& ds, const RVec& dz, double alpha)
  {
    for (int i = 0; i < cone_.lp; ++i) {
      double st = lam_lp_(i) + alpha * ds(i);
      double zt = lam_lp_(i) + alpha * dz(i);
      if (!(st > 0.0 && zt > 0.0)) return false;
      d_(i) *= std::sqrt(st / zt);
      lam_lp_(i) = std::sqrt(st * zt);
    }
    for (size_t k = 0; k < cone_.blocks.size(); ++k) {
      const auto& b = cone_.blocks[k];
      RVec lh = lam_blk_[k].cwiseSqrt();
      RVec lhi = lh.cwiseInverse();
      auto factor = [&](const RVec& v, CMat& L) {
        CMat D = unpack(v.data() + off_[k], b.n, b.complex);
        CMat M = lhi.asDiagonal() * D * lhi.asDiagonal();
        HermEig e = herm_eig(M, b.complex);
        RVec f(b.n);
        for (int i = 0; i < b.n; ++i) {
          double t = 1.0 + alpha * e.values(i);
          if (!(t > 0.0)) return false;
          f(i) = std::sqrt(t);
        }
        L = lh.asDiagonal() * e.vectors * f.asDiagonal();
        return true;
      };
      CMat Ls, Lz;
      if (!factor(ds, Ls) || !factor(dz, Lz)) return false;
      if (!set_block(k, Ls, Lz, r_[k], rti_[k])) return false;
    }
    return true;
  }

  // W v, W^T v, W^{-1} v, W^{-T} v
  RVec apply(const RVec& v, bool trans, bool inverse) const
  {
    RVec out(v.size());
    for (int i = 0; i < cone_.lp; ++i) out(i) = inverse ? v(i) / d_(i) : v(i) * d_(i);
    for (size_t k = 0; k < cone_.blocks.size(); ++k) {
      const auto& b = cone_.blocks[k];
      CMat X = unpack(v.data() + off_[k], b.n, b.complex);
      CMat Y;
      if (!inverse && !trans) Y = r_[k].adjoint() * X * r_[k];
      else if (!inverse && trans) Y = r_[k] * X * r_[k].adjoint();
      else if (inverse && !trans) Y = rti_[k] * X * rti_[k].adjoint();
      else Y = rti_[k].adjoint() * X * rti_[k];
      pack(Y, out.data() + off_[k], b.complex);
    }
    return out;
  }

  // W^{-T} applied to the columns of G, skipping zero block segments
  RMat apply_inv_trans_cols(const RMat& G) const
  {
    RMat out(G.rows(), G.cols());
    for (Eigen::Index j = 0; j < G.cols(); ++j) {
      for (int i = 0; i < cone_.lp; ++i) out(i, j) = G(i, j) / d_(i);
      for (size_t k = 0; k < cone_.blocks.size(); ++k) {
        const auto& b = cone_.blocks[k];
        const int len = svec_size(b.n, b.complex);
        auto seg = G.col(j).segment(off_[k], len);
        if (seg.squaredNorm() == 0.0) {
          out.col(j).segment(off_[k], len).setZero();
          continue;
        }
        CMat X = unpack(G.col(j).data() + off_[k], b.n, b.complex);
        CMat Y = rti_[k].adjoint() * X * rti_[k];
        pack(Y, out.col(j).data() + off_[k], b.complex);
      }
    }
    return out;
  }

  // lambda as a cone element
  RVec lambda() const
  {
    RVec out = RVec::Zero(cone_.dim());
    out.head(cone_.lp) = lam_lp_;
    for (size_t k = 0; k < cone_.blocks.size(); ++k) {
      const auto& b = cone_.blocks[k];
      CMat X = CMat::Zero(b.n, b.n);
      for (int i = 0; i < b.n; ++i) X(i, i) = lam_blk_[k](i);
      pack(X, out.data() + off_[k], b.complex);
    }
    return out;
  }

  double lambda_sqnorm() const
  {
    double t = lam_lp_.squaredNorm();
    for (const auto& l : lam_blk_) t += l.squaredNorm();
    return t;
  }

  // lambda o v  (inverse: lambda \o v)
  RVec lambda_prod(const RVec& v, bool inverse) const
  {
    RVec out(v.size());
    for (int i = 0; i < cone_.lp; ++i) out(i) = inverse ? v(i) / lam_lp_(i) : v(i) * lam_lp_(i);
    for (size_t k = 0; k < cone_.blocks.size(); ++k) {
      const auto& b = cone_.blocks[k];
      CMat X = unpack(v.data() + off_[k], b.n, b.complex);
      const RVec& l = lam_blk_[k];
      for (int i = 0; i < b.n; ++i)
        for (int j = 0; j < b.n; ++j) {
          double m = 0.5 * (l(i) + l(j));
          X(i, j) = inverse ? X(i, j) / m : X(i, j) * m;
        }
      pack(X, out.data() + off_[k], b.complex);
    }
    return out;
  }

  // Largest alpha with lambda + alpha v in the cone
  double max_step(const RVec& v) const
  {
    double a = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cone_.lp; ++i)
      if (v(i) < 0.0) a = std::min(a, -lam_lp_(i) / v(i));
    for (size_t k = 0; k < cone_.blocks.size(); ++k) {
      const auto& b = cone_.blocks[k];
      RVec lhi = lam_blk_[k].cwiseSqrt().cwiseInverse();
      CMat X = unpack(v.data() + off_[k], b.n, b.complex);
      double mn = herm_eigvals(lhi.asDiagonal() * X * lhi.asDiagonal(), b.complex)(0);
      if (mn < 0.0) a = std::min(a, -1.0 / mn);
    }
    return a;
  }

 private:
  bool set_block(size_t k, const CMat& Ls, const CMat& Lz, const CMat& r0, const CMat& rti0)
  {
    const bool cx = cone_.blocks[k].complex;
    Svd sv = svd(Lz.adjoint() * Ls, cx);
    if (!(sv.s.minCoeff() > 0.0)) return false;
    RVec isq = sv.s.cwiseSqrt().cwiseInverse();
    r_[k] = r0 * Ls * sv.V * isq.asDiagonal();
    rti_[k] = rti0 * Lz * sv.U * isq.asDiagonal();
    lam_blk_[k] = sv.s;
    return true;
  }

  ConeSpec cone_;
  std::vector<int> off_;
  RVec d_, lam_lp_;
  std::vector<CMat> r_, rti_;
  std::vector<RVec> lam_blk_;
};

// Jordan product u o v
inline RVec cone_prod(const ConeSpec& cone, const RVec& u, const RVec& v)
{
  RVec out(u.size());
  out.head(cone.lp) = u.head(cone.lp).cwiseProduct(v.head(cone.lp));
  auto off = cone.offsets();
  for (size_t k = 0; k < cone.blocks.size(); ++k) {
    const auto& b = cone.blocks[k];
    CMat U = unpack(u.data() + off[k], b.n, b.complex);
    CMat V = unpack(v.data() + off[k], b.n, b.complex);
    pack(0.5 * (U * V + V * U), out.data() + off[k], b.complex);
  }
  return out;
}

inline RVec cone_identity(const ConeSpec& cone)
{
  RVec out = RVec::Zero(cone.dim());
  out.head(cone.lp).setOnes();
  auto off = cone.offsets();
  for (size_t k = 0; k < cone.blocks.size(); ++k) {
    const auto& b = cone.blocks[k];
    for (int i = 0; i < b.n; ++i) out(off[k] + i) = 1.0;
  }
  return out;
}

// Smallest eigenvalue over all cone components
inline double cone_min(const ConeSpec& cone, const RVec& v)
{
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cone.lp; ++i) m = std::min(m, v(i));
  auto off = cone.offsets();
  for (size_t k = 0; k < cone.blocks.size(); ++k) {
    const auto& b = cone.blocks[k];
    m = std::min(m, herm_eigvals(unpack(v.data() + off[k], b.n, b.complex), b.complex)(0));
  }
  return m;
}

class KktSolver {
 public:
  KktSolver(const IpmData& d) : d_(d) {}

  bool factor(const Scaling& W)
  {
    W_ = &W;
    Gs_ = W.apply_inv_trans_cols(d_.G);
    // H + A'A stays definite when H alone is singular on free directions
    RMat H = Gs_.transpose() * Gs_;
    if (d_.A.rows() > 0) H += d_.A.transpose() * d_.A;
    const Eigen::Index n = H.cols();
    double scale = std::max(1e-300, H.diagonal().cwiseAbs().maxCoeff());
    double reg = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
      RMat Hr = H;
      if (reg > 0.0) Hr.diagonal().array() += reg;
      Hfac_.compute(Hr);
      if (Hfac_.info() == Eigen::Success) break;
      reg = (reg == 0.0) ? 1e-14 * scale : reg * 100.0;
      if (attempt == 7) return false;
    }
    (void)n;
    if (d_.A.rows() > 0) {
      HinvAt_ = Hfac_.solve(d_.A.transpose());
      RMat S = d_.A * HinvAt_;
      Sfac_.compute(S);
      if (Sfac_.info() != Eigen::Success) return false;
    }
    return true;
  }

  // Solves [0 A' G'; A 0 0; G 0 -W'W] [x; y; z] = [r1; r2; r3], returns W z
  void solve(const RVec& r1, const RVec& r2, const RVec& r3, RVec& x, RVec& y, RVec& zs, int refine = 2) const
  {
    solve_once(r1, r2, r3, x, y, zs);
    for (int i = 0; i < refine; ++i) {
      RVec e1 = r1 - Gs_.transpose() * zs;
      if (d_.A.rows() > 0) e1 -= d_.A.transpose() * y;
      RVec e2 = d_.A.rows() > 0 ? RVec(r2 - d_.A * x) : RVec(0);
      RVec e3 = r3 - d_.G * x + W_->apply(zs, true, false);
      RVec dx, dy, dz;
      solve_once(e1, e2, e3, dx, dy, dz);
      x += dx;
      if (d_.A.rows() > 0) y += dy;
      zs += dz;
    }
  }

 private:
  void solve_once(const RVec& r1, const RVec& r2, const RVec& r3, RVec& x, RVec& y, RVec& zs) const
  {
    RVec t = W_->apply(r3, true, true);
    RVec rhs = r1 + Gs_.transpose() * t;
    if (d_.A.rows() > 0) {
      rhs += d_.A.transpose() * r2;
      RVec Hr = Hfac_.solve(rhs);
      y = Sfac_.solve(d_.A * Hr - r2);
      x = Hr - HinvAt_ * y;
    } else {
      y = RVec(0);
      x = Hfac_.solve(rhs);
    }
    zs = Gs_ * x - t;
  }

  const IpmData& d_;
  const Scaling* W_ = nullptr;
  RMat Gs_;
  Eigen::LLT<RMat> Hfac_;
  RMat HinvAt_;
  Eigen::LLT<RMat> Sfac_;
};

inline IpmResult ipm_solve(const IpmData& d, const IpmOptions& opt)
{
  const ConeSpec& cone = d.cone;
  const int cdim = cone.dim();
  const int nu = cone.degree();
  const double eta = 0.0;
  const double step = 0.99;
  const double expon = 3.0;

  IpmResult res;
  const double resx0 = std::max(1.0, d.c.norm());
  const double resy0 = std::max(1.0, d.b.norm());
  const double resz0 = std::max(1.0, d.h.norm());

  Scaling W(cone);
  KktSolver kkt(d);
  if (!kkt.factor(W)) return res;

  RVec x, y, s, z, zs;
  const RVec zero_n = RVec::Zero(d.c.size());
  const RVec zero_p = RVec::Zero(d.b.size());
  const RVec zero_c = RVec::Zero(cdim);
  {
    RVec y0;
    kkt.solve(zero_n, d.b, d.h, x, y0, zs);
    s = -zs;
    RVec x0;
    kkt.solve(-d.c, zero_p, zero_c, x0, y, z);
  }
  const RVec e = cone_identity(cone);
  {
    double nrms = std::max(1.0, s.norm());
    double ts = -cone_min(cone, s);
    if (ts >= -1e-8 * nrms) s += (1.0 + ts) * e;
    double nrmz = std::max(1.0, z.norm());
    double tz = -cone_min(cone, z);
    if (tz >= -1e-8 * nrmz) z += (1.0 + tz) * e;
  }
  double tau = 1.0, kappa = 1.0;

  RVec dx, dy, dzs, dss, ux, uy, uzs, vx, vy, vzs;
  double dtau = 0.0, dkappa = 0.0;
  int stalled = 0;
  IpmResult best;
  double best_merit = std::numeric_limits<double>::infinity();
  double progress_merit = best_merit;
  int progress_iter = 0;
  auto fail = [&](IpmStatus st) {
    IpmResult out = best_merit < std::numeric_limits<double>::infinity() ? best : res;
    const double f = opt.inaccurate_factor;
    bool close = out.pres <= f * opt.feastol && out.dres <= f * opt.feastol &&
                 (out.gap <= f * opt.abstol || out.relgap <= f * opt.reltol);
    out.status = close ? IpmStatus::optimal_inaccurate : st;
    out.iterations = res.iterations;
    return out;
  };

  for (int iter = 0; iter <= opt.max_iters; ++iter) {
    res.iterations = iter;
    const RVec r1 = (d.A.rows() > 0 ? RVec(d.A.transpose() * y) : zero_n) + d.G.transpose() * z + d.c * tau;
    const RVec r2 = (d.A.rows() > 0 ? RVec(d.A * x) : zero_p) - d.b * tau;
    const RVec r3 = d.G * x + s - d.h * tau;
    const double cx = d.c.dot(x), by = d.b.dot(y), hz = d.h.dot(z);
    const double r4 = cx + by + hz + kappa;
    const double gap = s.dot(z);
    const double mu = (gap + tau * kappa) / (nu + 1);

    res.pcost = cx / tau;
    res.dcost = -(hz + by) / tau;
    res.gap = gap / (tau * tau);
    res.pres = std::max(r2.norm() / resy0, r3.norm() / resz0) / tau;
    res.dres = r1.norm() / resx0 / tau;
    res.relgap = std::numeric_limits<double>::infinity();
    if (res.pcost < 0.0) res.relgap = res.gap / -res.pcost;
    else if (res.dcost > 0.0) res.relgap = res.gap / res.dcost;
    res.x = x / tau;
    res.y = y / tau;
    res.s = s / tau;
    res.z = z / tau;

    const double merit = std::max({res.pres, res.dres, std::min(res.gap, res.relgap)});
    if (merit < best_merit) {
      if (merit < 0.5 * progress_merit) {
        progress_merit = merit;
        progress_iter = iter;
      }
      best_merit = merit;
      best = res;
    }

    double pinfres = std::numeric_limits<double>::infinity();
    double dinfres = std::numeric_limits<double>::infinity();
    if (hz + by < 0.0) {
      RVec t = d.G.transpose() * z;
      if (d.A.rows() > 0) t += d.A.transpose() * y;
      pinfres = t.norm() / resx0 / -(hz + by);
    }
    if (cx < 0.0) {
      double a = d.A.rows() > 0 ? (d.A * x).norm() / resy0 : 0.0;
      dinfres = std::max(a, (d.G * x + s).norm() / resz0) / -cx;
    }

#ifdef STARNOMA_IPM_TRACE
    std::fprintf(stderr, "%3d pc %.3e dc %.3e pres %.2e dres %.2e gap %.2e tau %.2e kap %.2e cx %.2e hzby %.2e pinf %.2e dinf %.2e\n",
                 iter, res.pcost, res.dcost, res.pres, res.dres, res.gap, tau, kappa, cx, hz + by, pinfres, dinfres);
#endif
    if (res.pres <= opt.feastol && res.dres <= opt.feastol &&
        (res.gap <= opt.abstol || res.relgap <= opt.reltol)) {
      res.status = IpmStatus::optimal;
      return res;
    }
    if (pinfres <= opt.feastol) {
      res.status = IpmStatus::primal_infeasible;
      res.y = y / -(hz + by);
      res.z = z / -(hz + by);
      return res;
    }
    if (dinfres <= opt.feastol) {
      res.status = IpmStatus::dual_infeasible;
      res.x = x / -cx;
      res.s = s / -cx;
      return res;
    }
    if (iter == opt.max_iters) return fail(IpmStatus::max_iters);
    if (iter - progress_iter > opt.stall_iters) return fail(IpmStatus::numerical_error);

    if (iter == 0) {
      if (!W.initialize(s, z)) return fail(IpmStatus::numerical_error);
    }
    if (!kkt.factor(W)) return fail(IpmStatus::numerical_error);
    const RVec th = W.apply(d.h, true, true);
    kkt.solve(-d.c, d.b, d.h, vx, vy, vzs);
    const double denom = d.c.dot(vx) + d.b.dot(vy) + th.dot(vzs) - kappa / tau;

    const RVec lam = W.lambda();
    const RVec lamsq = W.lambda_prod(lam, false);
    double sigma = 0.0;
    double alpha = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      RVec rhs_s = -lamsq;
      double rhs_k = -tau * kappa;
      if (pass == 1) {
        rhs_s += -cone_prod(cone, dss, dzs) + sigma * mu * e;
        rhs_k += -dtau * dkappa + sigma * mu;
      }
      RVec q = W.lambda_prod(rhs_s, true);
      RVec b1 = -(1.0 - eta) * r1;
      RVec b2 = -(1.0 - eta) * r2;
      RVec b3 = -(1.0 - eta) * r3 - W.apply(q, true, false);
      double b4 = -(1.0 - eta) * r4 - rhs_k / tau;
      kkt.solve(b1, b2, b3, ux, uy, uzs);
      dtau = (b4 - d.c.dot(ux) - d.b.dot(uy) - th.dot(uzs)) / denom;
      dx = ux + dtau * vx;
      dy = uy + dtau * vy;
      dzs = uzs + dtau * vzs;
      dss = q - dzs;
      dkappa = (rhs_k - kappa * dtau) / tau;

      double amax = std::min(W.max_step(dss), W.max_step(dzs));
      if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
      if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
      if (pass == 0) {
        double aaff = std::min(1.0, amax);
        sigma = std::pow(1.0 - aaff, expon);
      } else {
        alpha = std::min(1.0, step * amax);
      }
    }

    if (!std::isfinite(alpha) || !dx.allFinite() || !dzs.allFinite()) return fail(IpmStatus::numerical_error);
    stalled = alpha < 1e-10 ? stalled + 1 : 0;
    if (stalled >= 3) return fail(IpmStatus::numerical_error);

    x += alpha * dx;
    y += alpha * dy;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    if (!W.update(dss, dzs, alpha)) return fail(IpmStatus::numerical_error);
    const RVec lnew = W.lambda();
    s = W.apply(lnew, true, false);
    z = W.apply(lnew, false, true);
  }
  return fail(IpmStatus::max_iters);
}

}  // namespace starnoma::conic::detail

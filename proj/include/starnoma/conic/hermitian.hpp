#pragma once

#include <algorithm>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "starnoma/common.hpp"

namespace starnoma::conic {

inline CMat hermitian_part(const CMat& X) { return 0.5 * (X + X.adjoint()); }

inline void require_hermitian(const CMat& X, double tol = 1e-8)
{
  if (X.rows() != X.cols()) throw DomainError("matrix is not square");
  double scale = std::max(1.0, X.norm());
  if ((X - X.adjoint()).norm() > tol * scale) throw DomainError("matrix is not Hermitian");
}

struct EigPair {
  double value = 0.0;
  CVec vector;
};

// Largest eigenvalue and its unit eigenvector
inline EigPair max_eigpair(const CMat& X)
{
  require_hermitian(X);
  if (X.rows() == 0) throw DomainError("empty matrix");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(X));
  if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
  const Eigen::Index n = X.rows();
  return {es.eigenvalues()(n - 1), es.eigenvectors().col(n - 1)};
}

inline double min_eigenvalue(const CMat& X)
{
  if (X.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(X), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// lambda_max / Tr(X); 1 for rank-one PSD matrices
inline double rank_one_ratio(const CMat& X)
{
  double tr = X.trace().real();
  if (tr <= 0.0) return 0.0;
  return max_eigpair(X).value / tr;
}

struct RankOne {
  CVec vector;
  double residual = 1.0;  // 1 - lambda_max / Tr
};

// w = sqrt(lambda_max) e_max with the first nonzero entry made real nonnegative
inline RankOne rank_one_extract(const CMat& X)
{
  EigPair ep = max_eigpair(X);
  RankOne out;
  double tr = X.trace().real();
  double lam = std::max(ep.value, 0.0);
  CVec v = std::sqrt(lam) * ep.vector;
  double vmax = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12 * std::max(vmax, 1e-300)) {
      v *= std::conj(v(i)) / std::abs(v(i));
      break;
    }
  }
  out.vector = v;
  out.residual = tr > 0.0 ? 1.0 - lam / tr : 1.0;
  return out;
}

namespace detail {

struct HermEig {
  RVec values;
  CMat vectors;
};

// Real blocks stay real: decompositions run on the real part
inline HermEig herm_eig(const CMat& X, bool cx)
{
  HermEig out;
  if (cx) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(X));
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
  } else {
    RMat Xr = 0.5 * (X.real() + X.real().transpose());
    Eigen::SelfAdjointEigenSolver<RMat> es(Xr);
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors().cast<cplx>();
  }
  return out;
}

inline RVec herm_eigvals(const CMat& X, bool cx)
{
  if (cx) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(X), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }
  RMat Xr = 0.5 * (X.real() + X.real().transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(Xr, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

struct Svd {
  CMat U;
  RVec s;
  CMat V;
};

inline Svd svd(const CMat& X, bool cx)
{
  Svd out;
  if (cx) {
    Eigen::JacobiSVD<CMat> sv(X, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.U = sv.matrixU();
    out.s = sv.singularValues();
    out.V = sv.matrixV();
  } else {
    Eigen::JacobiSVD<RMat> sv(X.real(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.U = sv.matrixU().cast<cplx>();
    out.s = sv.singularValues();
    out.V = sv.matrixV().cast<cplx>();
  }
  return out;
}

// Lower factor L with X = L L^H; returns false if X is not positive definite
inline bool cholesky(const CMat& X, bool cx, CMat& L)
{
  if (cx) {
    Eigen::LLT<CMat> llt(hermitian_part(X));
    if (llt.info() != Eigen::Success) return false;
    L = llt.matrixL();
  } else {
    RMat Xr = 0.5 * (X.real() + X.real().transpose());
    Eigen::LLT<RMat> llt(Xr);
    if (llt.info() != Eigen::Success) return false;
    L = RMat(llt.matrixL()).cast<cplx>();
  }
  return true;
}

}  // namespace detail
}  // namespace starnoma::conic

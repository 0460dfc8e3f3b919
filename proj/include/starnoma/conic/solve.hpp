#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "starnoma/conic/ipm.hpp"
#include "starnoma/conic/program.hpp"

namespace starnoma::conic {

enum class SolveStatus { optimal, optimal_inaccurate, infeasible, unbounded, max_iters, numerical_error };

inline const char* to_string(SolveStatus s)
{
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::optimal_inaccurate: return "optimal_inaccurate";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iters: return "max_iters";
    default: return "numerical_error";
  }
}

struct SolveOptions {
  double tol = 1e-7;
  int max_iters = 100;
};

struct SolveResult {
  SolveStatus status = SolveStatus::numerical_error;
  double objective = 0.0;
  double dual_objective = 0.0;
  std::vector<double> scalars;
  std::vector<CMat> blocks;
  std::vector<double> multipliers;  // one per constraint, zero for dropped duplicates
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;

  double value(ScalarVar v) const { return scalars.at(v.id); }
  const CMat& value(MatrixVar X) const { return blocks.at(X.id); }
  bool ok() const { return status == SolveStatus::optimal || status == SolveStatus::optimal_inaccurate; }
};

namespace detail {

// Equality standard form
//   minimize <C,X> + cf'xf  s.t.  <A_i,X> + F_i xf = b_i,  X in K
struct StandardForm {
  ConeSpec cone;
  RMat rows;   // m x dim
  RMat frows;  // m x nf
  RVec rhs;
  RVec cost;
  RVec fcost;
  double offset = 0.0;
  double sign = 1.0;
  std::vector<int> row_of;  // constraint index -> first row

  struct Map {
    bool free = false;
    int index = 0;
    double shift = 0.0;
    double coef = 1.0;
  };
  std::vector<Map> scalar_map;
  std::vector<int> block_offset;
};

inline StandardForm compile(const ConicProgram& p)
{
  StandardForm sf;
  const auto& sc = p.scalars();
  int nlp = 0, nfree = 0, nbound_rows = 0;
  for (const auto& s : sc) {
    bool lo = std::isfinite(s.lower), hi = std::isfinite(s.upper);
    if (lo || hi) {
      nlp += 1;
      if (lo && hi) {
        nlp += 1;
        nbound_rows += 1;
      }
    } else {
      nfree += 1;
    }
  }
  int nineq = 0;
  for (const auto& c : p.constraints()) nineq += (c.rel != Relation::equal);
  nlp += nineq;

  sf.cone.lp = nlp;
  for (const auto& b : p.blocks()) sf.cone.blocks.push_back({b.n, b.complex});
  sf.block_offset = sf.cone.offsets();
  const int dim = sf.cone.dim();
  const int m = static_cast<int>(p.constraints().size()) + nbound_rows;
  sf.rows = RMat::Zero(m, dim);
  sf.frows = RMat::Zero(m, nfree);
  sf.rhs = RVec::Zero(m);
  sf.cost = RVec::Zero(dim);
  sf.fcost = RVec::Zero(nfree);

  int lp = 0, fr = 0, row = 0;
  for (const auto& s : sc) {
    StandardForm::Map mp;
    bool lo = std::isfinite(s.lower), hi = std::isfinite(s.upper);
    if (lo) {
      mp.index = lp++;
      mp.shift = s.lower;
      mp.coef = 1.0;
      if (hi) {
        sf.rows(row, mp.index) = 1.0;
        sf.rows(row, lp++) = 1.0;
        sf.rhs(row) = s.upper - s.lower;
        ++row;
      }
    } else if (hi) {
      mp.index = lp++;
      mp.shift = s.upper;
      mp.coef = -1.0;
    } else {
      mp.free = true;
      mp.index = fr++;
    }
    sf.scalar_map.push_back(mp);
  }

  auto scatter = [&](const LinExpr& e, double mult, double* cone_row, double* free_row, double& rhs_adj,
                     Eigen::Index free_stride) {
    rhs_adj -= mult * e.constant();
    for (const auto& [k, a] : e.scalar_terms()) {
      const auto& mp = sf.scalar_map[k];
      rhs_adj -= mult * a * mp.shift;
      if (mp.free) free_row[mp.index * free_stride] += mult * a * mp.coef;
      else cone_row[mp.index] += mult * a * mp.coef;
    }
    for (const auto& [k, A] : e.block_terms()) {
      const auto& b = sf.cone.blocks[k];
      RVec v(svec_size(b.n, b.complex));
      pack(A, v.data(), b.complex);
      for (Eigen::Index i = 0; i < v.size(); ++i) cone_row[sf.block_offset[k] + i] += mult * v(i);
    }
  };

  // Row-major copies so rows can be scattered with unit stride
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R = sf.rows;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> FR = sf.frows;
  for (const auto& c : p.constraints()) {
    sf.row_of.push_back(row);
    double adj = c.rhs;
    scatter(c.expr, 1.0, R.row(row).data(), FR.row(row).data(), adj, 1);
    if (c.rel == Relation::less_equal) R(row, lp++) = 1.0;
    else if (c.rel == Relation::greater_equal) R(row, lp++) = -1.0;
    sf.rhs(row) = adj;
    ++row;
  }
  sf.rows = R;
  sf.frows = FR;

  sf.sign = p.is_maximize() ? -1.0 : 1.0;
  double adj = 0.0;
  RVec fc = RVec::Zero(nfree);
  scatter(p.objective(), sf.sign, sf.cost.data(), fc.data(), adj, 1);
  sf.fcost = fc;
  sf.offset = -adj * sf.sign;
  return sf;
}

inline void fill_values(const ConicProgram& p, const StandardForm& sf, const RVec& X, const RVec& xf,
                        SolveResult& out)
{
  out.scalars.assign(p.scalars().size(), 0.0);
  for (size_t k = 0; k < sf.scalar_map.size(); ++k) {
    const auto& mp = sf.scalar_map[k];
    double v = mp.free ? (xf.size() > mp.index ? xf(mp.index) : 0.0) : X(mp.index);
    out.scalars[k] = mp.shift + mp.coef * v;
  }
  out.blocks.clear();
  for (size_t k = 0; k < sf.cone.blocks.size(); ++k) {
    const auto& b = sf.cone.blocks[k];
    out.blocks.push_back(unpack(X.data() + sf.block_offset[k], b.n, b.complex));
  }
}

}  // namespace detail

inline SolveResult solve(const ConicProgram& p, const SolveOptions& opt = {})
{
  using namespace detail;
  StandardForm sf = compile(p);
  const int m = static_cast<int>(sf.rows.rows());
  const int dim = sf.cone.dim();
  const int nf = static_cast<int>(sf.frows.cols());
  SolveResult out;

  // Drop linearly dependent rows; inconsistent ones certify infeasibility
  RMat full(m, dim + nf);
  full << sf.rows, sf.frows;
  std::vector<int> keep;
  {
    Eigen::ColPivHouseholderQR<RMat> qr(full.transpose());
    qr.setThreshold(1e-11);
    const int rank = static_cast<int>(qr.rank());
    for (int i = 0; i < rank; ++i) keep.push_back(qr.colsPermutation().indices()(i));
    std::sort(keep.begin(), keep.end());
    if (rank < m) {
      RMat K(dim + nf, rank);
      RVec bk(rank);
      for (int i = 0; i < rank; ++i) {
        K.col(i) = full.row(keep[i]).transpose();
        bk(i) = sf.rhs(keep[i]);
      }
      Eigen::ColPivHouseholderQR<RMat> qk(K);
      std::vector<char> kept(m, 0);
      for (int i : keep) kept[i] = 1;
      for (int j = 0; j < m; ++j) {
        if (kept[j]) continue;
        RVec alpha = qk.solve(RVec(full.row(j).transpose()));
        double pred = alpha.dot(bk);
        double scale = 1.0 + std::abs(sf.rhs(j)) + alpha.norm() * bk.norm();
        if (std::abs(pred - sf.rhs(j)) > 1e-9 * scale) {
          out.status = SolveStatus::infeasible;
          return out;
        }
      }
    }
  }
  const int mk = static_cast<int>(keep.size());

  IpmData d;
  d.cone = sf.cone;
  d.c.resize(mk);
  d.G.resize(dim, mk);
  d.A.resize(nf, mk);
  for (int i = 0; i < mk; ++i) {
    d.c(i) = -sf.rhs(keep[i]);
    d.G.col(i) = sf.rows.row(keep[i]).transpose();
    d.A.col(i) = sf.frows.row(keep[i]).transpose();
  }
  d.h = sf.cost;
  d.b = sf.fcost;

  IpmOptions io;
  io.feastol = io.abstol = io.reltol = opt.tol;
  io.max_iters = opt.max_iters;
  IpmResult r = ipm_solve(d, io);

  out.iterations = r.iterations;
  out.primal_residual = r.dres;
  out.dual_residual = r.pres;
  out.gap = r.gap;
  switch (r.status) {
    case IpmStatus::optimal: out.status = SolveStatus::optimal; break;
    case IpmStatus::optimal_inaccurate: out.status = SolveStatus::optimal_inaccurate; break;
    case IpmStatus::dual_infeasible: out.status = SolveStatus::infeasible; break;
    case IpmStatus::primal_infeasible: out.status = SolveStatus::unbounded; break;
    case IpmStatus::max_iters: out.status = SolveStatus::max_iters; break;
    default: out.status = SolveStatus::numerical_error; break;
  }
  if (r.z.size() == dim) {
    fill_values(p, sf, r.z, r.y, out);
    out.objective = sf.sign * (sf.cost.dot(r.z) + (nf ? sf.fcost.dot(r.y) : 0.0)) + sf.offset;
    out.dual_objective = sf.sign * -r.pcost + sf.offset;
    out.multipliers.assign(p.constraints().size(), 0.0);
    std::vector<int> pos(m, -1);
    for (int i = 0; i < mk; ++i) pos[keep[i]] = i;
    for (size_t c = 0; c < p.constraints().size(); ++c) {
      int rw = sf.row_of[c];
      if (pos[rw] >= 0 && r.x.size() == mk) out.multipliers[c] = r.x(pos[rw]);
    }
  }
  return out;
}

// Feasibility audit of a returned point against the original model
struct Audit {
  double max_equality = 0.0;
  double max_inequality = 0.0;
  double max_bound = 0.0;
  double min_eigenvalue = 0.0;

  bool passes(double tol, double eig_tol) const
  {
    return max_equality <= tol && max_inequality <= tol && max_bound <= tol && min_eigenvalue >= -eig_tol;
  }
};

inline Audit audit(const ConicProgram& p, const SolveResult& r)
{
  Audit a;
  a.min_eigenvalue = kInf;
  for (size_t k = 0; k < p.scalars().size(); ++k) {
    const auto& s = p.scalars()[k];
    double v = r.scalars.at(k);
    a.max_bound = std::max({a.max_bound, s.lower - v, v - s.upper});
  }
  for (const auto& c : p.constraints()) {
    double v = c.expr.evaluate(r.scalars, r.blocks) - c.rhs;
    double scale = std::max(1.0, std::abs(c.rhs));
    switch (c.rel) {
      case Relation::equal: a.max_equality = std::max(a.max_equality, std::abs(v) / scale); break;
      case Relation::less_equal: a.max_inequality = std::max(a.max_inequality, v / scale); break;
      case Relation::greater_equal: a.max_inequality = std::max(a.max_inequality, -v / scale); break;
    }
  }
  for (const auto& X : r.blocks) {
    double s = std::max(1.0, X.trace().real());
    a.min_eigenvalue = std::min(a.min_eigenvalue, min_eigenvalue(X) / s);
  }
  if (r.blocks.empty()) a.min_eigenvalue = 0.0;
  return a;
}

// Triplet dump of the standard-form data for debugging
inline void dump_triplets(const ConicProgram& p, std::ostream& os)
{
  detail::StandardForm sf = detail::compile(p);
  os << "# lp " << sf.cone.lp << " blocks " << sf.cone.blocks.size() << " rows " << sf.rows.rows() << " free "
     << sf.frows.cols() << "\n";
  for (const auto& b : sf.cone.blocks) os << "block " << b.n << (b.complex ? " complex" : " real") << "\n";
  for (Eigen::Index i = 0; i < sf.rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < sf.rows.cols(); ++j)
      if (sf.rows(i, j) != 0.0) os << "A " << i << " " << j << " " << sf.rows(i, j) << "\n";
    for (Eigen::Index j = 0; j < sf.frows.cols(); ++j)
      if (sf.frows(i, j) != 0.0) os << "F " << i << " " << j << " " << sf.frows(i, j) << "\n";
    os << "b " << i << " " << sf.rhs(i) << "\n";
  }
  for (Eigen::Index j = 0; j < sf.cost.size(); ++j)
    if (sf.cost(j) != 0.0) os << "c " << j << " " << sf.cost(j) << "\n";
  for (Eigen::Index j = 0; j < sf.fcost.size(); ++j)
    if (sf.fcost(j) != 0.0) os << "cf " << j << " " << sf.fcost(j) << "\n";
}

}  // namespace starnoma::conic

#pragma once

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "starnoma/conic/hermitian.hpp"

namespace starnoma::conic {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ScalarVar {
  int id = -1;
};

struct MatrixVar {
  int id = -1;
};

// Affine expression: constant + sum a_i x_i + sum Re Tr(A_b X_b)
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double c) : constant_(c) {}
  LinExpr(ScalarVar v) { add(v, 1.0); }

  LinExpr& add(ScalarVar v, double coef)
  {
    if (v.id < 0) throw UsageError("unbound scalar variable");
    scalars_[v.id] += coef;
    return *this;
  }

  // += Re Tr(A X); only the Hermitian part of A matters
  LinExpr& add_trace(MatrixVar X, const CMat& A)
  {
    if (X.id < 0) throw UsageError("unbound matrix variable");
    CMat Ah = hermitian_part(A);
    auto it = blocks_.find(X.id);
    if (it == blocks_.end()) blocks_.emplace(X.id, std::move(Ah));
    else it->second += Ah;
    return *this;
  }

  LinExpr& operator+=(const LinExpr& o)
  {
    constant_ += o.constant_;
    for (const auto& [k, v] : o.scalars_) scalars_[k] += v;
    for (const auto& [k, M] : o.blocks_) {
      auto it = blocks_.find(k);
      if (it == blocks_.end()) blocks_.emplace(k, M);
      else it->second += M;
    }
    return *this;
  }
  LinExpr& operator*=(double a)
  {
    constant_ *= a;
    for (auto& kv : scalars_) kv.second *= a;
    for (auto& kv : blocks_) kv.second *= a;
    return *this;
  }
  LinExpr& operator-=(const LinExpr& o) { return *this += o * -1.0; }

  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
  friend LinExpr operator-(LinExpr a) { return a *= -1.0; }

  double constant() const { return constant_; }
  const std::map<int, double>& scalar_terms() const { return scalars_; }
  const std::map<int, CMat>& block_terms() const { return blocks_; }

  double evaluate(const std::vector<double>& x, const std::vector<CMat>& X) const
  {
    double v = constant_;
    for (const auto& [k, a] : scalars_) v += a * x.at(k);
    for (const auto& [k, A] : blocks_) v += (A * X.at(k)).trace().real();
    return v;
  }

 private:
  double constant_ = 0.0;
  std::map<int, double> scalars_;
  std::map<int, CMat> blocks_;
};

inline LinExpr trace_product(MatrixVar X, const CMat& A) { return LinExpr().add_trace(X, A); }

inline LinExpr entry_real(MatrixVar X, int n, int i, int j)
{
  CMat A = CMat::Zero(n, n);
  if (i == j) A(i, i) = 1.0;
  else {
    A(i, j) = 0.5;
    A(j, i) = 0.5;
  }
  return trace_product(X, A);
}

inline LinExpr entry_imag(MatrixVar X, int n, int i, int j)
{
  CMat A = CMat::Zero(n, n);
  if (i != j) {
    A(i, j) = cplx(0.0, 0.5);
    A(j, i) = cplx(0.0, -0.5);
  }
  return trace_product(X, A);
}

enum class Relation { less_equal, greater_equal, equal };

struct Constraint {
  LinExpr expr;
  Relation rel = Relation::equal;
  double rhs = 0.0;
  std::string tag;
};

struct ScalarInfo {
  double lower = -kInf;
  double upper = kInf;
  std::string name;
};

struct BlockInfo {
  int n = 0;
  bool complex = true;
  std::string tag;
};

class ConicProgram {
 public:
  ScalarVar add_scalar(double lower = -kInf, double upper = kInf, std::string name = {})
  {
    if (lower > upper) throw UsageError("scalar lower bound exceeds upper bound");
    scalars_.push_back({lower, upper, std::move(name)});
    return {static_cast<int>(scalars_.size()) - 1};
  }

  MatrixVar add_psd(int n, bool complex = true, std::string tag = {})
  {
    if (n <= 0) throw UsageError("PSD block needs positive size");
    blocks_.push_back({n, complex, std::move(tag)});
    return {static_cast<int>(blocks_.size()) - 1};
  }

  void add_constraint(LinExpr expr, Relation rel, double rhs, std::string tag = {})
  {
    for (const auto& kv : expr.scalar_terms())
      if (kv.first >= static_cast<int>(scalars_.size())) throw UsageError("unknown scalar in constraint");
    for (const auto& kv : expr.block_terms()) {
      if (kv.first >= static_cast<int>(blocks_.size())) throw UsageError("unknown block in constraint");
      if (kv.second.rows() != blocks_[kv.first].n) throw UsageError("coefficient size mismatch");
    }
    constraints_.push_back({std::move(expr), rel, rhs, std::move(tag)});
  }

  void minimize(LinExpr obj)
  {
    objective_ = std::move(obj);
    maximize_ = false;
  }
  void maximize(LinExpr obj)
  {
    objective_ = std::move(obj);
    maximize_ = true;
  }

  const std::vector<ScalarInfo>& scalars() const { return scalars_; }
  const std::vector<BlockInfo>& blocks() const { return blocks_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const LinExpr& objective() const { return objective_; }
  bool is_maximize() const { return maximize_; }

  int count_constraints(const std::string& tag) const
  {
    int c = 0;
    for (const auto& k : constraints_) c += (k.tag == tag);
    return c;
  }
  int count_blocks(const std::string& tag) const
  {
    int c = 0;
    for (const auto& b : blocks_) c += (b.tag == tag);
    return c;
  }

 private:
  std::vector<ScalarInfo> scalars_;
  std::vector<BlockInfo> blocks_;
  std::vector<Constraint> constraints_;
  LinExpr objective_;
  bool maximize_ = false;
};

// [[x, 1], [1, a]] >= 0 as a real 2x2 block tied to x and a by equalities
inline MatrixVar hyperbolic_as_psd(ConicProgram& prog, const LinExpr& x, const LinExpr& a)
{
  MatrixVar Z = prog.add_psd(2, false, "hyperbolic");
  prog.add_constraint(entry_real(Z, 2, 0, 0) - x, Relation::equal, 0.0, "hyperbolic");
  prog.add_constraint(entry_real(Z, 2, 1, 1) - a, Relation::equal, 0.0, "hyperbolic");
  prog.add_constraint(entry_real(Z, 2, 0, 1), Relation::equal, 1.0, "hyperbolic");
  return Z;
}

}  // namespace starnoma::conic

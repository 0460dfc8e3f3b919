#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace starnoma {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLog2E = 1.4426950408889634074;

// Input outside the mathematical domain of a routine (negative distance, Gamma <= 0, ...)
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Reflection/transmission coefficients that break the hardware model
class ConstraintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// QoS floors cannot be met for the given equivalent gains
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API misuse (bad indices, mismatched sizes, bad configuration)
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Linear SINR needed for a rate of r bit/s/Hz
inline double sinr_floor(double rate) { return std::exp2(rate) - 1.0; }

inline double wrap_phase(double theta)
{
  double t = std::fmod(theta, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

}  // namespace starnoma

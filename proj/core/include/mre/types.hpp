#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mre {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

/// Malformed or inconsistent caller input (dimensions, ranges, parse errors).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Operand outside the mathematical domain of an operation (e.g. singular
/// matrix where positive definite is required).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative routine failed to converge within its caps.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested accuracy is unreachable within the configured caps; carries the
/// best bound that was achievable.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double best_bound)
      : std::runtime_error(what), best_bound(best_bound) {}
  double best_bound;
};

/// A constraint set that is empty by construction (e.g. energy bound below
/// the ground energy).
class InfeasibleConstraintError : public std::runtime_error {
 public:
  explicit InfeasibleConstraintError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace mre

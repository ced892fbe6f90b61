#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mre/compile.hpp"

namespace mre {

struct SolverOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iterations = 200;
  double step_fraction = 0.99;
};

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, NumericalFailure };

std::string to_string(SolveStatus s);

/// Result of a solve, reported at the model level (objective and variable
/// values follow the model's sense and recovery map) with the raw conic
/// iterate kept for independent verification.
struct Solution {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  std::string message;

  std::vector<CMat> var_values;    // per model variable
  std::vector<CMat> lmi_duals;     // per model LMI block
  std::vector<double> ineq_duals;  // per model scalar inequality

  struct KktNumbers {
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    double duality_gap = 0.0;
  } kkt;  // recomputed independently from the raw iterate after the solve

  // Raw homogeneous iterate, tau-normalized (solver coordinates).
  RVec y;
  std::vector<RMat> x_blocks;
  std::vector<RMat> s_blocks;
  RVec x_nonneg;
  RVec s_nonneg;
  double tau = 0.0;
  double kappa = 0.0;
};

/// Residuals recomputed from scratch out of a Solution's raw iterate.
struct KktCheck {
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;                // complementarity <x, s>
  double objective_mismatch = 0.0;  // duality gap |b^T y - <c, x>|
};

KktCheck check_kkt(const StandardForm& sf, const Solution& sol);

/// Pluggable solve contract: anything substituted here must satisfy the same
/// pre/post conditions as the built-in path-following solver and pass the
/// conformance suite in the tests.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual Solution solve(const StandardForm& sf, const SolverOptions& opts) const = 0;
};

/// Primal-dual path-following with Nesterov-Todd scaling, Mehrotra
/// predictor-corrector steps, and a homogeneous self-dual embedding for
/// infeasibility detection. Dense block linear algebra throughout.
class InteriorPointSolver final : public SolverBackend {
 public:
  Solution solve(const StandardForm& sf, const SolverOptions& opts) const override;
};

/// Solve with the built-in backend and fold results back to model variables.
Solution solve(const Model& model, const StandardForm& sf, const SolverOptions& opts);
Solution solve(const Model& model, const SolverOptions& opts = {});

}  // namespace mre

#pragma once

#include <optional>
#include <utility>

#include "mre/cones.hpp"
#include "mre/oracle.hpp"
#include "mre/solver.hpp"

namespace mre {

/// Renyi order alpha = p/q in (0,1) u (1,inf), kept exact so that regime
/// selection and the derived geometric-mean exponent are exact:
///   alpha in (0,1/2):  t = alpha/(alpha-1) in (-1,0), epigraph;
///   alpha in [1/2,1):  t = 1-1/alpha      in [-1,0), epigraph;
///   alpha > 1:         t = 1-1/alpha      in (0,1),  hypograph.
struct RenyiOrder {
  Rational alpha;

  static RenyiOrder of(const Rational& a);
  static RenyiOrder parse(const std::string& text);
  double value() const { return alpha.value(); }
  int regime() const;  // 0, 1, 2 as listed above
  Rational exponent() const;
  GraphSide side() const { return regime() == 2 ? GraphSide::Hypograph : GraphSide::Epigraph; }
};

enum class SupportStatus { Contained, Violated };

/// Contained iff every thresholded eigenvector of rho lies in the span of
/// sigma's thresholded eigenvectors (projector residual <= 1e-8).
SupportStatus support_check(const CMat& rho, const CMat& sigma);

struct SolverStats {
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  // Recomputed from the raw conic iterate, independent of the solver's own
  // bookkeeping.
  double kkt_primal = 0.0;
  double kkt_dual = 0.0;
  double kkt_gap = 0.0;
  double duality_gap = 0.0;
};

struct AccuracyInfo {
  // Log-perspective route: the (m, k) used and the certified scalar band.
  int m = 0;
  int k = 0;
  double a = 0.0;        // spectral range the band was certified on
  double eps_hat = 0.0;  // half-width of the reported accuracy band
  // Geometric-mean route: dyadic substitution accounting.
  ConeCertificate cone;
};

struct DivergenceResult {
  bool infinite = false;
  bool infinite_suspected = false;
  double value = 0.0;  // D; meaningless when infinite
  double quasi = 0.0;  // Q, Renyi only
  CMat omega;
  CMat theta;
  Measurement measurement;
  OutcomeDistribution outcome;
  double saturation_residual = 0.0;
  SolverStats solver;
  AccuracyInfo accuracy;
  bool regularized = false;
  double regularization_delta = 0.0;
};

struct StateOptions {
  SolverOptions solver;
  /// sigma <- (1-delta) sigma + delta Tr[sigma] I/d before solving; results
  /// on regularized input are labeled as such.
  double regularize_delta = 0.0;
  /// Relative-entropy accuracy: explicit (m,k) wins over eps; neither means
  /// the default (3,3).
  std::optional<double> eps;
  std::optional<std::pair<int, int>> mk;
};

/// Measured Renyi quasi-entropy Q^M_alpha and D = ln(Q)/(alpha-1) through the
/// regime-correct SDP over (omega, theta) with theta bound to G_t(I, omega).
DivergenceResult measured_renyi_quasi(const CMat& rho, const CMat& sigma, const RenyiOrder& order,
                                      const StateOptions& opts = {});

/// Measured relative entropy through the (m,k) log-perspective system, with
/// the conditioning-driven refinement loop when an eps target is given.
DivergenceResult measured_relative_entropy(const CMat& rho, const CMat& sigma,
                                           const StateOptions& opts = {});

/// Eigenbasis of the optimal observable as a rank-one projective measurement.
Measurement extract_measurement(const CMat& omega);

/// |classical divergence of the induced distributions - sdp_value|.
double verify_saturation(const CMat& rho, const CMat& sigma, const DivergenceTask& task,
                         const Measurement& meas, double sdp_value);

/// Eigenvalue floor at floor_rel * lambda_max, used before logs and inverses.
CMat floor_psd(const CMat& a, double floor_rel = 1e-12);

}  // namespace mre

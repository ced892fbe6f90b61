#include "mre/measured_states.hpp"

#include <cmath>

#include "mre/linalg.hpp"

namespace mre {

RenyiOrder RenyiOrder::of(const Rational& a) {
  if (a.p <= 0 || a.q <= 0 || a.p == a.q)
    throw InputError("RenyiOrder: alpha must be a positive rational != 1");
  return RenyiOrder{a};
}

RenyiOrder RenyiOrder::parse(const std::string& text) {
  return of(Rational::parse(text));
}

int RenyiOrder::regime() const {
  if (2 * alpha.p < alpha.q) return 0;  // (0, 1/2)
  if (alpha.p < alpha.q) return 1;      // [1/2, 1)
  return 2;                             // (1, inf)
}

Rational RenyiOrder::exponent() const {
  if (regime() == 0) return Rational::of(alpha.p, alpha.p - alpha.q);  // alpha/(alpha-1)
  return Rational::of(alpha.p - alpha.q, alpha.p);                     // 1 - 1/alpha
}

SupportStatus support_check(const CMat& rho, const CMat& sigma) {
  CMat vr = support_basis(rho);
  CMat vs = support_basis(sigma);
  if (vr.cols() == 0) return SupportStatus::Contained;
  CMat proj = vs * vs.adjoint();
  CMat defect = vr - proj * vr;
  return defect.colwise().norm().maxCoeff() <= 1e-8 ? SupportStatus::Contained
                                                    : SupportStatus::Violated;
}

CMat floor_psd(const CMat& a, double floor_rel) {
  Eigh e = eigh(a);
  const double lmax = std::max(e.values(0), 1e-300);
  RVec v = e.values.cwiseMax(floor_rel * lmax);
  return hermitize(e.vectors * v.asDiagonal() * e.vectors.adjoint());
}

Measurement extract_measurement(const CMat& omega) {
  Measurement m;
  m.basis = eigh(omega).vectors;
  return m;
}

double verify_saturation(const CMat& rho, const CMat& sigma, const DivergenceTask& task,
                         const Measurement& meas, double sdp_value) {
  const double classical = classical_divergence(induced(meas, rho, sigma), task);
  if (std::isinf(classical) && std::isinf(sdp_value)) return 0.0;
  return std::abs(classical - sdp_value);
}

namespace {

struct Inputs {
  CMat rho, sigma;
  bool regularized = false;
  double delta = 0.0;
};

Inputs prepare(const CMat& rho_in, const CMat& sigma_in, const StateOptions& opts) {
  require_density(rho_in, "rho");
  require_psd(sigma_in, "sigma");
  if (sigma_in.trace().real() <= 0) throw InputError("sigma: trace must be positive");
  Inputs in;
  in.rho = hermitize(rho_in);
  in.sigma = hermitize(sigma_in);
  if (opts.regularize_delta > 0.0) {
    const double d = opts.regularize_delta;
    const int n = static_cast<int>(sigma_in.rows());
    in.sigma = hermitize((1.0 - d) * in.sigma +
                         d * in.sigma.trace().real() / n * CMat::Identity(n, n));
    in.regularized = true;
    in.delta = d;
  }
  if (in.rho.rows() != in.sigma.rows()) throw InputError("rho/sigma dimension mismatch");
  return in;
}

SolverStats stats_of(const Solution& sol) {
  return {sol.status,          sol.iterations,       sol.gap,
          sol.primal_residual, sol.dual_residual,    sol.kkt.primal_residual,
          sol.kkt.dual_residual, sol.kkt.gap,        sol.kkt.duality_gap};
}

void require_solved(const Solution& sol, const char* what) {
  if (sol.status == SolveStatus::Optimal) return;
  throw NumericalError(std::string(what) + ": solver returned " + to_string(sol.status) +
                       " (" + sol.message + ")");
}

// Spectral range parameter for the hypograph approximation lemma: smallest a
// with a^{-1} I <= omega <= a I, floored at 10.
double range_parameter(const CMat& omega) {
  Eigh e = eigh(omega);
  const double lmax = std::max(e.values(0), 1e-300);
  const double lmin = std::max(e.values(e.values.size() - 1), 1e-300);
  return std::max({lmax, 1.0 / lmin, lmax / lmin, 10.0});
}

}  // namespace

DivergenceResult measured_renyi_quasi(const CMat& rho_in, const CMat& sigma_in,
                                      const RenyiOrder& order, const StateOptions& opts) {
  Inputs in = prepare(rho_in, sigma_in, opts);
  const int d = static_cast<int>(in.rho.rows());
  const double alpha = order.value();

  DivergenceResult res;
  res.regularized = in.regularized;
  res.regularization_delta = in.delta;

  if (order.regime() == 2 && support_check(in.rho, in.sigma) == SupportStatus::Violated) {
    res.infinite = true;
    res.value = std::numeric_limits<double>::infinity();
    return res;
  }

  Model model;
  VarId omega = model.add_psd(d, "omega");
  VarId theta = model.add_hermitian(d, "theta");
  MatExpr id = MatExpr::constant_of(CMat::Identity(d, d));
  GeomeanGraph graph = build_geomean_graph(model, order.exponent(), order.side(), id,
                                           MatExpr::variable(omega, d),
                                           MatExpr::variable(theta, d));
  ScalarExpr obj;
  if (order.regime() == 0) {
    obj.add(omega, alpha * in.rho);
    obj.add(theta, (1.0 - alpha) * in.sigma);
  } else {
    obj.add(theta, alpha * in.rho);
    obj.add(omega, (1.0 - alpha) * in.sigma);
  }
  model.set_objective(order.regime() == 2 ? Sense::Maximize : Sense::Minimize, obj);

  Solution sol = solve(model, opts.solver);
  if (order.regime() == 2 && sol.status == SolveStatus::DualInfeasible) {
    // Unbounded supremum past the necessary support screen.
    res.infinite = true;
    res.infinite_suspected = true;
    res.value = std::numeric_limits<double>::infinity();
    res.solver = stats_of(sol);
    return res;
  }
  require_solved(sol, "measured_renyi_quasi");
  res.solver = stats_of(sol);

  res.quasi = sol.objective;
  if (!(res.quasi > 0))
    throw NumericalError("measured_renyi_quasi: nonpositive quasi-entropy from solver");
  res.value = std::log(res.quasi) / (alpha - 1.0);
  res.omega = floor_psd(sol.var_values[omega]);
  res.theta = sol.var_values[theta];

  res.accuracy.cone = graph.certificate;
  if (res.accuracy.cone.bound_deferred) {
    res.accuracy.cone.value_error_bound =
        res.accuracy.cone.exponent_gap *
        geomean_t_sensitivity(CMat::Identity(d, d), res.omega, res.accuracy.cone.used.value());
    res.accuracy.cone.bound_deferred = false;
  }
  res.accuracy.eps_hat = res.accuracy.cone.value_error_bound;

  res.measurement = extract_measurement(res.omega);
  res.outcome = induced(res.measurement, in.rho, in.sigma);
  res.saturation_residual = verify_saturation(in.rho, in.sigma, alpha, res.measurement, res.value);
  return res;
}

DivergenceResult measured_relative_entropy(const CMat& rho_in, const CMat& sigma_in,
                                           const StateOptions& opts) {
  Inputs in = prepare(rho_in, sigma_in, opts);
  const int d = static_cast<int>(in.rho.rows());

  DivergenceResult res;
  res.regularized = in.regularized;
  res.regularization_delta = in.delta;

  if (support_check(in.rho, in.sigma) == SupportStatus::Violated) {
    res.infinite = true;
    res.value = std::numeric_limits<double>::infinity();
    return res;
  }

  auto solve_mk = [&](int m, int k) {
    Model model;
    VarId omega = model.add_psd(d, "omega");
    VarId theta = model.add_hermitian(d, "theta");
    MatExpr id = MatExpr::constant_of(CMat::Identity(d, d));
    build_log_perspective_graph(model, id, MatExpr::variable(omega, d),
                                MatExpr::variable(theta, d), m, k);
    ScalarExpr obj;
    obj.constant = 1.0;
    obj.add(theta, in.rho);
    obj.add(omega, -in.sigma);
    model.set_objective(Sense::Maximize, obj);
    Solution sol = solve(model, opts.solver);
    require_solved(sol, "measured_relative_entropy");
    return std::make_tuple(sol, omega, theta);
  };

  int m = kDefaultM, k = kDefaultK;
  bool refine = false;
  if (opts.mk) {
    m = opts.mk->first;
    k = opts.mk->second;
  } else if (opts.eps) {
    refine = true;  // pilot at the default, then conditioning-driven reselect
  }

  auto [sol, omega, theta] = solve_mk(m, k);
  if (refine) {
    for (int round = 0; round < 3; ++round) {
      const double a = range_parameter(floor_psd(sol.var_values[omega]));
      MkChoice choice = select_mk(a, *opts.eps);
      if (choice.m == m && choice.k == k) break;
      m = choice.m;
      k = choice.k;
      std::tie(sol, omega, theta) = solve_mk(m, k);
    }
  }

  res.solver = stats_of(sol);
  res.value = sol.objective;
  res.omega = floor_psd(sol.var_values[omega]);
  res.theta = sol.var_values[theta];
  res.accuracy.m = m;
  res.accuracy.k = k;
  res.accuracy.a = range_parameter(res.omega);
  res.accuracy.eps_hat = scalar_r_grid_error(m, k, res.accuracy.a);

  res.measurement = extract_measurement(res.omega);
  res.outcome = induced(res.measurement, in.rho, in.sigma);
  res.saturation_residual =
      verify_saturation(in.rho, in.sigma, std::nullopt, res.measurement, res.value);
  return res;
}

}  // namespace mre

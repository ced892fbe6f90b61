#include "mre/measured_channels.hpp"

#include <cmath>

#include "mre/linalg.hpp"

namespace mre {

ChannelPair ChannelPair::from_choi(const CMat& gamma_n, const CMat& gamma_m, int dim_a,
                                   int dim_b) {
  if (dim_a < 1 || dim_b < 1) throw InputError("ChannelPair: dimensions must be positive");
  const int d = dim_a * dim_b;
  if (gamma_n.rows() != d || gamma_m.rows() != d)
    throw InputError("ChannelPair: Choi dimension mismatch with d_a * d_b");
  require_psd(gamma_n, "gamma_n");
  require_psd(gamma_m, "gamma_m");
  CMat marg = partial_trace_second(gamma_n, dim_a, dim_b);
  if ((marg - CMat::Identity(dim_a, dim_a)).cwiseAbs().maxCoeff() > 1e-8)
    throw InputError("gamma_n: not trace-preserving (Tr_B Gamma != I)");
  return ChannelPair{hermitize(gamma_n), hermitize(gamma_m), dim_a, dim_b};
}

ChannelPair ChannelPair::from_kraus(const std::vector<CMat>& kraus_n,
                                    const std::vector<CMat>& kraus_m) {
  if (kraus_n.empty() || kraus_m.empty()) throw InputError("ChannelPair: empty Kraus list");
  const int da = static_cast<int>(kraus_n[0].cols());
  const int db = static_cast<int>(kraus_n[0].rows());
  if (kraus_m[0].cols() != da || kraus_m[0].rows() != db)
    throw InputError("ChannelPair: Kraus shapes of N and M differ");
  return from_choi(choi_from_kraus(kraus_n), choi_from_kraus(kraus_m), da, db);
}

EnergyConstraint EnergyConstraint::unconstrained(int dim_a) {
  return EnergyConstraint{CMat::Identity(dim_a, dim_a), 1.0};
}

bool EnergyConstraint::trivial() const {
  return e == 1.0 && (h - CMat::Identity(h.rows(), h.cols())).cwiseAbs().maxCoeff() == 0.0;
}

namespace {

EnergyConstraint resolve_ec(const std::optional<EnergyConstraint>& ec, int dim_a) {
  EnergyConstraint out = ec ? *ec : EnergyConstraint::unconstrained(dim_a);
  require_hermitian(out.h, "energy H");
  if (out.h.rows() != dim_a) throw InputError("energy H: dimension mismatch with d_a");
  const double lmin = eigh(out.h).values.minCoeff();
  if (lmin > out.e + 1e-12)
    throw InfeasibleConstraintError("energy constraint infeasible: lambda_min(H) > E");
  return out;
}

SolverStats stats_of(const Solution& sol) {
  return {sol.status,          sol.iterations,       sol.gap,
          sol.primal_residual, sol.dual_residual,    sol.kkt.primal_residual,
          sol.kkt.dual_residual, sol.kkt.gap,        sol.kkt.duality_gap};
}

struct ChannelVars {
  VarId rho, omega, theta;
  int rho_dim = 0;
  CMat face;  // empty: full input space; else isometry onto the ground face

  MatExpr rho_lift(int dim_b) const {
    if (face.size() > 0) return MatExpr::conjugated_lifted(rho, face, dim_b);
    return MatExpr::lifted(rho, rho_dim, dim_b);
  }
  CMat recover_rho(const Solution& sol) const {
    CMat value = sol.var_values[rho];
    if (face.size() > 0) value = hermitize(face * value * face.adjoint());
    return value;
  }
};

ChannelVars add_channel_vars(Model& model, const ChannelPair& pair, const EnergyConstraint& ec) {
  ChannelVars v;
  const int d = pair.dim_a * pair.dim_b;
  // A budget at the ground energy pins the input to the bottom eigenspace of
  // H (Tr[H rho] >= lambda_min for every state); restricting rho to that face
  // up front keeps the feasible set full-dimensional for the solver.
  CMat face;
  bool constrained = !ec.trivial();
  if (constrained) {
    Eigh eh = eigh(ec.h);
    const double lmin = eh.values.minCoeff();
    if (lmin >= ec.e - 1e-12 * (1.0 + std::abs(ec.e))) {
      int g = 0;
      for (int i = static_cast<int>(eh.values.size()) - 1; i >= 0; --i)
        if (eh.values(i) <= lmin + 1e-12 * (1.0 + std::abs(lmin))) ++g;
      if (g < pair.dim_a) face = eh.vectors.rightCols(g);
      constrained = false;  // equality is implied on the face
    }
  }
  v.rho_dim = face.size() > 0 ? static_cast<int>(face.cols()) : pair.dim_a;
  v.face = face;
  v.rho = model.add_psd(v.rho_dim, "rho");
  v.omega = model.add_psd(d, "Omega");
  v.theta = model.add_hermitian(d, "Theta");
  ScalarExpr trace_one;
  trace_one.constant = -1.0;
  trace_one.add(v.rho, CMat::Identity(v.rho_dim, v.rho_dim));
  model.add_scalar_eq(trace_one, "trace(rho)=1");
  if (constrained) {
    ScalarExpr energy;  // E - Tr[H rho] >= 0
    energy.constant = ec.e;
    energy.add(v.rho, -ec.h);
    model.add_scalar_ineq(energy, "energy");
  }
  return v;
}

// (rho^{-1/2} (x) I) on the thresholded support.
CMat support_pinv_sqrt_lift(const CMat& rho, int dim_b, bool* warning) {
  Eigh e = eigh(rho);
  const double lmax = std::max(e.values(0), 1e-300);
  RVec inv(e.values.size());
  for (int i = 0; i < inv.size(); ++i) {
    if (e.values(i) > 1e-10 * lmax) {
      inv(i) = 1.0 / std::sqrt(e.values(i));
    } else {
      inv(i) = 0.0;
      *warning = true;
    }
  }
  CMat r = hermitize(e.vectors * inv.asDiagonal() * e.vectors.adjoint());
  return kron(r, CMat::Identity(dim_b, dim_b));
}

void finish_extraction(ChannelDivergenceResult* res, const ChannelPair& pair,
                       const DivergenceTask& task) {
  bool warn = false;
  CMat lift = support_pinv_sqrt_lift(res->rho, pair.dim_b, &warn);
  res->support_warning = warn;
  res->observable = hermitize(lift * res->omega * lift);
  res->measurement = extract_measurement(res->observable);
  CMat sand_n = sandwich_choi(res->rho, pair.gamma_n, pair.dim_b);
  CMat sand_m = sandwich_choi(res->rho, pair.gamma_m, pair.dim_b);
  res->outcome = induced(res->measurement, sand_n, sand_m);
  const double classical = classical_divergence(res->outcome, task);
  res->strategy_residual =
      std::isinf(classical) && std::isinf(res->value) ? 0.0 : std::abs(classical - res->value);
}

bool choi_support_violated(const ChannelPair& pair) {
  return support_check(pair.gamma_n / pair.gamma_n.trace().real(), pair.gamma_m) ==
         SupportStatus::Violated;
}

constexpr double kQuasiCap = 1e6;

// Range parameter for the channel-level hypograph lemma, from the spectrum of
// (rho (x) I)^{-1/2} Omega (rho (x) I)^{-1/2} on the support.
double channel_range_parameter(const CMat& rho, const CMat& omega, int dim_b) {
  bool warn = false;
  CMat lift = support_pinv_sqrt_lift(rho, dim_b, &warn);
  Eigh e = eigh(hermitize(lift * omega * lift));
  double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < e.values.size(); ++i) {
    const double v = e.values(i);
    if (v > 1e-12 * std::max(e.values(0), 1e-300)) {
      lmax = std::max(lmax, v);
      lmin = std::min(lmin, v);
    }
  }
  if (!(lmax > 0) || !std::isfinite(lmin)) return 10.0;
  return std::max({lmax, 1.0 / lmin, lmax / lmin, 10.0});
}

}  // namespace

ChannelDivergenceResult channel_measured_renyi(const ChannelPair& pair, const RenyiOrder& order,
                                               const std::optional<EnergyConstraint>& ec,
                                               const ChannelOptions& opts) {
  EnergyConstraint energy = resolve_ec(ec, pair.dim_a);
  const double alpha = order.value();
  const int d = pair.dim_a * pair.dim_b;

  ChannelDivergenceResult res;
  if (order.regime() == 2 && energy.trivial() && choi_support_violated(pair)) {
    res.infinite = true;
    res.value = std::numeric_limits<double>::infinity();
    return res;
  }

  Model model;
  ChannelVars v = add_channel_vars(model, pair, energy);
  MatExpr x = v.rho_lift(pair.dim_b);
  GeomeanGraph graph =
      build_geomean_graph(model, order.exponent(), order.side(), x,
                          MatExpr::variable(v.omega, d), MatExpr::variable(v.theta, d));
  ScalarExpr obj;
  if (order.regime() == 0) {
    obj.add(v.omega, alpha * pair.gamma_n);
    obj.add(v.theta, (1.0 - alpha) * pair.gamma_m);
  } else {
    obj.add(v.theta, alpha * pair.gamma_n);
    obj.add(v.omega, (1.0 - alpha) * pair.gamma_m);
  }
  model.set_objective(order.regime() == 2 ? Sense::Maximize : Sense::Minimize, obj);

  Solution sol = solve(model, opts.solver);
  if (order.regime() == 2 &&
      (sol.status == SolveStatus::DualInfeasible ||
       (sol.status == SolveStatus::Optimal && sol.objective > kQuasiCap))) {
    res.infinite = true;
    res.infinite_suspected = true;
    res.value = std::numeric_limits<double>::infinity();
    res.solver = stats_of(sol);
    return res;
  }
  if (sol.status != SolveStatus::Optimal)
    throw NumericalError("channel_measured_renyi: solver returned " + to_string(sol.status) +
                         " (" + sol.message + ")");
  res.solver = stats_of(sol);
  res.quasi = sol.objective;
  if (!(res.quasi > 0))
    throw NumericalError("channel_measured_renyi: nonpositive quasi-entropy");
  res.value = std::log(res.quasi) / (alpha - 1.0);
  res.rho = v.recover_rho(sol);
  res.rho /= res.rho.trace().real();
  res.omega = sol.var_values[v.omega];
  res.theta = sol.var_values[v.theta];

  res.accuracy.cone = graph.certificate;
  if (res.accuracy.cone.bound_deferred) {
    res.accuracy.cone.value_error_bound =
        res.accuracy.cone.exponent_gap *
        geomean_t_sensitivity(floor_psd(kron(res.rho, CMat::Identity(pair.dim_b, pair.dim_b))),
                              floor_psd(res.omega), res.accuracy.cone.used.value());
    res.accuracy.cone.bound_deferred = false;
  }
  res.accuracy.eps_hat = res.accuracy.cone.value_error_bound;

  finish_extraction(&res, pair, alpha);
  return res;
}

ChannelDivergenceResult channel_measured_relent(const ChannelPair& pair,
                                                const std::optional<EnergyConstraint>& ec,
                                                const ChannelOptions& opts) {
  EnergyConstraint energy = resolve_ec(ec, pair.dim_a);
  const int d = pair.dim_a * pair.dim_b;

  ChannelDivergenceResult res;
  if (energy.trivial() && choi_support_violated(pair)) {
    res.infinite = true;
    res.value = std::numeric_limits<double>::infinity();
    return res;
  }

  auto solve_mk = [&](int m, int k) {
    Model model;
    ChannelVars v = add_channel_vars(model, pair, energy);
    MatExpr x = v.rho_lift(pair.dim_b);
    build_log_perspective_graph(model, x, MatExpr::variable(v.omega, d),
                                MatExpr::variable(v.theta, d), m, k);
    ScalarExpr obj;
    obj.constant = 1.0;
    obj.add(v.theta, pair.gamma_n);
    obj.add(v.omega, -pair.gamma_m);
    model.set_objective(Sense::Maximize, obj);
    Solution sol = solve(model, opts.solver);
    return std::make_tuple(sol, v);
  };

  int m = kDefaultM, k = kDefaultK;
  bool refine = false;
  if (opts.mk) {
    m = opts.mk->first;
    k = opts.mk->second;
  } else if (opts.eps) {
    refine = true;
  }

  auto [sol, v] = solve_mk(m, k);
  auto handle_status = [&](const Solution& s) {
    if (s.status == SolveStatus::DualInfeasible ||
        (s.status == SolveStatus::Optimal && s.objective > kQuasiCap)) {
      res.infinite = true;
      res.infinite_suspected = true;
      res.value = std::numeric_limits<double>::infinity();
      res.solver = stats_of(s);
      return true;
    }
    if (s.status != SolveStatus::Optimal)
      throw NumericalError("channel_measured_relent: solver returned " + to_string(s.status) +
                           " (" + s.message + ")");
    return false;
  };
  if (handle_status(sol)) return res;
  if (refine) {
    for (int round = 0; round < 3; ++round) {
      const double a =
          channel_range_parameter(v.recover_rho(sol), sol.var_values[v.omega], pair.dim_b);
      MkChoice choice = select_mk(a, *opts.eps);
      if (choice.m == m && choice.k == k) break;
      m = choice.m;
      k = choice.k;
      std::tie(sol, v) = solve_mk(m, k);
      if (handle_status(sol)) return res;
    }
  }

  res.solver = stats_of(sol);
  res.value = sol.objective;
  res.rho = v.recover_rho(sol);
  res.rho /= res.rho.trace().real();
  res.omega = sol.var_values[v.omega];
  res.theta = sol.var_values[v.theta];
  res.accuracy.m = m;
  res.accuracy.k = k;
  res.accuracy.a = channel_range_parameter(res.rho, res.omega, pair.dim_b);
  res.accuracy.eps_hat = scalar_r_grid_error(m, k, res.accuracy.a);

  finish_extraction(&res, pair, std::nullopt);
  return res;
}

ChannelStrategy extract_channel_strategy(const ChannelDivergenceResult& result,
                                         const ChannelPair& pair, const DivergenceTask& task) {
  if (result.infinite) throw InputError("extract_channel_strategy: no finite solve to extract");
  ChannelStrategy st;
  st.rho = result.rho;
  bool warn = false;
  CMat lift = support_pinv_sqrt_lift(result.rho, pair.dim_b, &warn);
  st.support_warning = warn;
  st.measurement = extract_measurement(hermitize(lift * result.omega * lift));
  CMat sand_n = sandwich_choi(st.rho, pair.gamma_n, pair.dim_b);
  CMat sand_m = sandwich_choi(st.rho, pair.gamma_m, pair.dim_b);
  const double classical = classical_divergence(induced(st.measurement, sand_n, sand_m), task);
  st.residual = std::abs(classical - result.value);
  return st;
}

}  // namespace mre

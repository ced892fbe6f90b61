// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each criterion pins its tolerance in code.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mre/linalg.hpp"
#include "mre/measured_channels.hpp"
#include "mre/measured_states.hpp"
#include "mre/oracle.hpp"
#include "mre/report.hpp"

using namespace mre;

namespace {

struct Collector {
  int solves = 0;
  double max_duality_gap = 0.0;
  double max_kkt_primal = 0.0;
  double max_kkt_dual = 0.0;

  void add(const SolverStats& s) {
    ++solves;
    max_duality_gap = std::max(max_duality_gap, s.duality_gap);
    max_kkt_primal = std::max(max_kkt_primal, s.kkt_primal);
    max_kkt_dual = std::max(max_kkt_dual, s.kkt_dual);
  }
};

Collector collector;
int failures = 0;

void criterion(int number, const std::string& name, const std::function<bool(std::string*)>& fn) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = fn(&detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%s] criterion %2d: %-28s (%6.1fs)%s%s\n", ok ? "PASS" : "FAIL", number,
              name.c_str(), secs, detail.empty() ? "" : "  ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

bool track(const DivergenceResult& r) {
  if (!r.infinite) collector.add(r.solver);
  return true;
}

bool track(const ChannelDivergenceResult& r) {
  if (!r.infinite) collector.add(r.solver);
  return true;
}

std::vector<CMat> pauli_depolarizing_kraus() {
  CMat i2 = CMat::Identity(2, 2), sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, Complex(0, -1), Complex(0, 1), 0;
  sz << 1, 0, 0, -1;
  return {0.5 * i2, 0.5 * sx, 0.5 * sy, 0.5 * sz};
}

std::vector<CMat> replacer_kraus(const CMat& tau) {
  Eigh e = eigh(tau);
  std::vector<CMat> kraus;
  const int d = static_cast<int>(tau.rows());
  for (int b = 0; b < d; ++b)
    for (int a = 0; a < d; ++a) {
      CMat k = CMat::Zero(d, d);
      k.col(a) = std::sqrt(std::max(e.values(b), 0.0)) * e.vectors.col(b);
      kraus.push_back(k);
    }
  return kraus;
}

// --- criteria ---------------------------------------------------------------

bool fidelity_anchor(std::string* detail) {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = trial < 30 ? 2 : 3;
    CMat rho = random_density(d, rng), sigma = random_density(d, rng);
    auto r = measured_renyi_quasi(rho, sigma, RenyiOrder::parse("1/2"));
    track(r);
    worst = std::max(worst, std::abs(r.quasi - fuchs_caves(rho, sigma).root_fidelity));
  }
  *detail = "max |Q - root fidelity| = " + std::to_string(worst);
  return worst <= 1e-6;
}

bool commuting_reduction(std::string* detail) {
  std::mt19937_64 rng(2002);
  double worst_renyi = 0.0, worst_kl = 0.0;
  const std::vector<std::string> alphas = {"1/4", "1/2", "3/4", "2", "3"};
  for (int trial = 0; trial < 50; ++trial) {
    const int d = trial < 30 ? 2 : 3;
    CMat rho, sigma;
    random_commuting_pair(d, rng, &rho, &sigma);
    Eigh er = eigh(rho);
    OutcomeDistribution spectra;
    spectra.p = er.values;
    spectra.w.resize(d);
    for (int i = 0; i < d; ++i)
      spectra.w(i) =
          (er.vectors.col(i).adjoint() * sigma * er.vectors.col(i))(0).real();
    for (const std::string& a : alphas) {
      RenyiOrder order = RenyiOrder::parse(a);
      auto r = measured_renyi_quasi(rho, sigma, order);
      track(r);
      worst_renyi =
          std::max(worst_renyi, std::abs(r.value - classical_renyi(spectra, order.value())));
    }
    auto kl = measured_relative_entropy(rho, sigma);
    track(kl);
    worst_kl = std::max(worst_kl, std::abs(kl.value - classical_kl(spectra)));
  }
  *detail = "max renyi err = " + std::to_string(worst_renyi) +
            ", max KL err = " + std::to_string(worst_kl);
  return worst_renyi <= 1e-5 && worst_kl <= 1e-4;
}

bool saturation_extraction(std::string* detail) {
  std::mt19937_64 rng(3003);
  double worst_renyi = 0.0, worst_rel = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int d = trial < 20 ? 2 : 3;
    CMat rho = random_density(d, rng), sigma = random_density(d, rng);
    for (const std::string& a : {"1/2", "2"}) {
      auto r = measured_renyi_quasi(rho, sigma, RenyiOrder::parse(a));
      track(r);
      worst_renyi = std::max(worst_renyi, r.saturation_residual);
    }
    auto rel = measured_relative_entropy(rho, sigma);
    track(rel);
    worst_rel = std::max(worst_rel, rel.saturation_residual - rel.accuracy.eps_hat);
  }
  *detail = "max renyi residual = " + std::to_string(worst_renyi) +
            ", max relent residual-over-band = " + std::to_string(worst_rel);
  return worst_renyi <= 1e-5 && worst_rel <= 1e-5;
}

bool boundary_sandwich(std::string* detail) {
  std::mt19937_64 rng(4004);
  struct Case {
    Rational t;
    GraphSide side;
  };
  const std::vector<Case> cases = {
      {Rational::of(-1, 1), GraphSide::Epigraph}, {Rational::of(-1, 2), GraphSide::Epigraph},
      {Rational::of(-1, 3), GraphSide::Epigraph}, {Rational::of(3, 8), GraphSide::Hypograph},
      {Rational::of(1, 2), GraphSide::Hypograph}, {Rational::of(3, 2), GraphSide::Epigraph},
      {Rational::of(2, 1), GraphSide::Epigraph}};
  int checked = 0;
  for (const Case& c : cases) {
    for (int trial = 0; trial < 30; ++trial) {
      const int d = 2 + trial % 2;
      CMat x = random_pd(d, rng), y = random_pd(d, rng);
      CMat g = geometric_mean(x, y, c.t.value());
      for (double s : {-1e-6, 1e-6}) {
        Model model;
        build_geomean_graph(model, c.t, c.side, MatExpr::constant_of(x),
                            MatExpr::constant_of(y),
                            MatExpr::constant_of(CMat(g + s * CMat::Identity(d, d))));
        Solution sol = solve(model, {});
        const bool feasible = sol.status == SolveStatus::Optimal;
        if (sol.status != SolveStatus::Optimal &&
            sol.status != SolveStatus::PrimalInfeasible) {
          *detail = "solver returned " + to_string(sol.status) + " at t = " +
                    std::to_string(c.t.value());
          return false;
        }
        const bool expect_feasible = (c.side == GraphSide::Hypograph) == (s < 0);
        if (feasible != expect_feasible) {
          *detail = "wrong feasibility at t = " + std::to_string(c.t.value()) +
                    ", offset = " + std::to_string(s);
          return false;
        }
        ++checked;
      }
    }
  }
  *detail = std::to_string(checked) + " boundary probes";
  return true;
}

bool scalar_log_accuracy(std::string* detail) {
  const double sup33 = scalar_r_grid_error(3, 3, 10.0);
  if (sup33 >= 1e-4) {
    *detail = "grid sup at (3,3) = " + std::to_string(sup33);
    return false;
  }
  for (double eps : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7}) {
    MkChoice choice = select_mk(10.0, eps);
    if (choice.bound > eps) {
      *detail = "certified bound misses eps = " + std::to_string(eps);
      return false;
    }
    double sup = 0.0;  // independent uniform scan
    for (int i = 0; i <= 4000; ++i) {
      const double z = 0.1 + (10.0 - 0.1) * i / 4000.0;
      sup = std::max(sup, std::abs(scalar_r(z, choice.m, choice.k) - std::log(z)));
    }
    if (sup > eps * 1.02) {
      *detail = "independent scan exceeds eps = " + std::to_string(eps);
      return false;
    }
  }
  *detail = "grid sup at (3,3) = " + std::to_string(sup33);
  return true;
}

bool relent_convergence(std::string* detail) {
  std::mt19937_64 rng(6006);
  const std::vector<std::pair<int, int>> ladder = {{1, 1}, {2, 2}, {3, 3}, {4, 4}};
  std::vector<double> max_err(ladder.size(), 0.0);
  double worst_at_selected = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    CMat rho = random_density(2, rng), sigma = random_density(2, rng);
    BruteForceResult oracle = brute_force_measured(rho, sigma, {}, 500, 7000 + trial);
    StateOptions opts;
    opts.eps = 1e-5;
    auto selected = measured_relative_entropy(rho, sigma, opts);
    track(selected);
    worst_at_selected = std::max(worst_at_selected, std::abs(selected.value - oracle.value));
    for (size_t i = 0; i < ladder.size(); ++i) {
      StateOptions fixed;
      fixed.mk = ladder[i];
      auto r = measured_relative_entropy(rho, sigma, fixed);
      track(r);
      max_err[i] = std::max(max_err[i], std::abs(r.value - oracle.value));
    }
  }
  for (size_t i = 0; i + 1 < ladder.size(); ++i) {
    if (max_err[i + 1] > max_err[i] + 1e-12) {
      *detail = "max-error ladder not monotone";
      return false;
    }
  }
  *detail = "max |D_mk - oracle| at selection = " + std::to_string(worst_at_selected);
  return worst_at_selected <= 1e-4;
}

bool dpi_and_monotonicity(std::string* detail) {
  std::mt19937_64 rng(7007);
  const std::vector<std::string> alphas = {"1/4", "1/2", "3/4", "2", "3"};
  double worst_dpi = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = trial % 3 == 2 ? 3 : 2;
    CMat rho = random_density(d, rng), sigma = random_density(d, rng);
    auto kraus = random_channel_kraus(d, d, 2, rng);
    auto out = apply_kraus(kraus, {rho, sigma});
    if (trial % 5 == 4) {
      auto before = measured_relative_entropy(rho, sigma);
      auto after = measured_relative_entropy(out[0], out[1]);
      track(before);
      track(after);
      worst_dpi = std::max(worst_dpi, after.value - before.value);
    } else {
      RenyiOrder order = RenyiOrder::parse(alphas[trial % alphas.size()]);
      auto before = measured_renyi_quasi(rho, sigma, order);
      auto after = measured_renyi_quasi(out[0], out[1], order);
      track(before);
      track(after);
      worst_dpi = std::max(worst_dpi, after.value - before.value);
    }
  }
  if (worst_dpi > 1e-6) {
    *detail = "DPI violation " + std::to_string(worst_dpi);
    return false;
  }
  double worst_mono = -1e300;
  const std::vector<std::string> grid = {"1/4", "1/2", "3/4", "3/2", "2", "3"};
  for (int trial = 0; trial < 20; ++trial) {
    CMat rho = random_density(2, rng), sigma = random_density(2, rng);
    double prev = -1e300;
    for (const std::string& a : grid) {
      auto r = measured_renyi_quasi(rho, sigma, RenyiOrder::parse(a));
      track(r);
      worst_mono = std::max(worst_mono, prev - r.value);
      prev = r.value;
    }
  }
  *detail = "worst DPI slack = " + std::to_string(worst_dpi) +
            ", worst monotonicity slack = " + std::to_string(worst_mono);
  return worst_mono <= 1e-6;
}

bool channel_reductions(std::string* detail) {
  std::mt19937_64 rng(8008);
  // Identical channels.
  auto kraus = random_channel_kraus(2, 2, 2, rng);
  ChannelPair same = ChannelPair::from_kraus(kraus, kraus);
  for (const std::string& a : {"1/2", "2"}) {
    auto r = channel_measured_renyi(same, RenyiOrder::parse(a));
    track(r);
    if (std::abs(r.value) > 1e-6) {
      *detail = "N = M gave " + std::to_string(r.value);
      return false;
    }
  }
  auto rel = channel_measured_relent(same);
  track(rel);
  if (std::abs(rel.value) > 1e-6) {
    *detail = "N = M relent gave " + std::to_string(rel.value);
    return false;
  }

  // Replacer channels reduce to the state problem.
  CMat rho0 = random_density(2, rng), sigma0 = random_density(2, rng);
  ChannelPair rep = ChannelPair::from_kraus(replacer_kraus(rho0), replacer_kraus(sigma0));
  for (const std::string& a : {"1/2", "2"}) {
    auto ch = channel_measured_renyi(rep, RenyiOrder::parse(a));
    auto st = measured_renyi_quasi(rho0, sigma0, RenyiOrder::parse(a));
    track(ch);
    track(st);
    if (std::abs(ch.value - st.value) > 1e-4) {
      *detail = "replacer mismatch at alpha = " + a;
      return false;
    }
  }
  auto chr = channel_measured_relent(rep);
  auto str = measured_relative_entropy(rho0, sigma0);
  track(chr);
  track(str);
  if (std::abs(chr.value - str.value) > 1e-4) {
    *detail = "replacer relent mismatch";
    return false;
  }

  // Trivial energy constraint is bitwise identical to none.
  auto plain = channel_measured_renyi(same, RenyiOrder::parse("2"));
  auto trivial =
      channel_measured_renyi(same, RenyiOrder::parse("2"), EnergyConstraint::unconstrained(2));
  if (plain.value != trivial.value || plain.solver.iterations != trivial.solver.iterations) {
    *detail = "trivial energy constraint changed the model";
    return false;
  }

  // Identity vs completely depolarizing against the Bloch-grid oracle.
  ChannelPair depol = ChannelPair::from_kraus({CMat::Identity(2, 2)}, pauli_depolarizing_kraus());
  auto ch = channel_measured_renyi(depol, RenyiOrder::parse("1/2"));
  track(ch);
  double grid_max = -1e300;
  const int grid_n = 200;
  for (int i = 0; i < grid_n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / grid_n;
    const double phi = M_PI * (1.0 + std::sqrt(5.0)) * i;
    const double st = std::sqrt(std::max(0.0, 1.0 - z * z));
    CVec psi(2);
    psi << std::cos(0.5 * std::acos(z)),
        std::polar(std::sin(0.5 * std::acos(z)), phi);
    (void)st;
    CMat rho_in = psi * psi.adjoint();
    CMat sn = sandwich_choi(rho_in, depol.gamma_n, 2);
    CMat sm = sandwich_choi(rho_in, depol.gamma_m, 2);
    auto r = measured_renyi_quasi(hermitize(sn + 1e-12 * CMat::Identity(4, 4)), sm,
                                  RenyiOrder::parse("1/2"));
    track(r);
    grid_max = std::max(grid_max, r.value);
    if (ch.value < r.value - 1e-6) {
      *detail = "channel value below a grid input";
      return false;
    }
  }
  *detail = "channel " + std::to_string(ch.value) + " vs grid max " + std::to_string(grid_max);
  return std::abs(ch.value - grid_max) <= 2e-3;
}

bool dyadic_lmi_count(std::string* detail) {
  for (int l = 1; l <= 6; ++l) {
    Model model;
    VarId yv = model.add_psd(2, "y");
    GeomeanGraph g = build_geomean_graph(
        model, Rational::of((1LL << l) - 1, 1LL << l), GraphSide::Hypograph,
        MatExpr::constant_of(CMat::Identity(2, 2)), MatExpr::variable(yv, 2),
        MatExpr::constant_of(CMat::Identity(2, 2)));
    if (g.certificate.lmi_count != l || g.certificate.dyadic_substituted) {
      *detail = "count mismatch at level " + std::to_string(l);
      return false;
    }
  }
  *detail = "levels 1..6 emit exactly l blocks";
  return true;
}

bool alpha_limit(std::string* detail) {
  std::mt19937_64 rng(10010);
  double worst_final = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    CMat rho = random_density(2, rng), sigma = random_density(2, rng);
    StateOptions opts;
    opts.eps = 1e-7;
    auto dm = measured_relative_entropy(rho, sigma, opts);
    track(dm);
    double prev = 1e300;
    for (int l = 2; l <= 6; ++l) {
      const long long den = 1LL << l;
      auto lo = measured_renyi_quasi(rho, sigma, RenyiOrder::of(Rational::of(den - 1, den)));
      auto hi = measured_renyi_quasi(rho, sigma, RenyiOrder::of(Rational::of(den + 1, den)));
      track(lo);
      track(hi);
      const double err = std::max(std::abs(lo.value - dm.value), std::abs(hi.value - dm.value));
      if (err > prev + 1e-9) {
        *detail = "limit error not decreasing at l = " + std::to_string(l);
        return false;
      }
      prev = err;
      if (l == 6) worst_final = std::max(worst_final, err);
    }
  }
  *detail = "max error at l = 6: " + std::to_string(worst_final);
  return worst_final <= 5e-3;
}

bool solver_conformance(std::string* detail) {
  // Infeasible toy detects as infeasible under the default tolerances.
  Model model;
  VarId z = model.add_hermitian(2, "Z");
  model.add_lmi(LmiBlock::single(
      MatExpr::variable(z, 2) - MatExpr::constant_of(CMat::Identity(2, 2)), "Z-I"));
  ScalarExpr cap;
  cap.constant = 1.0;
  cap.add(z, -CMat::Identity(2, 2));
  model.add_scalar_ineq(cap, "cap");
  ScalarExpr obj;
  obj.add(z, CMat::Identity(2, 2));
  model.set_objective(Sense::Minimize, obj);
  if (solve(model, {}).status != SolveStatus::PrimalInfeasible) {
    *detail = "infeasible toy not detected";
    return false;
  }
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%d solves: max duality gap %.2e, max KKT residuals (%.2e, %.2e)",
                collector.solves, collector.max_duality_gap, collector.max_kkt_primal,
                collector.max_kkt_dual);
  *detail = buf;
  return collector.max_duality_gap <= 1e-8 && collector.max_kkt_primal <= 1e-7 &&
         collector.max_kkt_dual <= 1e-7;
}

}  // namespace

int main() {
  criterion(1, "fidelity anchor", fidelity_anchor);
  criterion(2, "commuting reduction", commuting_reduction);
  criterion(3, "saturation extraction", saturation_extraction);
  criterion(4, "cone boundary sandwich", boundary_sandwich);
  criterion(5, "scalar log approximation", scalar_log_accuracy);
  criterion(6, "D_mk convergence", relent_convergence);
  criterion(7, "DPI and alpha monotonicity", dpi_and_monotonicity);
  criterion(8, "channel reductions", channel_reductions);
  criterion(9, "dyadic LMI count", dyadic_lmi_count);
  criterion(10, "alpha -> 1 limit", alpha_limit);
  criterion(11, "solver conformance", solver_conformance);
  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "mre/cones.hpp"
#include "mre/linalg.hpp"
#include "mre/oracle.hpp"
#include "mre/solver.hpp"

using namespace mre;

namespace {

bool geomean_point_feasible(const Rational& t, GraphSide side, const CMat& x, const CMat& y,
                            const CMat& tt) {
  Model model;
  build_geomean_graph(model, t, side, MatExpr::constant_of(x), MatExpr::constant_of(y),
                      MatExpr::constant_of(tt));
  Solution sol = solve(model, {});
  if (sol.status == SolveStatus::Optimal) return true;
  if (sol.status == SolveStatus::PrimalInfeasible) return false;
  FAIL("feasibility solve returned ", to_string(sol.status));
  return false;
}

bool log_perspective_point_feasible(const CMat& x, const CMat& y, const CMat& tt, int m, int k) {
  Model model;
  build_log_perspective_graph(model, MatExpr::constant_of(x), MatExpr::constant_of(y),
                              MatExpr::constant_of(tt), m, k);
  Solution sol = solve(model, {});
  if (sol.status == SolveStatus::Optimal) return true;
  if (sol.status == SolveStatus::PrimalInfeasible) return false;
  FAIL("feasibility solve returned ", to_string(sol.status));
  return false;
}

}  // namespace

TEST_CASE("rational parsing and reduction") {
  Rational r = Rational::parse("6/8");
  CHECK(r.p == 3);
  CHECK(r.q == 4);
  CHECK(Rational::parse("-2/4").p == -1);
  CHECK(Rational::parse("3").q == 1);
  CHECK_THROWS_AS(Rational::parse("1/0"), InputError);
  CHECK_THROWS_AS(Rational::parse("a/b"), InputError);
  CHECK_THROWS_AS(Rational::parse("1/2x"), InputError);

  int level = -1;
  CHECK(Rational::of(3, 8).dyadic(&level));
  CHECK(level == 3);
  CHECK(!Rational::of(1, 3).dyadic());
  CHECK(Rational::of(2, 1).dyadic(&level));
  CHECK(level == 0);
}

TEST_CASE("geomean graph shapes and counts") {
  const int d = 2;
  auto count_for = [&](const Rational& t, GraphSide side) {
    Model model;
    VarId xv = model.add_psd(d, "x");
    GeomeanGraph g =
        build_geomean_graph(model, t, side, MatExpr::constant_of(CMat::Identity(d, d)),
                            MatExpr::variable(xv, d),
                            MatExpr::constant_of(CMat::Identity(d, d)));
    return g.certificate;
  };
  CHECK(count_for(Rational::of(1, 2), GraphSide::Hypograph).lmi_count == 1);
  CHECK(count_for(Rational::of(3, 8), GraphSide::Hypograph).lmi_count == 3);
  CHECK(count_for(Rational::of(-1, 1), GraphSide::Epigraph).lmi_count == 1);
  CHECK(count_for(Rational::of(2, 1), GraphSide::Epigraph).lmi_count == 1);
  CHECK(count_for(Rational::of(3, 2), GraphSide::Epigraph).lmi_count == 2);

  // Dyadic denominators 2^l emit exactly l chain blocks on the hypograph side.
  for (int l = 1; l <= 6; ++l) {
    ConeCertificate c =
        count_for(Rational::of((1LL << l) - 1, 1LL << l), GraphSide::Hypograph);
    CHECK(c.lmi_count == l);
    CHECK(!c.dyadic_substituted);
    CHECK(c.value_error_bound == 0.0);
  }

  // Non-dyadic exponents get a recorded substitution.
  ConeCertificate sub = count_for(Rational::of(1, 3), GraphSide::Hypograph);
  CHECK(sub.dyadic_substituted);
  CHECK(sub.exponent_gap <= std::ldexp(1.0, -kDefaultDyadicLevel));
  CHECK(sub.exponent_gap > 0.0);

  CHECK_THROWS_AS(count_for(Rational::of(3, 2), GraphSide::Hypograph), InputError);
  CHECK_THROWS_AS(count_for(Rational::of(1, 2), GraphSide::Epigraph), InputError);
}

TEST_CASE("geomean boundary sandwich") {
  std::mt19937_64 rng(77);
  struct Case {
    Rational t;
    GraphSide side;
  };
  const std::vector<Case> cases = {
      {Rational::of(-1, 1), GraphSide::Epigraph}, {Rational::of(-1, 2), GraphSide::Epigraph},
      {Rational::of(-1, 3), GraphSide::Epigraph}, {Rational::of(3, 8), GraphSide::Hypograph},
      {Rational::of(1, 2), GraphSide::Hypograph}, {Rational::of(3, 2), GraphSide::Epigraph},
      {Rational::of(2, 1), GraphSide::Epigraph}};
  for (const Case& c : cases) {
    for (int trial = 0; trial < 4; ++trial) {
      const int d = 2 + static_cast<int>(rng() % 2);
      CMat x = random_pd(d, rng), y = random_pd(d, rng);
      CMat g = geometric_mean(x, y, c.t.value());
      const CMat eps = 1e-6 * CMat::Identity(d, d);
      const bool below_ok = geomean_point_feasible(c.t, c.side, x, y, g - eps);
      const bool above_ok = geomean_point_feasible(c.t, c.side, x, y, g + eps);
      if (c.side == GraphSide::Hypograph) {
        CHECK(below_ok);
        CHECK(!above_ok);
      } else {
        CHECK(!below_ok);
        CHECK(above_ok);
      }
    }
  }
}

TEST_CASE("log perspective graph counts and boundaries") {
  const int d = 2;
  {
    Model model;
    VarId yv = model.add_psd(d, "y");
    LogPerspectiveGraph g = build_log_perspective_graph(
        model, MatExpr::constant_of(CMat::Identity(d, d)), MatExpr::variable(yv, d),
        MatExpr::constant_of(CMat::Zero(d, d)), 3, 3);
    CHECK(g.block_count == 6);
    CHECK(g.aux.size() == 7);  // Z_0..Z_3 and T_1..T_3
  }

  // X = Y = I: the maximal feasible T is exactly 0.
  CMat id = CMat::Identity(d, d);
  CHECK(log_perspective_point_feasible(id, id, -1e-6 * id, 2, 2));
  CHECK(!log_perspective_point_feasible(id, id, 1e-6 * id, 2, 2));

  // Commuting case against the scalar surrogate, at its certified accuracy.
  CMat y(2, 2);
  y << 4, 0, 0, 0.25;
  const double delta = 2e-5;
  CMat t_in(2, 2), t_out(2, 2);
  t_in << std::log(4.0) - delta, 0, 0, std::log(0.25) - delta;
  t_out << std::log(4.0) + delta, 0, 0, std::log(0.25) + delta;
  CHECK(log_perspective_point_feasible(id, y, t_in, 3, 3));
  CHECK(!log_perspective_point_feasible(id, y, t_out, 3, 3));
}

TEST_CASE("log perspective scalar consistency on commuting operands") {
  // Maximal diagonal T under the graph matches x * r_mk(y/x) entrywise.
  const int d = 2;
  CMat x(2, 2), y(2, 2);
  x << 2, 0, 0, 0.5;
  y << 3, 0, 0, 0.2;
  const int m = 3, k = 2;
  Model model;
  VarId tv = model.add_hermitian(d, "t");
  build_log_perspective_graph(model, MatExpr::constant_of(x), MatExpr::constant_of(y),
                              MatExpr::variable(tv, d), m, k);
  ScalarExpr obj;
  obj.add(tv, CMat::Identity(d, d));
  model.set_objective(Sense::Maximize, obj);
  Solution sol = solve(model, {});
  REQUIRE(sol.status == SolveStatus::Optimal);
  const CMat t_opt = sol.var_values[tv];
  for (int i = 0; i < d; ++i) {
    const double xi = x(i, i).real(), yi = y(i, i).real();
    CHECK(std::abs(t_opt(i, i).real() - xi * scalar_r(yi / xi, m, k)) < 1e-7);
  }
  CHECK(std::abs(t_opt(0, 1)) < 1e-7);
}

TEST_CASE("geomean boundary with variable first slot") {
  // Same sandwich but with X supplied through a lifted variable, pinned by
  // equalities, exercising the affine-in-all-slots path used by channels.
  std::mt19937_64 rng(97);
  CMat rho = random_density(2, rng);
  CMat x = kron(rho, CMat::Identity(2, 2));
  CMat y = random_pd(4, rng);
  CMat g = geometric_mean(hermitize(x + 1e-14 * CMat::Identity(4, 4)), y, 0.5);
  for (double s : {-1e-5, 1e-5}) {
    Model model;
    VarId rv = model.add_psd(2, "rho");
    // Pin the variable to the sampled state.
    MatExpr pin = MatExpr::variable(rv, 2) - MatExpr::constant_of(rho);
    model.add_mat_eq(pin, "pin");
    MatExpr xe = MatExpr::lifted(rv, 2, 2);
    build_geomean_graph(model, Rational::of(1, 2), GraphSide::Hypograph, xe,
                        MatExpr::constant_of(y),
                        MatExpr::constant_of(CMat(g + s * CMat::Identity(4, 4))));
    Solution sol = solve(model, {});
    if (s < 0) {
      CHECK(sol.status == SolveStatus::Optimal);
    } else {
      CHECK(sol.status == SolveStatus::PrimalInfeasible);
    }
  }
}

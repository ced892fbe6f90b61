#include <cmath>

#include "doctest.h"
#include "mre/linalg.hpp"
#include "mre/oracle.hpp"

using namespace mre;

namespace {

OutcomeDistribution dist(std::initializer_list<double> p, std::initializer_list<double> w) {
  OutcomeDistribution d;
  d.p.resize(static_cast<int>(p.size()));
  d.w.resize(static_cast<int>(w.size()));
  int i = 0;
  for (double v : p) d.p(i++) = v;
  i = 0;
  for (double v : w) d.w(i++) = v;
  return d;
}

}  // namespace

TEST_CASE("classical divergences") {
  OutcomeDistribution same = dist({0.3, 0.7}, {0.3, 0.7});
  for (double a : {0.25, 0.5, 2.0, 3.0}) CHECK(std::abs(classical_renyi(same, a)) < 1e-12);
  CHECK(std::abs(classical_kl(same)) < 1e-12);

  OutcomeDistribution d = dist({0.75, 0.25}, {0.5, 0.5});
  CHECK(classical_renyi(d, 2.0) == doctest::Approx(std::log(1.25)));
  CHECK(classical_kl(d) == doctest::Approx(0.75 * std::log(1.5) + 0.25 * std::log(0.5)));

  OutcomeDistribution disjoint = dist({1.0, 0.0}, {0.0, 1.0});
  CHECK(std::isinf(classical_renyi(disjoint, 2.0)));
  CHECK(std::isinf(classical_kl(disjoint)));
  CHECK(classical_kl(dist({1.0, 0.0}, {0.5, 0.5})) == doctest::Approx(std::log(2.0)));

  CHECK_THROWS_AS(classical_renyi(d, 1.0), InputError);
  CHECK_THROWS_AS(classical_renyi(d, 0.0), InputError);
}

TEST_CASE("renyi monotone in alpha and DPI under stochastic maps") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.01, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    OutcomeDistribution d;
    d.p.resize(n);
    d.w.resize(n);
    for (int i = 0; i < n; ++i) {
      d.p(i) = unif(rng);
      d.w(i) = unif(rng);
    }
    d.p /= d.p.sum();
    d.w /= d.w.sum();
    double prev = -1e300;
    for (double a : {0.25, 0.5, 0.75, 1.5, 2.0, 3.0}) {
      const double v = classical_renyi(d, a);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
    // Random column-stochastic matrix as the processing channel.
    RMat n2(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) n2(i, j) = unif(rng);
    for (int j = 0; j < n; ++j) n2.col(j) /= n2.col(j).sum();
    OutcomeDistribution pushed;
    pushed.p = n2 * d.p;
    pushed.w = n2 * d.w;
    for (double a : {0.5, 2.0})
      CHECK(classical_renyi(d, a) >= classical_renyi(pushed, a) - 1e-10);
    CHECK(classical_kl(d) >= classical_kl(pushed) - 1e-10);
  }
}

TEST_CASE("induced distributions") {
  Measurement canonical;
  canonical.basis = CMat::Identity(2, 2);
  CMat rho(2, 2), sigma(2, 2);
  rho << 0.75, 0, 0, 0.25;
  sigma << 0.5, 0, 0, 0.5;
  OutcomeDistribution d = induced(canonical, rho, sigma);
  CHECK(d.p(0) == doctest::Approx(0.75));
  CHECK(d.w(1) == doctest::Approx(0.5));

  std::mt19937_64 rng(9);
  Measurement any;
  any.basis = random_unitary(3, rng);
  OutcomeDistribution u =
      induced(any, CMat::Identity(3, 3) / 3.0, CMat::Identity(3, 3) / 3.0);
  for (int i = 0; i < 3; ++i) CHECK(u.p(i) == doctest::Approx(1.0 / 3.0));

  Measurement had;
  had.basis.resize(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  had.basis << s, s, s, -s;
  CMat zero = CMat::Zero(2, 2);
  zero(0, 0) = 1.0;
  OutcomeDistribution h = induced(had, zero, zero);
  CHECK(h.p(0) == doctest::Approx(0.5));
  CHECK(h.p(1) == doctest::Approx(0.5));

  Measurement broken;
  broken.basis = 0.5 * CMat::Identity(2, 2);
  CHECK_THROWS_AS(induced(broken, rho, sigma), InputError);
}

TEST_CASE("fuchs_caves observable and root fidelity") {
  CMat rho = CMat::Identity(2, 2) * 0.5;
  FuchsCaves same = fuchs_caves(rho, rho);
  CHECK((same.observable - CMat::Identity(2, 2)).norm() < 1e-8);
  CHECK(same.root_fidelity == doctest::Approx(1.0));

  CMat p(2, 2), q(2, 2);
  p << 0.75, 0, 0, 0.25;
  q << 0.4, 0, 0, 0.6;
  FuchsCaves fc = fuchs_caves(p, q);
  CHECK(fc.root_fidelity ==
        doctest::Approx(std::sqrt(0.75 * 0.4) + std::sqrt(0.25 * 0.6)));

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    CMat a = random_density(2, rng), b = random_density(2, rng);
    FuchsCaves f = fuchs_caves(a, b);
    // Independent route for the value.
    CMat bs = matsqrt(b);
    Eigh e = eigh(hermitize(bs * a * bs));
    double val = 0.0;
    for (int i = 0; i < 2; ++i) val += std::sqrt(std::max(e.values(i), 0.0));
    CHECK(std::abs(f.root_fidelity - val) < 1e-10);
    // The observable's eigenbasis achieves the fidelity as a Bhattacharyya sum.
    Measurement m;
    m.basis = eigh(f.observable).vectors;
    OutcomeDistribution d = induced(m, a, b);
    double bh = 0.0;
    for (int i = 0; i < d.p.size(); ++i) bh += std::sqrt(d.p(i) * d.w(i));
    CHECK(std::abs(bh - f.root_fidelity) < 1e-8);
  }

  CMat sing = CMat::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(fuchs_caves(rho, sing), DomainError);
}

TEST_CASE("brute force measurement search") {
  CMat rho(2, 2), sigma(2, 2);
  rho << 0.75, 0, 0, 0.25;
  sigma << 0.5, 0, 0, 0.5;

  BruteForceResult same = brute_force_measured(rho, rho, 2.0, 50, 1);
  CHECK(std::abs(same.value) < 1e-9);

  std::mt19937_64 rng(17);
  CMat u = random_unitary(2, rng);
  CMat rho_u = hermitize(u * rho * u.adjoint());
  CMat sigma_u = hermitize(u * sigma * u.adjoint());
  BruteForceResult r = brute_force_measured(rho_u, sigma_u, 2.0, 100, 2);
  CHECK(std::abs(r.value - std::log(1.25)) < 1e-6);

  // |0><0| vs |+><+| at alpha = 1/2: D = ln 2 via the Fuchs-Caves value.
  CMat zero = CMat::Zero(2, 2), plus(2, 2);
  zero(0, 0) = 1.0;
  plus << 0.5, 0.5, 0.5, 0.5;
  BruteForceResult f = brute_force_measured(zero, plus, 0.5, 500, 3);
  CHECK(std::abs(f.value - std::log(2.0)) < 1e-4);

  // Determinism under a fixed seed.
  BruteForceResult f2 = brute_force_measured(zero, plus, 0.5, 500, 3);
  CHECK(f.value == f2.value);
}

TEST_CASE("variational probe bounds") {
  CMat rho(2, 2), sigma(2, 2);
  rho << 0.75, 0, 0, 0.25;
  sigma << 0.5, 0, 0, 0.5;

  // omega = I: alpha Tr[rho] + (1-alpha) Tr[sigma] regardless of regime.
  for (double a : {0.25, 0.75, 2.0}) {
    auto v = variational_probe(rho, sigma, a, {CMat::Identity(2, 2)});
    CHECK(v[0] == doctest::Approx(a + (1 - a) * sigma.trace().real()));
  }

  // Every sample bounds Q from the correct side (Q = 1.25 at alpha = 2).
  std::mt19937_64 rng(19);
  std::vector<CMat> samples;
  for (int i = 0; i < 10; ++i) samples.push_back(random_pd(2, rng));
  auto vals = variational_probe(rho, sigma, 2.0, samples);
  for (double v : vals) CHECK(v <= 1.25 + 1e-9);
  auto vals_half = variational_probe(rho, sigma, 0.5, samples);
  const double q_half = std::sqrt(0.75 * 0.5) + std::sqrt(0.25 * 0.5);
  for (double v : vals_half) CHECK(v >= q_half - 1e-9);
}

TEST_CASE("random channel sampling is trace preserving") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    auto kraus = random_channel_kraus(2, 3, 2, rng);
    CMat acc = CMat::Zero(2, 2);
    for (const CMat& k : kraus) acc += k.adjoint() * k;
    CHECK((acc - CMat::Identity(2, 2)).norm() < 1e-10);
  }
}

#include "mre/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mre/linalg.hpp"

namespace mre {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbFloor = 1e-14;

double clamp_prob(double v, const char* what) {
  if (v < -1e-12) throw InputError(std::string(what) + ": negative outcome probability");
  return std::max(v, 0.0);
}

}  // namespace

double Measurement::resolution_defect() const {
  CMat sum = CMat::Zero(basis.rows(), basis.rows());
  for (int y = 0; y < outcomes(); ++y) sum += projector(y);
  return (sum - CMat::Identity(basis.rows(), basis.rows())).cwiseAbs().maxCoeff();
}

OutcomeDistribution induced(const Measurement& meas, const CMat& rho, const CMat& sigma) {
  if (meas.basis.rows() != rho.rows() || rho.rows() != sigma.rows())
    throw InputError("induced: dimension mismatch");
  if (meas.resolution_defect() > 1e-8)
    throw InputError("induced: measurement does not resolve the identity");
  OutcomeDistribution d;
  d.p.resize(meas.outcomes());
  d.w.resize(meas.outcomes());
  for (int y = 0; y < meas.outcomes(); ++y) {
    const CVec v = meas.basis.col(y);
    d.p(y) = clamp_prob((v.adjoint() * rho * v)(0).real(), "induced rho");
    d.w(y) = clamp_prob((v.adjoint() * sigma * v)(0).real(), "induced sigma");
  }
  return d;
}

double classical_renyi(const OutcomeDistribution& d, double alpha) {
  if (!(alpha > 0) || alpha == 1.0)
    throw InputError("classical_renyi: alpha must be in (0,1) or (1,inf)");
  double acc = 0.0;
  for (int x = 0; x < d.p.size(); ++x) {
    const double p = d.p(x), w = d.w(x);
    if (p <= kProbFloor) continue;  // p = 0 contributes nothing at any order
    if (w <= kProbFloor) {
      if (alpha > 1.0) return kInf;
      continue;  // p^a * 0^(1-a) = 0 for a < 1
    }
    acc += std::pow(p, alpha) * std::pow(w, 1.0 - alpha);
  }
  if (acc <= 0.0) return alpha < 1.0 ? kInf : -kInf;
  return std::log(acc) / (alpha - 1.0);
}

double classical_kl(const OutcomeDistribution& d) {
  double acc = 0.0;
  for (int x = 0; x < d.p.size(); ++x) {
    const double p = d.p(x), w = d.w(x);
    if (p <= kProbFloor) continue;
    if (w <= kProbFloor) return kInf;
    acc += p * std::log(p / w);
  }
  return acc;
}

double classical_divergence(const OutcomeDistribution& d, const DivergenceTask& task) {
  return task ? classical_renyi(d, *task) : classical_kl(d);
}

namespace {

double measurement_value(const CMat& basis, const CMat& rho, const CMat& sigma,
                         const DivergenceTask& task) {
  OutcomeDistribution d;
  const int n = static_cast<int>(basis.cols());
  d.p.resize(n);
  d.w.resize(n);
  for (int y = 0; y < n; ++y) {
    const CVec v = basis.col(y);
    d.p(y) = std::max((v.adjoint() * rho * v)(0).real(), 0.0);
    d.w(y) = std::max((v.adjoint() * sigma * v)(0).real(), 0.0);
  }
  return classical_divergence(d, task);
}

// Golden-section maximization on [lo, hi]; f unimodal enough in practice.
template <typename F>
double golden_max(F f, double lo, double hi, int iters, double* best_arg) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  if (f1 >= f2) {
    *best_arg = x1;
    return f1;
  }
  *best_arg = x2;
  return f2;
}

}  // namespace

BruteForceResult brute_force_measured(const CMat& rho, const CMat& sigma,
                                      const DivergenceTask& task, int budget, uint64_t seed) {
  const int d = static_cast<int>(rho.rows());
  std::mt19937_64 rng(seed);
  CMat best_basis = CMat::Identity(d, d);
  double best = measurement_value(best_basis, rho, sigma, task);
  for (int trial = 0; trial < budget; ++trial) {
    CMat u = random_unitary(d, rng);
    const double v = measurement_value(u, rho, sigma, task);
    if (v > best) {
      best = v;
      best_basis = u;
    }
  }

  // Local refinement: rotate outcome pairs, optimizing the angle for a real
  // and an imaginary phase in turn. Orthonormality is preserved exactly.
  auto rotated = [&](const CMat& basis, int y1, int y2, double angle, double phase) {
    CMat out = basis;
    const Complex e = std::polar(1.0, phase);
    out.col(y1) = std::cos(angle) * basis.col(y1) + e * std::sin(angle) * basis.col(y2);
    out.col(y2) = -std::conj(e) * std::sin(angle) * basis.col(y1) + std::cos(angle) * basis.col(y2);
    return out;
  };
  for (int sweep = 0; sweep < 50; ++sweep) {
    double improved = 0.0;
    for (int y1 = 0; y1 < d; ++y1)
      for (int y2 = y1 + 1; y2 < d; ++y2)
        for (const double phase : {0.0, M_PI_2}) {
          auto f = [&](double a) {
            return measurement_value(rotated(best_basis, y1, y2, a, phase), rho, sigma, task);
          };
          double arg = 0.0;
          const double v = golden_max(f, -M_PI_4, M_PI_4, 40, &arg);
          if (v > best + 1e-15) {
            improved += v - best;
            best = v;
            best_basis = rotated(best_basis, y1, y2, arg, phase);
          }
        }
    if (improved < 1e-12) break;
  }
  BruteForceResult res;
  res.value = best;
  res.measurement.basis = best_basis;
  return res;
}

FuchsCaves fuchs_caves(const CMat& rho, const CMat& sigma) {
  FuchsCaves fc;
  CMat sigma_inv = matpow(sigma, -1.0);  // throws DomainError when singular
  fc.observable = geometric_mean(sigma_inv, rho, 0.5);
  CMat ss = matsqrt(sigma);
  Eigh e = eigh(hermitize(ss * rho * ss));
  double acc = 0.0;
  for (int i = 0; i < e.values.size(); ++i) acc += std::sqrt(std::max(e.values(i), 0.0));
  fc.root_fidelity = acc;
  return fc;
}

std::vector<double> variational_probe(const CMat& rho, const CMat& sigma, double alpha,
                                      const std::vector<CMat>& omega_samples) {
  if (!(alpha > 0) || alpha == 1.0)
    throw InputError("variational_probe: alpha must be in (0,1) or (1,inf)");
  std::vector<double> out;
  for (const CMat& w : omega_samples) {
    double v;
    if (alpha < 0.5) {
      v = alpha * (w * rho).trace().real() +
          (1.0 - alpha) * (matpow(w, alpha / (alpha - 1.0)) * sigma).trace().real();
    } else {
      v = alpha * (matpow(w, 1.0 - 1.0 / alpha) * rho).trace().real() +
          (1.0 - alpha) * (w * sigma).trace().real();
    }
    out.push_back(v);
  }
  return out;
}

CMat random_unitary(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMat g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(normal(rng), normal(rng));
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ();
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    const Complex rd = r(i, i);
    const double a = std::abs(rd);
    q.col(i) *= a > 0 ? rd / a : Complex(1, 0);
  }
  return q;
}

CMat random_density(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMat g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(normal(rng), normal(rng));
  CMat rho = g * g.adjoint();
  return hermitize(rho / rho.trace().real());
}

CMat random_pd(int dim, std::mt19937_64& rng, double ridge) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMat g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = Complex(normal(rng), normal(rng));
  CMat a = g * g.adjoint() / dim + ridge * CMat::Identity(dim, dim);
  return hermitize(a);
}

std::vector<CMat> random_channel_kraus(int dim_in, int dim_out, int env, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMat g(dim_out * env, dim_in);
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) g(i, j) = Complex(normal(rng), normal(rng));
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = CMat(qr.householderQ()).leftCols(dim_in);  // isometry
  std::vector<CMat> kraus;
  for (int e = 0; e < env; ++e) {
    CMat k(dim_out, dim_in);
    for (int b = 0; b < dim_out; ++b) k.row(b) = q.row(b * env + e);
    kraus.push_back(k);
  }
  return kraus;
}

void random_commuting_pair(int dim, std::mt19937_64& rng, CMat* rho, CMat* sigma) {
  CMat u = random_unitary(dim, rng);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  RVec p(dim), w(dim);
  for (int i = 0; i < dim; ++i) p(i) = unif(rng);
  for (int i = 0; i < dim; ++i) w(i) = unif(rng);
  p /= p.sum();
  w /= w.sum();
  *rho = hermitize(u * p.cast<Complex>().asDiagonal() * u.adjoint());
  *sigma = hermitize(u * w.cast<Complex>().asDiagonal() * u.adjoint());
}

void random_state_pair(int dim, std::mt19937_64& rng, CMat* rho, CMat* sigma) {
  *rho = random_density(dim, rng);
  *sigma = random_density(dim, rng);
}

std::vector<CMat> apply_kraus(const std::vector<CMat>& kraus, const std::vector<CMat>& inputs) {
  std::vector<CMat> out;
  for (const CMat& x : inputs) {
    CMat y = CMat::Zero(kraus[0].rows(), kraus[0].rows());
    for (const CMat& k : kraus) y += k * x * k.adjoint();
    out.push_back(hermitize(y));
  }
  return out;
}

}  // namespace mre

#include "mre/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace mre {

QuadratureRule gauss_legendre(int m) {
  if (m < 1 || m > 64) throw InputError("gauss_legendre: m outside [1, 64]");
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence, then map
  // [-1, 1] -> [0, 1].
  RMat jac = RMat::Zero(m, m);
  for (int i = 1; i < m; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i - 1, i) = b;
    jac(i, i - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(jac);
  if (es.info() != Eigen::Success)
    throw NumericalError("gauss_legendre: Jacobi eigensolve failed");
  QuadratureRule rule;
  rule.m = m;
  rule.nodes.resize(m);
  rule.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    rule.nodes(i) = 0.5 * (es.eigenvalues()(i) + 1.0);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights(i) = v0 * v0;  // already normalized to total mass 1 on [0,1]
  }
  return rule;
}

double scalar_r(double z, int m, int k) {
  if (!(z > 0)) throw InputError("scalar_r: z must be positive");
  if (k < 0) throw InputError("scalar_r: k must be nonnegative");
  const QuadratureRule rule = gauss_legendre(m);
  const double x = std::pow(z, std::ldexp(1.0, -k));
  double acc = 0.0;
  for (int j = 0; j < m; ++j)
    acc += rule.weights(j) * (x - 1.0) / (rule.nodes(j) * (x - 1.0) + 1.0);
  return std::ldexp(acc, k);
}

namespace {

double err_at(double z, int m, int k) { return std::abs(scalar_r(z, m, k) - std::log(z)); }

}  // namespace

double scalar_r_grid_error(int m, int k, double a) {
  if (!(a > 1.0)) throw InputError("scalar_r_grid_error: a must exceed 1");
  const int n = 2000;
  const double lo = std::log(1.0 / a), hi = std::log(a);
  double best = 0.0;
  double best_z = 1.0;
  for (int i = 0; i <= n; ++i) {
    const double z = std::exp(lo + (hi - lo) * i / n);
    const double e = err_at(z, m, k);
    if (e > best) {
      best = e;
      best_z = z;
    }
  }
  // Refine around the grid maximizer; |r - ln| is smooth so a local sweep
  // pins the sup well past the tolerances used downstream.
  const double step = (hi - lo) / n;
  const double c = std::log(best_z);
  for (int i = -100; i <= 100; ++i) {
    const double z = std::exp(c + step * i / 100.0);
    if (z < 1.0 / a || z > a) continue;
    best = std::max(best, err_at(z, m, k));
  }
  return best;
}

MkChoice select_mk(double a, double eps) {
  if (!(a > 1.0)) throw InputError("select_mk: a must exceed 1");
  if (!(eps > 0.0)) throw InputError("select_mk: eps must be positive");
  MkChoice best{0, 0, std::numeric_limits<double>::infinity()};
  for (int s = 1; s <= 2 * kMkCap; ++s) {
    for (int k = std::min(s - 1, kMkCap); k >= 0; --k) {  // ties toward larger k
      const int m = s - k;
      if (m < 1 || m > kMkCap) continue;
      const double bound = scalar_r_grid_error(m, k, a);
      if (bound < best.bound) best = {m, k, bound};
      if (bound <= eps) return {m, k, bound};
    }
  }
  throw AccuracyError("select_mk: requested accuracy unreachable within caps; best bound " +
                          std::to_string(best.bound),
                      best.bound);
}

}  // namespace mre

#include "mre/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace mre {

namespace {

double max_abs(const CMat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

}  // namespace

bool is_hermitian(const CMat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, max_abs(a));
  return max_abs(CMat(a - a.adjoint())) <= tol * scale;
}

CMat hermitize(const CMat& a) { return 0.5 * (a + a.adjoint()); }

void require_hermitian(const CMat& a, const std::string& name) {
  if (a.rows() == 0 || a.rows() != a.cols())
    throw InputError(name + ": expected a nonempty square matrix");
  if (!a.allFinite()) throw InputError(name + ": non-finite entries");
  if (!is_hermitian(a)) throw InputError(name + ": not Hermitian");
}

void require_psd(const CMat& a, const std::string& name) {
  require_hermitian(a, name);
  Eigh e = eigh(a);
  const double lmax = std::max(1e-300, e.values(0));
  if (e.values(e.values.size() - 1) < -kPsdTol * std::max(1.0, lmax))
    throw InputError(name + ": not positive semi-definite");
}

void require_density(const CMat& rho, const std::string& name) {
  require_psd(rho, name);
  if (std::abs(rho.trace().real() - 1.0) > 1e-10)
    throw InputError(name + ": trace != 1");
}

Eigh eigh(const CMat& a) {
  require_hermitian(a, "eigh operand");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a));
  if (es.info() != Eigen::Success)
    throw NumericalError("eigh: eigensolver did not converge");
  const int d = static_cast<int>(a.rows());
  Eigh out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();

  // Rebuild a deterministic basis inside each degenerate cluster.
  const double scale = std::max(out.values.cwiseAbs().maxCoeff(), 1e-300);
  int i = 0;
  while (i < d) {
    int j = i + 1;
    while (j < d && out.values(i) - out.values(j) < kDegenerateTol * scale) ++j;
    const int c = j - i;
    if (c > 1) {
      CMat sub = out.vectors.middleCols(i, c);
      CMat proj = sub * sub.adjoint();
      CMat basis(d, c);
      int got = 0;
      for (int e0 = 0; e0 < d && got < c; ++e0) {
        CVec v = proj.col(e0);  // projection of canonical e_{e0}
        for (int g = 0; g < got; ++g) v -= basis.col(g).dot(v) * basis.col(g);
        const double n = v.norm();
        if (n > 1e-6) basis.col(got++) = v / n;
      }
      for (int g0 = 0; got < c && g0 < c; ++g0) {  // pathological fallback
        CVec v = sub.col(g0);
        for (int g = 0; g < got; ++g) v -= basis.col(g).dot(v) * basis.col(g);
        const double n = v.norm();
        if (n > 1e-6) basis.col(got++) = v / n;
      }
      out.vectors.middleCols(i, c) = basis;
    }
    i = j;
  }
  return out;
}

CMat matfunc(const CMat& a, const std::function<double(double)>& f) {
  Eigh e = eigh(a);
  RVec fv(e.values.size());
  for (int i = 0; i < fv.size(); ++i) fv(i) = f(e.values(i));
  return hermitize(e.vectors * fv.asDiagonal() * e.vectors.adjoint());
}

namespace {

// Eigendecomposition with a positive-definiteness gate.
Eigh eigh_pd(const CMat& a, const std::string& name) {
  Eigh e = eigh(a);
  const double lmax = e.values(0);
  if (lmax <= 0 || e.values(e.values.size() - 1) <= kSingularTol * lmax)
    throw DomainError(name + ": operand is singular or not positive definite");
  return e;
}

CMat apply_spectrum(const Eigh& e, const std::function<double(double)>& f) {
  RVec fv(e.values.size());
  for (int i = 0; i < fv.size(); ++i) fv(i) = f(e.values(i));
  return hermitize(e.vectors * fv.asDiagonal() * e.vectors.adjoint());
}

}  // namespace

CMat matpow(const CMat& a, double t) {
  Eigh e = eigh_pd(a, "matpow");
  return apply_spectrum(e, [t](double z) { return std::pow(z, t); });
}

CMat matsqrt(const CMat& a) { return matpow(a, 0.5); }

CMat matlog(const CMat& a) {
  Eigh e = eigh_pd(a, "matlog");
  return apply_spectrum(e, [](double z) { return std::log(z); });
}

CMat pinv_psd(const CMat& a, double floor_rel) {
  Eigh e = eigh(a);
  const double lmax = std::max(e.values(0), 0.0);
  RVec inv(e.values.size());
  for (int i = 0; i < inv.size(); ++i)
    inv(i) = e.values(i) > floor_rel * std::max(lmax, 1e-300) ? 1.0 / e.values(i) : 0.0;
  return hermitize(e.vectors * inv.asDiagonal() * e.vectors.adjoint());
}

CMat geometric_mean(const CMat& x, const CMat& y, double t) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw InputError("geometric_mean: operand dimensions differ");
  if (t < -1.0 - 1e-12 || t > 2.0 + 1e-12)
    throw InputError("geometric_mean: weight outside [-1, 2]");
  Eigh ex = eigh_pd(x, "geometric_mean X");
  CMat xs = apply_spectrum(ex, [](double z) { return std::sqrt(z); });
  CMat xis = apply_spectrum(ex, [](double z) { return 1.0 / std::sqrt(z); });
  CMat mid = hermitize(xis * y * xis);
  Eigh em = eigh_pd(mid, "geometric_mean Y");
  CMat midt = apply_spectrum(em, [t](double z) { return std::pow(z, t); });
  return hermitize(xs * midt * xs);
}

CMat log_perspective(const CMat& x, const CMat& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw InputError("log_perspective: operand dimensions differ");
  Eigh ex = eigh_pd(x, "log_perspective X");
  CMat xs = apply_spectrum(ex, [](double z) { return std::sqrt(z); });
  CMat xis = apply_spectrum(ex, [](double z) { return 1.0 / std::sqrt(z); });
  CMat mid = hermitize(xis * y * xis);
  Eigh em = eigh_pd(mid, "log_perspective Y");
  CMat midl = apply_spectrum(em, [](double z) { return std::log(z); });
  return hermitize(xs * midl * xs);
}

double geomean_t_sensitivity(const CMat& x, const CMat& y, double t) {
  // d/dt G_t = X^{1/2} M^t ln(M) X^{1/2} with M = X^{-1/2} Y X^{-1/2};
  // bound the middle factor over the spectral interval of M.
  Eigh ex = eigh_pd(x, "geomean_t_sensitivity X");
  CMat xis = apply_spectrum(ex, [](double z) { return 1.0 / std::sqrt(z); });
  Eigh em = eigh_pd(hermitize(xis * y * xis), "geomean_t_sensitivity Y");
  double inner = 0.0;
  for (int i = 0; i < em.values.size(); ++i) {
    const double z = em.values(i);
    inner = std::max(inner, std::pow(z, t) * std::abs(std::log(z)));
  }
  return ex.values(0) * inner;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMat partial_trace_second(const CMat& m, int dim_a, int dim_b) {
  if (m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b)
    throw InputError("partial_trace: dimension mismatch");
  CMat out = CMat::Zero(dim_a, dim_a);
  for (int i = 0; i < dim_a; ++i)
    for (int j = 0; j < dim_a; ++j)
      for (int k = 0; k < dim_b; ++k) out(i, j) += m(i * dim_b + k, j * dim_b + k);
  return out;
}

CMat partial_trace_first(const CMat& m, int dim_a, int dim_b) {
  if (m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b)
    throw InputError("partial_trace: dimension mismatch");
  CMat out = CMat::Zero(dim_b, dim_b);
  for (int k = 0; k < dim_b; ++k)
    for (int l = 0; l < dim_b; ++l)
      for (int i = 0; i < dim_a; ++i) out(k, l) += m(i * dim_b + k, i * dim_b + l);
  return out;
}

CMat choi_from_kraus(const std::vector<CMat>& kraus) {
  if (kraus.empty()) throw InputError("choi_from_kraus: empty Kraus list");
  const int db = static_cast<int>(kraus[0].rows());
  const int da = static_cast<int>(kraus[0].cols());
  for (const CMat& k : kraus)
    if (k.rows() != db || k.cols() != da)
      throw InputError("choi_from_kraus: inconsistent Kraus shapes");
  CMat gamma = CMat::Zero(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j) {
      CMat block = CMat::Zero(db, db);
      for (const CMat& k : kraus) block += k.col(i) * k.col(j).adjoint();
      gamma.block(i * db, j * db, db, db) = block;
    }
  return hermitize(gamma);
}

CMat sandwich_choi(const CMat& rho, const CMat& gamma, int dim_b) {
  const int da = static_cast<int>(rho.rows());
  if (gamma.rows() != da * dim_b)
    throw InputError("sandwich_choi: dimension mismatch");
  Eigh e = eigh(rho);
  RVec sq(e.values.size());
  for (int i = 0; i < sq.size(); ++i) sq(i) = std::sqrt(std::max(e.values(i), 0.0));
  CMat rs = hermitize(e.vectors * sq.asDiagonal() * e.vectors.adjoint());
  CMat lift = kron(rs, CMat::Identity(dim_b, dim_b));
  return hermitize(lift * gamma * lift);
}

RMat real_embed(const CMat& a) {
  const int d = static_cast<int>(a.rows());
  RMat out(2 * d, 2 * d);
  out.topLeftCorner(d, d) = a.real();
  out.topRightCorner(d, d) = -a.imag();
  out.bottomLeftCorner(d, d) = a.imag();
  out.bottomRightCorner(d, d) = a.real();
  return out;
}

CMat real_unembed(const RMat& m) {
  const int d = static_cast<int>(m.rows()) / 2;
  RMat re = 0.5 * (m.topLeftCorner(d, d) + m.bottomRightCorner(d, d));
  RMat im = 0.5 * (m.bottomLeftCorner(d, d) - m.topRightCorner(d, d));
  CMat out = re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
  return hermitize(out);
}

CMat support_basis(const CMat& a, double threshold_rel) {
  Eigh e = eigh(a);
  const double lmax = std::max(e.values(0), 0.0);
  int rank = 0;
  while (rank < e.values.size() && e.values(rank) > threshold_rel * std::max(lmax, 1e-300))
    ++rank;
  return e.vectors.leftCols(rank);
}

}  // namespace mre

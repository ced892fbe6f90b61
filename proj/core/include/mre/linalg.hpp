#pragma once

#include <functional>
#include <vector>

#include "mre/types.hpp"

namespace mre {

// Relative thresholds shared across the library.
constexpr double kHermTol = 1e-12;      // conjugate-symmetry defect
constexpr double kPsdTol = 1e-10;       // eigenvalue floor for PSD checks
constexpr double kSingularTol = 1e-12;  // lambda_min/lambda_max treated singular
constexpr double kDegenerateTol = 1e-10;  // eigenvalue cluster gap

bool is_hermitian(const CMat& a, double tol = kHermTol);

/// 0.5 (A + A^dagger); cheap symmetrization after float noise.
CMat hermitize(const CMat& a);

/// Throws InputError unless `a` is square and Hermitian within tolerance.
void require_hermitian(const CMat& a, const std::string& name);

/// Throws InputError unless Hermitian, PSD within kPsdTol and unit trace
/// within 1e-10.
void require_density(const CMat& rho, const std::string& name);

/// Throws InputError unless Hermitian with eigenvalues >= -kPsdTol * lmax.
void require_psd(const CMat& a, const std::string& name);

/// Spectral decomposition of a Hermitian operator.
///
/// Eigenvalues are sorted descending. Within a degenerate cluster
/// (gap < kDegenerateTol * max|lambda|) the eigenbasis is re-derived by
/// orthonormalizing canonical basis vectors against the cluster subspace in
/// index order, so repeated eigenvalues produce a reproducible basis.
struct Eigh {
  RVec values;   // descending
  CMat vectors;  // columns, orthonormal
};

Eigh eigh(const CMat& a);

/// f applied to the spectrum: V f(diag) V^dagger.
CMat matfunc(const CMat& a, const std::function<double(double)>& f);

/// A^t for Hermitian positive definite A.
CMat matpow(const CMat& a, double t);
CMat matsqrt(const CMat& a);
CMat matlog(const CMat& a);

/// Inverse through the spectral decomposition; eigenvalues below
/// floor_rel * lambda_max are treated as zero (pseudo-inverse on the support).
CMat pinv_psd(const CMat& a, double floor_rel = kSingularTol);

/// Weighted operator geometric mean X^{1/2} (X^{-1/2} Y X^{-1/2})^t X^{1/2}.
/// Requires X, Y positive definite and t in [-1, 2].
CMat geometric_mean(const CMat& x, const CMat& y, double t);

/// X^{1/2} log(X^{-1/2} Y X^{-1/2}) X^{1/2} for positive definite X, Y.
CMat log_perspective(const CMat& x, const CMat& y);

/// Upper bound on ||d/dt G_t(X,Y)|| at weight t, used to turn an exponent
/// perturbation |t - t_hat| into a value-error bound.
double geomean_t_sensitivity(const CMat& x, const CMat& y, double t);

CMat kron(const CMat& a, const CMat& b);

/// Trace out the second (dim_b) or first (dim_a) tensor factor of an
/// operator on A (x) B laid out with A-major indexing.
CMat partial_trace_second(const CMat& m, int dim_a, int dim_b);
CMat partial_trace_first(const CMat& m, int dim_a, int dim_b);

/// Choi operator sum_{ij} |i><j| (x) sum_k K_k |i><j| K_k^dagger from Kraus
/// operators of shape d_b x d_a.
CMat choi_from_kraus(const std::vector<CMat>& kraus);

/// (rho^{1/2} (x) I_B) Gamma (rho^{1/2} (x) I_B); rho acts on the first factor.
CMat sandwich_choi(const CMat& rho, const CMat& gamma, int dim_b);

/// Real symmetric embedding [[Re A, -Im A], [Im A, Re A]]. A is PSD iff the
/// embedding is PSD; every eigenvalue appears twice.
RMat real_embed(const CMat& a);

/// Adjoint of real_embed up to normalization: returns the Hermitian H with
/// <real_embed(A), M> = 2 Re <A, H> for all Hermitian A. Used to fold the
/// two copies of a multiplier back into one complex-valued matrix.
CMat real_unembed(const RMat& m);

/// Orthonormal basis (columns) of the thresholded support of a PSD operator.
CMat support_basis(const CMat& a, double threshold_rel = kPsdTol);

}  // namespace mre

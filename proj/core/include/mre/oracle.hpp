#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mre/types.hpp"

namespace mre {

/// Rank-one projective measurement: orthonormal basis columns, one outcome
/// per column.
struct Measurement {
  CMat basis;
  int outcomes() const { return static_cast<int>(basis.cols()); }
  CMat projector(int y) const { return basis.col(y) * basis.col(y).adjoint(); }
  /// max column norm of (sum_y proj_y - I)
  double resolution_defect() const;
};

/// Outcome statistics of one measurement under the pair (rho, sigma): the
/// rho-induced entries form a probability vector, the sigma-induced entries
/// are nonnegative weights.
struct OutcomeDistribution {
  RVec p;  // Tr[proj_y rho]
  RVec w;  // Tr[proj_y sigma]
};

OutcomeDistribution induced(const Measurement& meas, const CMat& rho, const CMat& sigma);

/// (1/(alpha-1)) ln sum_x p^alpha w^(1-alpha); +inf when alpha > 1 and the
/// support rule is violated, or when alpha < 1 and the overlap vanishes.
double classical_renyi(const OutcomeDistribution& d, double alpha);

/// sum_x p ln(p/w) with the 0 ln 0 = 0 convention; +inf on support violation.
double classical_kl(const OutcomeDistribution& d);

/// Divergence selector shared by oracle and verification code: Renyi order
/// alpha, or relative entropy when empty.
using DivergenceTask = std::optional<double>;

double classical_divergence(const OutcomeDistribution& d, const DivergenceTask& task);

struct BruteForceResult {
  double value = 0.0;
  Measurement measurement;
};

/// Random-basis search (Haar samples, `budget` of them) followed by pairwise
/// Givens/phase-rotation sweeps with golden-section on the angle. Any
/// measurement is feasible for the defining supremum, so the result is a
/// certified lower bound on the measured divergence. Deterministic per seed.
BruteForceResult brute_force_measured(const CMat& rho, const CMat& sigma,
                                      const DivergenceTask& task, int budget, uint64_t seed);

struct FuchsCaves {
  CMat observable;      // G_{1/2}(sigma^{-1}, rho)
  double root_fidelity;  // Tr[(sigma^{1/2} rho sigma^{1/2})^{1/2}]
};

FuchsCaves fuchs_caves(const CMat& rho, const CMat& sigma);

/// Evaluates the regime-correct variational objective at each sample; every
/// value bounds the quasi-entropy from the side of its optimization.
std::vector<double> variational_probe(const CMat& rho, const CMat& sigma, double alpha,
                                      const std::vector<CMat>& omega_samples);

// --- Seeded sampling used by property harnesses and tests -----------------

/// Haar unitary via QR of a complex Gaussian with the R-diagonal phase fix.
CMat random_unitary(int dim, std::mt19937_64& rng);
CMat random_density(int dim, std::mt19937_64& rng);          // full-rank w.h.p.
CMat random_pd(int dim, std::mt19937_64& rng, double ridge = 0.1);
/// Kraus operators of a random channel from a Haar isometry into dim*env.
std::vector<CMat> random_channel_kraus(int dim_in, int dim_out, int env, std::mt19937_64& rng);
/// Commuting pair: common random eigenbasis, independent spectra.
void random_commuting_pair(int dim, std::mt19937_64& rng, CMat* rho, CMat* sigma);
/// Full-rank state pair (both density operators).
void random_state_pair(int dim, std::mt19937_64& rng, CMat* rho, CMat* sigma);

std::vector<CMat> apply_kraus(const std::vector<CMat>& kraus, const std::vector<CMat>& inputs);

}  // namespace mre

#pragma once

#include <optional>

#include "mre/measured_states.hpp"

namespace mre {

/// Choi operators of the channel pair, R factor first, with the unnormalized
/// convention Gamma = sum_{ij} |i><j| (x) N(|i><j|).
struct ChannelPair {
  CMat gamma_n;  // trace-preserving map: Tr_B Gamma^N = I_R
  CMat gamma_m;  // completely positive map
  int dim_a = 0;
  int dim_b = 0;

  static ChannelPair from_choi(const CMat& gamma_n, const CMat& gamma_m, int dim_a, int dim_b);
  static ChannelPair from_kraus(const std::vector<CMat>& kraus_n,
                                const std::vector<CMat>& kraus_m);
};

/// Input-side energy bound Tr[H rho] <= E. The pair (H = I, E = 1) is the
/// redundant default and is never added to the model.
struct EnergyConstraint {
  CMat h;
  double e = 1.0;

  static EnergyConstraint unconstrained(int dim_a);
  bool trivial() const;
};

struct ChannelDivergenceResult {
  bool infinite = false;
  bool infinite_suspected = false;
  double value = 0.0;
  double quasi = 0.0;
  CMat rho;         // optimal input state on R ~= A
  CMat omega;       // optimizer on RB (after the rho^{1/2} substitution)
  CMat theta;       // optimizer on RB
  CMat observable;  // recovered (rho^{-1/2} (x) I) Omega (rho^{-1/2} (x) I)
  Measurement measurement;      // on RB
  OutcomeDistribution outcome;  // induced on the sandwiched Choi pair
  double strategy_residual = 0.0;
  bool support_warning = false;  // rho was rank-deficient at extraction
  SolverStats solver;
  AccuracyInfo accuracy;
};

struct ChannelOptions {
  SolverOptions solver;
  std::optional<double> eps;
  std::optional<std::pair<int, int>> mk;
};

/// Measured Renyi channel divergence: joint SDP over the input state rho and
/// the observables (Omega, Theta) on RB, with Theta bound to
/// G_t(rho (x) I, Omega) in the regime-correct direction.
ChannelDivergenceResult channel_measured_renyi(const ChannelPair& pair, const RenyiOrder& order,
                                               const std::optional<EnergyConstraint>& ec = {},
                                               const ChannelOptions& opts = {});

/// Measured relative entropy of channels through the (m,k) log-perspective
/// system at X = rho (x) I.
ChannelDivergenceResult channel_measured_relent(const ChannelPair& pair,
                                                const std::optional<EnergyConstraint>& ec = {},
                                                const ChannelOptions& opts = {});

struct ChannelStrategy {
  CMat rho;
  Measurement measurement;
  double residual = 0.0;  // |classical divergence under the strategy - value|
  bool support_warning = false;
};

/// Recovers the discrimination strategy (input state, output measurement)
/// from a solved result and re-scores it against the sandwiched Choi pair.
ChannelStrategy extract_channel_strategy(const ChannelDivergenceResult& result,
                                         const ChannelPair& pair, const DivergenceTask& task);

}  // namespace mre

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mre/model.hpp"
#include "mre/quadrature.hpp"

namespace mre {

/// Reduced fraction p/q with q >= 1.
struct Rational {
  long long p = 0;
  long long q = 1;

  static Rational of(long long p, long long q);
  /// Parses "p/q" or a bare integer; rejects anything else.
  static Rational parse(const std::string& text);
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
  /// True when q is a power of two; fills the exponent.
  bool dyadic(int* level = nullptr) const;
  Rational operator-() const { return {-p, q}; }
  bool operator==(const Rational& o) const { return p == o.p && q == o.q; }
};

enum class GraphSide { Hypograph, Epigraph };

/// Accounting attached to an emitted geometric-mean graph.
struct ConeCertificate {
  Rational requested;
  Rational used;
  bool dyadic_substituted = false;
  double exponent_gap = 0.0;  // |t - t_hat|
  int lmi_count = 0;          // 2d x 2d blocks emitted
  // Bound on the value perturbation caused by the substitution. Zero when no
  // substitution happened; deferred to the caller when the operands are
  // variables (the caller multiplies exponent_gap by a sensitivity estimate
  // taken from the solved operands).
  double value_error_bound = 0.0;
  bool bound_deferred = false;
};

struct GeomeanGraph {
  std::vector<VarId> aux;
  ConeCertificate certificate;
};

constexpr int kDefaultDyadicLevel = 30;

/// Emits LMI blocks into `model` whose feasibility (over fresh auxiliaries)
/// is equivalent to T <= G_t(X, Y) (hypograph, t in [0,1]) or
/// T >= G_t(X, Y) (epigraph, t in [-1,0] u [1,2]). Exact for dyadic t after
/// reduction; other rationals are replaced by the nearest dyadic of level
/// `dyadic_level` and the substitution is recorded in the certificate.
///
/// Construction: a bisection chain of blocks [[A, W], [W, B]] >= 0 tracks the
/// binary-interval path to the (reduced) exponent; the hypograph side couples
/// the target through a final slack block, while the epigraph side folds the
/// chain through one matrix-inverse block via G_t(X,Y) = G_{1-t}(Y,X) and
/// G_{-s}(A,B) = G_{-1}(A, G_s(A,B)).
GeomeanGraph build_geomean_graph(Model& model, const Rational& t, GraphSide side,
                                 const MatExpr& x, const MatExpr& y, const MatExpr& t_expr,
                                 int dyadic_level = kDefaultDyadicLevel);

struct LogPerspectiveGraph {
  std::vector<VarId> aux;  // Z_0..Z_k, then T_1..T_m
  int block_count = 0;     // k + m
  QuadratureRule rule;
};

/// Emits the LMI system whose feasibility over the auxiliaries is equivalent
/// to T <= P_{r_{m,k}}(X, Y):
///   Z_0 = Y,  sum_j w_j T_j = 2^{-k} T,
///   [[Z_i, Z_{i+1}], [Z_{i+1}, X]] >= 0           for i = 0..k-1,
///   [[Z_k - X - T_j, -sqrt(t_j) T_j],
///    [-sqrt(t_j) T_j,  X - t_j T_j]] >= 0          for j = 1..m.
LogPerspectiveGraph build_log_perspective_graph(Model& model, const MatExpr& x, const MatExpr& y,
                                                const MatExpr& t_expr, int m, int k);

}  // namespace mre

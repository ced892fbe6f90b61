#pragma once

#include "mre/types.hpp"

namespace mre {

/// Gauss-Legendre rule on [0, 1]: integrates polynomials up to degree 2m-1
/// exactly; weights sum to 1, nodes strictly increasing in (0, 1).
struct QuadratureRule {
  int m = 0;
  RVec nodes;
  RVec weights;
};

QuadratureRule gauss_legendre(int m);  // 1 <= m <= 64

/// Rational surrogate of the natural logarithm:
///   r_m(x)   = sum_j w_j (x - 1) / (t_j (x - 1) + 1)
///   r_mk(z)  = 2^k r_m(z^(1/2^k))
/// with (t_j, w_j) from the m-point rule. r_mk(1) == 0 exactly.
double scalar_r(double z, int m, int k);

/// Sup of |r_mk - ln| over [1/a, a], estimated on a geometric grid
/// (>= 2000 points) with local refinement around the grid maximizer.
double scalar_r_grid_error(int m, int k, double a);

struct MkChoice {
  int m = 0;
  int k = 0;
  double bound = 0.0;  // certified grid bound on [1/a, a]
};

/// Smallest (by m + k, ties toward larger k) pair with m, k <= 16 whose grid
/// bound on [1/a, a] meets eps. Throws AccuracyError carrying the best
/// achievable bound when no pair within the caps suffices.
MkChoice select_mk(double a, double eps);

constexpr int kMkCap = 16;
constexpr int kDefaultM = 3;
constexpr int kDefaultK = 3;

}  // namespace mre

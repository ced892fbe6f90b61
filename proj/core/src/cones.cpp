#include "mre/cones.hpp"

#include <cmath>
#include <numeric>

#include "mre/linalg.hpp"

namespace mre {

Rational Rational::of(long long p, long long q) {
  if (q == 0) throw InputError("Rational: zero denominator");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  const long long g = std::gcd(p < 0 ? -p : p, q);
  if (g > 1) {
    p /= g;
    q /= g;
  }
  return {p, q};
}

Rational Rational::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    size_t used = 0;
    if (slash == std::string::npos) {
      long long p = std::stoll(text, &used);
      if (used != text.size()) throw InputError("trailing characters");
      return of(p, 1);
    }
    long long p = std::stoll(text.substr(0, slash), &used);
    if (used != slash) throw InputError("trailing characters");
    long long q = std::stoll(text.substr(slash + 1), &used);
    if (used != text.size() - slash - 1) throw InputError("trailing characters");
    return of(p, q);
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("Rational: cannot parse '" + text + "' as p/q");
  }
}

bool Rational::dyadic(int* level) const {
  long long d = q;
  int l = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++l;
  }
  if (d != 1) return false;
  if (level) *level = l;
  return true;
}

namespace {

// Chain node: current expressions sitting at the endpoints of the bisection
// interval, with exact dyadic endpoint bookkeeping (num / 2^level).
struct ChainResult {
  MatExpr node;
  int blocks = 0;
};

// Emits the bisection chain for W <= G_s(ex, ey) with s = num / 2^level in
// (0, 1), returning the final node. Interval endpoints always keep s inside.
ChainResult emit_chain(Model& model, const MatExpr& ex, const MatExpr& ey, long long num,
                       int level, const std::string& tag, std::vector<VarId>* aux) {
  const int d = ex.dim;
  MatExpr lo = ex, hi = ey;
  long long lo_num = 0, hi_num = 1;  // numerators at scale 2^step
  ChainResult res;
  for (int step = 1; step <= level; ++step) {
    lo_num *= 2;
    hi_num *= 2;
    const long long mid = (lo_num + hi_num) / 2;
    VarId w = model.add_hermitian(d, tag + ".w" + std::to_string(step));
    aux->push_back(w);
    MatExpr we = MatExpr::variable(w, d);
    model.add_lmi(LmiBlock::quad(lo, we, hi, tag + ".chain" + std::to_string(step)));
    ++res.blocks;
    const long long mid_at_level = mid << (level - step);
    if (mid_at_level == num) {
      res.node = we;
      return res;
    }
    if (num < mid_at_level) {
      hi = we;
      hi_num = mid;
    } else {
      lo = we;
      lo_num = mid;
    }
  }
  throw NumericalError("emit_chain: bisection failed to land on a dyadic target");
}

ChainResult chain_for(Model& model, const MatExpr& ex, const MatExpr& ey, long long num,
                      long long den_log2, const std::string& tag, std::vector<VarId>* aux) {
  return emit_chain(model, ex, ey, num, static_cast<int>(den_log2), tag, aux);
}

}  // namespace

GeomeanGraph build_geomean_graph(Model& model, const Rational& t, GraphSide side,
                                 const MatExpr& x, const MatExpr& y, const MatExpr& t_expr,
                                 int dyadic_level) {
  if (x.dim != y.dim || x.dim != t_expr.dim)
    throw InputError("build_geomean_graph: operand dimensions differ");
  model.validate_expr(x);
  model.validate_expr(y);
  model.validate_expr(t_expr);
  const double tv = t.value();
  if (side == GraphSide::Hypograph) {
    if (tv < -1e-12 || tv > 1.0 + 1e-12)
      throw InputError("build_geomean_graph: hypograph requires t in [0, 1]");
  } else {
    if (!(tv >= -1.0 - 1e-12 && tv <= 1e-12) && !(tv >= 1.0 - 1e-12 && tv <= 2.0 + 1e-12))
      throw InputError("build_geomean_graph: epigraph requires t in [-1,0] or [1,2]");
  }

  GeomeanGraph g;
  g.certificate.requested = t;
  g.certificate.used = t;

  int level = 0;
  Rational tt = t;
  if (!t.dyadic(&level)) {
    // Nearest dyadic of the requested level; the induced value error is
    // |t - t_hat| times a sensitivity factor the caller can evaluate.
    const long long scale = 1LL << dyadic_level;
    long long num = std::llround(t.value() * static_cast<double>(scale));
    num = std::max<long long>(std::min<long long>(num, 2 * scale), -scale);
    tt = Rational::of(num, scale);
    tt.dyadic(&level);
    g.certificate.used = tt;
    g.certificate.dyadic_substituted = true;
    g.certificate.exponent_gap = std::abs(t.value() - tt.value());
    const bool const_ops = x.terms.empty() && y.terms.empty();
    if (const_ops) {
      g.certificate.value_error_bound =
          g.certificate.exponent_gap * geomean_t_sensitivity(x.constant, y.constant, t.value());
    } else {
      g.certificate.bound_deferred = true;
    }
  }

  const double tval = tt.value();
  const std::string tag = "gm[" + std::to_string(tt.p) + "/" + std::to_string(tt.q) + "]";

  auto couple_below = [&](const MatExpr& upper) {  // t_expr <= upper
    model.add_lmi(LmiBlock::single(upper - t_expr, tag + ".couple"));
  };

  if (side == GraphSide::Hypograph) {
    if (tt.p == 0) {
      couple_below(x);  // G_0 = X
    } else if (tval == 1.0) {
      couple_below(y);  // G_1 = Y
    } else {
      ChainResult chain = chain_for(model, x, y, tt.p, level, tag, &g.aux);
      g.certificate.lmi_count = chain.blocks;
      couple_below(chain.node);
    }
    return g;
  }

  // Epigraph. Reduce to a hypograph chain through one inverse block:
  //   t in [1,2]:  T >= G_t(X,Y) = G_{1-t}(Y,X)  <=>  exists V <= G_{t-1}(Y,X)
  //                with [[T, Y], [Y, V]] >= 0;
  //   t in [-1,0]: T >= G_t(X,Y)                 <=>  exists V <= G_{-t}(X,Y)
  //                with [[T, X], [X, V]] >= 0.
  if (tt.p == 0) {
    model.add_lmi(LmiBlock::single(t_expr - x, tag + ".couple"));  // G_0 = X
    return g;
  }
  if (tval == 1.0) {
    model.add_lmi(LmiBlock::single(t_expr - y, tag + ".couple"));  // G_1 = Y
    return g;
  }
  const bool upper = tval > 1.0;
  const MatExpr& corner = upper ? y : x;
  Rational s = upper ? Rational::of(tt.p - tt.q, tt.q) : Rational::of(-tt.p, tt.q);
  int slevel = 0;
  s.dyadic(&slevel);
  MatExpr v;
  if (s.value() == 1.0) {
    v = upper ? x : y;  // G_1 of the flipped pair
  } else {
    ChainResult chain = upper ? chain_for(model, y, x, s.p, slevel, tag, &g.aux)
                              : chain_for(model, x, y, s.p, slevel, tag, &g.aux);
    g.certificate.lmi_count = chain.blocks;
    v = chain.node;
  }
  model.add_lmi(LmiBlock::quad(t_expr, corner, v, tag + ".inv"));
  g.certificate.lmi_count += 1;
  return g;
}

LogPerspectiveGraph build_log_perspective_graph(Model& model, const MatExpr& x, const MatExpr& y,
                                                const MatExpr& t_expr, int m, int k) {
  if (x.dim != y.dim || x.dim != t_expr.dim)
    throw InputError("build_log_perspective_graph: operand dimensions differ");
  if (m < 1) throw InputError("build_log_perspective_graph: m must be >= 1");
  if (k < 0) throw InputError("build_log_perspective_graph: k must be >= 0");
  model.validate_expr(x);
  model.validate_expr(y);
  model.validate_expr(t_expr);

  const int d = x.dim;
  LogPerspectiveGraph g;
  g.rule = gauss_legendre(m);

  std::vector<MatExpr> z;
  for (int i = 0; i <= k; ++i) {
    VarId zi = model.add_hermitian(d, "lp.z" + std::to_string(i));
    g.aux.push_back(zi);
    z.push_back(MatExpr::variable(zi, d));
  }
  model.add_mat_eq(z[0] - y, "lp.z0");
  for (int i = 0; i < k; ++i) {
    model.add_lmi(LmiBlock::quad(z[i], z[i + 1], x, "lp.sqrt" + std::to_string(i)));
    ++g.block_count;
  }

  MatExpr weighted;  // sum_j w_j T_j - 2^{-k} T == 0
  weighted.dim = d;
  weighted.constant = CMat::Zero(d, d);
  for (int j = 0; j < m; ++j) {
    VarId tj = model.add_hermitian(d, "lp.t" + std::to_string(j + 1));
    g.aux.push_back(tj);
    MatExpr te = MatExpr::variable(tj, d);
    const double node = g.rule.nodes(j);
    model.add_lmi(LmiBlock::quad(z[k] - x - te, te.scaled(-std::sqrt(node)),
                                 x - te.scaled(node), "lp.node" + std::to_string(j + 1)));
    ++g.block_count;
    weighted = weighted + te.scaled(g.rule.weights(j));
  }
  weighted = weighted - t_expr.scaled(std::ldexp(1.0, -k));
  model.add_mat_eq(weighted, "lp.weights");
  return g;
}

}  // namespace mre

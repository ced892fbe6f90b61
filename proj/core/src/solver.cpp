#include "mre/solver.hpp"
#include <cstdlib>
#include <cstdio>

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "mre/linalg.hpp"

namespace mre {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal-infeasible";
    case SolveStatus::DualInfeasible: return "dual-infeasible";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

using Block = StandardForm::Block;

double inner(const RMat& a, const RMat& b) { return (a.array() * b.array()).sum(); }

RMat symm(const RMat& a) { return 0.5 * (a + a.transpose()); }

// Largest step alpha with X + alpha * dX staying PSD (fraction 1 = boundary).
double max_step_psd(const RMat& x, const RMat& dx) {
  Eigen::LLT<RMat> llt(x);
  RMat l;
  if (llt.info() == Eigen::Success) {
    l = llt.matrixL();
  } else {
    Eigen::SelfAdjointEigenSolver<RMat> es(x);
    RVec ev = es.eigenvalues().cwiseMax(1e-300);
    l = es.eigenvectors() * ev.cwiseSqrt().asDiagonal();
  }
  RMat t = l.triangularView<Eigen::Lower>().solve(dx);
  RMat lt = l.transpose();
  t = lt.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(t);
  Eigen::SelfAdjointEigenSolver<RMat> es(symm(t));
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0) return std::numeric_limits<double>::infinity();
  return 1.0 / (-lmin);
}

double max_step_vec(const RVec& x, const RVec& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.size(); ++i)
    if (dx(i) < 0) a = std::min(a, -x(i) / dx(i));
  return a;
}

// Factor form of the NT scaling: W = G G^T with
//   G = Lx U D^{-1/4},  X = Lx Lx^T,  Lx^T S Lx = U D U^T,
// so that G^{-1} X G^{-T} = G^T S G = D^{1/2} is diagonal by construction.
struct BlockScaling {
  RMat g, gi;  // factor and its inverse
  RVec vlam;   // sqrt of D: eigenvalues of the scaled point V

  RMat w_mult(const RMat& z) const { return g * (g.transpose() * z * g) * g.transpose(); }
};

struct Iterate {
  std::vector<RMat> x, s;
  RVec xn, sn;
  RVec y;
  double tau = 1.0, kappa = 1.0;
};

struct Direction {
  std::vector<RMat> dx, ds;
  RVec dxn, dsn;
  RVec dy;
  double dtau = 0.0, dkappa = 0.0;
  double equation_error = 0.0;  // residual of the Newton equations, post-refinement
};

struct Residuals {
  RVec rp;                 // A(x) - b tau
  std::vector<RMat> rd;    // -A^T(y) + c tau - s, per block
  RVec rdn;                // nonneg part
  double rg = 0.0;         // b^T y - <c,x> - kappa
};

class Hsd {
 public:
  Hsd(const StandardForm& sf, const SolverOptions& opts) : sf_(sf), opts_(opts) {
    m_ = sf.num_constraints();
    nb_ = static_cast<int>(sf.blocks.size());
    nn_ = static_cast<int>(sf.nonneg.size());
    nu_ = nn_;
    for (const Block& b : sf.blocks) nu_ += b.dim;
    norm_b_ = sf.b.norm();
    norm_c_ = 0.0;
    for (const Block& b : sf.blocks) norm_c_ += b.f0.squaredNorm();
    for (const auto& e : sf.nonneg) norm_c_ += e.f0 * e.f0;
    norm_c_ = std::sqrt(norm_c_);
  }

  Solution run();

 private:
  // A(x)_i = -sum_b <Fi_b, X_b> - sum_l fi_l xn_l
  RVec apply_a(const std::vector<RMat>& x, const RVec& xn) const {
    RVec out = RVec::Zero(m_);
    for (int b = 0; b < nb_; ++b)
      for (const auto& t : sf_.blocks[b].terms) out(t.constraint) -= inner(t.mat, x[b]);
    for (int l = 0; l < nn_; ++l)
      for (const auto& [i, w] : sf_.nonneg[l].terms) out(i) -= w * xn(l);
    return out;
  }

  // -A^T(y) per block: + sum_i y_i Fi_b ; nonneg analog.
  RMat apply_at_block(int b, const RVec& y) const {
    RMat out = RMat::Zero(sf_.blocks[b].dim, sf_.blocks[b].dim);
    for (const auto& t : sf_.blocks[b].terms) out += y(t.constraint) * t.mat;
    return out;
  }
  double apply_at_nonneg(int l, const RVec& y) const {
    double out = 0.0;
    for (const auto& [i, w] : sf_.nonneg[l].terms) out += y(i) * w;
    return out;
  }

  double dot_c(const std::vector<RMat>& x, const RVec& xn) const {
    double out = 0.0;
    for (int b = 0; b < nb_; ++b) out += inner(sf_.blocks[b].f0, x[b]);
    for (int l = 0; l < nn_; ++l) out += sf_.nonneg[l].f0 * xn(l);
    return out;
  }

  Residuals residuals(const Iterate& it) const {
    Residuals r;
    r.rp = apply_a(it.x, it.xn) - sf_.b * it.tau;
    r.rd.resize(nb_);
    for (int b = 0; b < nb_; ++b)
      r.rd[b] = apply_at_block(b, it.y) + sf_.blocks[b].f0 * it.tau - it.s[b];
    r.rdn.resize(nn_);
    for (int l = 0; l < nn_; ++l)
      r.rdn(l) = apply_at_nonneg(l, it.y) + sf_.nonneg[l].f0 * it.tau - it.sn(l);
    r.rg = sf_.b.dot(it.y) - dot_c(it.x, it.xn) - it.kappa;
    return r;
  }

  double complementarity(const Iterate& it) const {
    double g = it.tau * it.kappa;
    for (int b = 0; b < nb_; ++b) g += inner(it.x[b], it.s[b]);
    g += it.xn.dot(it.sn);
    return g;
  }

  void compute_scalings(const Iterate& it);
  // Solves the Newton system for generic right-hand sides:
  //   A(dx) - b dtau                = rhs_p
  //   -A^T(dy) + c dtau - ds        = rhs_d
  //   b^T dy - <c,dx> - dkappa      = rhs_g
  //   dx + W ds W                   = rhs_c
  //   kappa dtau + tau dkappa       = rhs_tk
  Direction newton_raw(const Iterate& it, const RVec& rhs_p, const std::vector<RMat>& rhs_d,
                       const RVec& rhs_dn, double rhs_g, const std::vector<RMat>& rhs_c,
                       const RVec& rhs_cn, double rhs_tk) const;
  Direction newton(const Iterate& it, const Residuals& res, double eta, double sigma, double mu,
                   const Direction* affine);
  double max_step(const Iterate& it, const Direction& d) const;

  Solution finalize(const Iterate& it, SolveStatus status, int iters, std::string msg) const;
  bool certificates(const Iterate& it, Solution* out, int iters, double tol_scale = 1.0) const;

  const StandardForm& sf_;
  SolverOptions opts_;
  int m_ = 0, nb_ = 0, nn_ = 0;
  double nu_ = 0.0;
  double norm_b_ = 0.0, norm_c_ = 0.0;

  std::vector<BlockScaling> scal_;
  RVec wn_, vn_;  // nonneg scaling and scaled point
  RMat mmat_;
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> mmat_ld_;
  RVec mscale_;  // Jacobi equilibration of the Schur matrix
  Eigen::LDLT<RMat> schur_;
  bool schur_ok_ = false;
};

void Hsd::compute_scalings(const Iterate& it) {
  scal_.resize(nb_);
  for (int b = 0; b < nb_; ++b) {
    const RMat& x = it.x[b];
    const RMat& s = it.s[b];
    const int dim = sf_.blocks[b].dim;
    RMat lx;
    Eigen::LLT<RMat> llt(x);
    if (llt.info() == Eigen::Success) {
      lx = llt.matrixL();
    } else {
      Eigen::SelfAdjointEigenSolver<RMat> ex(x);
      RVec xev = ex.eigenvalues().cwiseMax(1e-300);
      lx = ex.eigenvectors() * xev.cwiseSqrt().asDiagonal();
    }
    RMat m2 = symm(lx.transpose() * s * lx);
    Eigen::SelfAdjointEigenSolver<RMat> em(m2);
    RVec dev = em.eigenvalues().cwiseMax(1e-300);
    BlockScaling bs;
    RVec dq = dev.array().pow(0.25).matrix();
    bs.g = lx * em.eigenvectors() * dq.cwiseInverse().asDiagonal();
    // gi = D^{1/4} U^T Lx^{-1} via a triangular solve
    RMat ut_lxinv = lx.triangularView<Eigen::Lower>().solve<Eigen::OnTheRight>(
        RMat(em.eigenvectors().transpose()));
    bs.gi = dq.asDiagonal() * ut_lxinv;
    bs.vlam = dev.cwiseSqrt();
    (void)dim;
    scal_[b] = std::move(bs);
  }
  wn_ = (it.xn.array() / it.sn.array()).sqrt().matrix();
  vn_ = (it.xn.array() * it.sn.array()).sqrt().matrix();

  // Schur complement M_ij = sum_b <Fi, W Fj W> + sum_l fi w^2 fj.
  RMat mmat = RMat::Zero(m_, m_);
  for (int b = 0; b < nb_; ++b) {
    const auto& terms = sf_.blocks[b].terms;
    const int na = static_cast<int>(terms.size());
    std::vector<RMat> wfw(na);
    for (int a = 0; a < na; ++a) wfw[a] = scal_[b].w_mult(terms[a].mat);
    for (int a = 0; a < na; ++a)
      for (int a2 = a; a2 < na; ++a2) {
        const double v = inner(terms[a].mat, wfw[a2]);
        mmat(terms[a].constraint, terms[a2].constraint) += v;
        if (terms[a].constraint != terms[a2].constraint)
          mmat(terms[a2].constraint, terms[a].constraint) += v;
      }
  }
  for (int l = 0; l < nn_; ++l) {
    const double w2 = wn_(l) * wn_(l);
    const auto& terms = sf_.nonneg[l].terms;
    for (const auto& [i, wi] : terms)
      for (const auto& [j, wj] : terms) mmat(i, j) += wi * w2 * wj;
  }
  mmat_ = mmat;
  mmat_ld_ = mmat.cast<long double>();
  // Jacobi equilibration: degenerate directions pick up 1/mu-sized rows that
  // would otherwise swamp the factorization.
  mscale_ = mmat.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  RMat scaled = mscale_.asDiagonal() * mmat * mscale_.asDiagonal();
  schur_.compute(scaled);
  schur_ok_ = schur_.info() == Eigen::Success;
  if (!schur_ok_) {
    // Escalating ridge until the factorization goes through; refinement in
    // msolve still targets the unperturbed system.
    for (double ridge = 1e-14; ridge <= 1e-8 && !schur_ok_; ridge *= 100.0) {
      RMat jittered = scaled;
      jittered.diagonal().array() += ridge;
      schur_.compute(jittered);
      schur_ok_ = schur_.info() == Eigen::Success;
    }
  }
}

Direction Hsd::newton_raw(const Iterate& it, const RVec& rhs_p, const std::vector<RMat>& rhs_d,
                          const RVec& rhs_dn, double rhs_g, const std::vector<RMat>& rhs_c,
                          const RVec& rhs_cn, double rhs_tk) const {
  Direction d;
  d.dx.resize(nb_);
  d.ds.resize(nb_);

  // h = rhs_p - A(rhs_c) - A(W rhs_d W); u = A(W c W).
  std::vector<RMat> wrdw(nb_), wcw(nb_);
  for (int b = 0; b < nb_; ++b) {
    wrdw[b] = scal_[b].w_mult(rhs_d[b]);
    wcw[b] = scal_[b].w_mult(sf_.blocks[b].f0);
  }
  RVec wrdwn(nn_), wcwn(nn_);
  for (int l = 0; l < nn_; ++l) {
    wrdwn(l) = wn_(l) * wn_(l) * rhs_dn(l);
    wcwn(l) = wn_(l) * wn_(l) * sf_.nonneg[l].f0;
  }
  RVec h = rhs_p - apply_a(rhs_c, rhs_cn) - apply_a(wrdw, wrdwn);
  RVec u = apply_a(wcw, wcwn);

  // Refinement with extended-precision residuals keeps the solves usable a
  // few orders of magnitude past the double-precision conditioning wall.
  using LdVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  auto equilibrated_solve = [&](const RVec& rhs) {
    return RVec(mscale_.asDiagonal() *
                schur_.solve(RVec(mscale_.asDiagonal() * rhs)));
  };
  auto msolve = [&](const RVec& rhs) {
    RVec sol = equilibrated_solve(rhs);
    LdVec rhs_ld = rhs.cast<long double>();
    for (int pass = 0; pass < 4; ++pass) {
      LdVec resid_ld = rhs_ld - mmat_ld_ * sol.cast<long double>();
      RVec resid = resid_ld.cast<double>();
      if (resid.norm() <= 1e-16 * (1.0 + rhs.norm())) break;
      sol += equilibrated_solve(resid);
    }
    return sol;
  };
  RVec p = msolve(h);
  RVec q = msolve(u + sf_.b);

  double cwc = 0.0, crc = 0.0, cwrdw = 0.0;
  for (int b = 0; b < nb_; ++b) {
    cwc += inner(sf_.blocks[b].f0, wcw[b]);
    crc += inner(sf_.blocks[b].f0, rhs_c[b]);
    cwrdw += inner(sf_.blocks[b].f0, wrdw[b]);
  }
  for (int l = 0; l < nn_; ++l) {
    cwc += sf_.nonneg[l].f0 * wcwn(l);
    crc += sf_.nonneg[l].f0 * rhs_cn(l);
    cwrdw += sf_.nonneg[l].f0 * wrdwn(l);
  }
  // From the third equation after eliminating dx and ds:
  const double g1 = rhs_g + crc + cwrdw;
  const RVec bmu = sf_.b - u;
  const double denom = bmu.dot(q) + cwc + it.kappa / it.tau;
  d.dtau = (g1 + rhs_tk / it.tau - bmu.dot(p)) / denom;
  d.dy = p + d.dtau * q;
  d.dkappa = (rhs_tk - it.kappa * d.dtau) / it.tau;

  for (int b = 0; b < nb_; ++b) {
    RMat dsb = apply_at_block(b, d.dy) + sf_.blocks[b].f0 * d.dtau - rhs_d[b];
    d.ds[b] = symm(dsb);
    d.dx[b] = symm(rhs_c[b] - scal_[b].w_mult(d.ds[b]));
  }
  d.dsn.resize(nn_);
  d.dxn.resize(nn_);
  for (int l = 0; l < nn_; ++l) {
    d.dsn(l) = apply_at_nonneg(l, d.dy) + sf_.nonneg[l].f0 * d.dtau - rhs_dn(l);
    d.dxn(l) = rhs_cn(l) - wn_(l) * wn_(l) * d.dsn(l);
  }
  return d;
}

Direction Hsd::newton(const Iterate& it, const Residuals& res, double eta, double sigma,
                      double mu, const Direction* affine) {
  // Complementarity targets in the scaled frame, where V is diagonal.
  std::vector<RMat> rc(nb_);
  for (int b = 0; b < nb_; ++b) {
    const BlockScaling& bs = scal_[b];
    const int dimb = sf_.blocks[b].dim;
    RMat n = RMat::Zero(dimb, dimb);
    n.diagonal() = -bs.vlam.cwiseProduct(bs.vlam);
    if (sigma > 0) n.diagonal().array() += sigma * mu;
    if (affine) {
      RMat dxa = bs.gi * (*affine).dx[b] * bs.gi.transpose();
      RMat dsa = bs.g.transpose() * (*affine).ds[b] * bs.g;
      n -= symm(dxa * dsa);
    }
    for (int i = 0; i < dimb; ++i)
      for (int j = 0; j < dimb; ++j) n(i, j) *= 2.0 / (bs.vlam(i) + bs.vlam(j));
    rc[b] = symm(bs.g * n * bs.g.transpose());
  }
  RVec rcn(nn_);
  for (int l = 0; l < nn_; ++l) {
    double n = sigma * mu - vn_(l) * vn_(l);
    if (affine) n -= (*affine).dxn(l) * (*affine).dsn(l);
    rcn(l) = wn_(l) * n / vn_(l);
  }
  double rtk = sigma * mu - it.tau * it.kappa;
  if (affine) rtk -= (*affine).dtau * (*affine).dkappa;

  std::vector<RMat> rhs_d(nb_);
  for (int b = 0; b < nb_; ++b) rhs_d[b] = -eta * res.rd[b];
  Direction d = newton_raw(it, -eta * res.rp, rhs_d, -eta * res.rdn, -eta * res.rg, rc, rcn, rtk);

  // Full-system refinement: the reduced solve leaves its error in the primal
  // and gap equations, which matters once mu is tiny. Keep passes only while
  // they shrink that error.
  std::vector<RMat> zero_d(nb_);
  for (int b = 0; b < nb_; ++b) zero_d[b] = RMat::Zero(sf_.blocks[b].dim, sf_.blocks[b].dim);
  auto equation_error = [&](const Direction& dd, RVec* e1, double* e3) {
    *e1 = (-eta * res.rp) - (apply_a(dd.dx, dd.dxn) - sf_.b * dd.dtau);
    *e3 = (-eta * res.rg) - (sf_.b.dot(dd.dy) - dot_c(dd.dx, dd.dxn) - dd.dkappa);
    return e1->norm() + std::abs(*e3);
  };
  RVec e1;
  double e3 = 0.0;
  double err = equation_error(d, &e1, &e3);
  for (int pass = 0; pass < 3 && err > 1e-15; ++pass) {
    Direction corr = newton_raw(it, e1, zero_d, RVec::Zero(nn_), e3, zero_d, RVec::Zero(nn_), 0.0);
    Direction trial = d;
    for (int b = 0; b < nb_; ++b) {
      trial.dx[b] += corr.dx[b];
      trial.ds[b] += corr.ds[b];
    }
    trial.dxn += corr.dxn;
    trial.dsn += corr.dsn;
    trial.dy += corr.dy;
    trial.dtau += corr.dtau;
    trial.dkappa += corr.dkappa;
    RVec e1t;
    double e3t = 0.0;
    const double err_t = equation_error(trial, &e1t, &e3t);
    if (err_t >= err) break;
    d = std::move(trial);
    e1 = std::move(e1t);
    e3 = e3t;
    err = err_t;
  }
  d.equation_error = err;
  return d;
}

double Hsd::max_step(const Iterate& it, const Direction& d) const {
  double a = std::numeric_limits<double>::infinity();
  for (int b = 0; b < nb_; ++b) {
    a = std::min(a, max_step_psd(it.x[b], d.dx[b]));
    a = std::min(a, max_step_psd(it.s[b], d.ds[b]));
  }
  a = std::min(a, max_step_vec(it.xn, d.dxn));
  a = std::min(a, max_step_vec(it.sn, d.dsn));
  if (d.dtau < 0) a = std::min(a, -it.tau / d.dtau);
  if (d.dkappa < 0) a = std::min(a, -it.kappa / d.dkappa);
  return a;
}

bool Hsd::certificates(const Iterate& it, Solution* out, int iters, double tol_scale) const {
  const double tol = std::max(opts_.feas_tol, 1e-9) * tol_scale;
  const double bty = sf_.b.dot(it.y);
  if (bty > 1e-12) {
    double res = 0.0;  // ||-A^T y - s|| with the tau term dropped
    for (int b = 0; b < nb_; ++b) res += (apply_at_block(b, it.y) - it.s[b]).squaredNorm();
    for (int l = 0; l < nn_; ++l) {
      const double r = apply_at_nonneg(l, it.y) - it.sn(l);
      res += r * r;
    }
    res = std::sqrt(res);
    if (res / bty <= tol * (1.0 + norm_c_)) {
      *out = finalize(it, SolveStatus::PrimalInfeasible, iters,
                      "improving ray: model constraints are infeasible");
      return true;
    }
  }
  const double ctx = dot_c(it.x, it.xn);
  if (ctx < -1e-12) {
    const double res = apply_a(it.x, it.xn).norm();
    if (res / (-ctx) <= tol * (1.0 + norm_b_)) {
      *out = finalize(it, SolveStatus::DualInfeasible, iters,
                      "improving ray: model objective is unbounded");
      return true;
    }
  }
  return false;
}

Solution Hsd::finalize(const Iterate& it, SolveStatus status, int iters, std::string msg) const {
  Solution sol;
  sol.status = status;
  sol.iterations = iters;
  sol.message = std::move(msg);
  const bool ray = status == SolveStatus::PrimalInfeasible || status == SolveStatus::DualInfeasible;
  const double tau = ray ? 1.0 : it.tau;
  sol.tau = it.tau;
  sol.kappa = it.kappa;
  sol.y = it.y / tau;
  sol.x_blocks.resize(nb_);
  sol.s_blocks.resize(nb_);
  for (int b = 0; b < nb_; ++b) {
    sol.x_blocks[b] = it.x[b] / tau;
    sol.s_blocks[b] = it.s[b] / tau;
  }
  sol.x_nonneg = it.xn / tau;
  sol.s_nonneg = it.sn / tau;

  Iterate norm = it;
  norm.y /= tau;
  for (auto& xb : norm.x) xb /= tau;
  for (auto& sb : norm.s) sb /= tau;
  norm.xn /= tau;
  norm.sn /= tau;
  norm.tau = 1.0;
  norm.kappa = it.kappa / tau;
  Residuals r = residuals(norm);
  double rd2 = 0.0;
  for (int b = 0; b < nb_; ++b) rd2 += r.rd[b].squaredNorm();
  rd2 += r.rdn.squaredNorm();
  sol.primal_residual = r.rp.norm() / (1.0 + norm_b_);
  sol.dual_residual = std::sqrt(rd2) / (1.0 + norm_c_);
  sol.gap = complementarity(norm) - norm.tau * norm.kappa;
  sol.objective = sf_.b.dot(norm.y);  // b^T y; caller applies sign/offset
  return sol;
}

Solution Hsd::run() {
  Iterate it;
  it.x.resize(nb_);
  it.s.resize(nb_);
  for (int b = 0; b < nb_; ++b) {
    it.x[b] = RMat::Identity(sf_.blocks[b].dim, sf_.blocks[b].dim);
    it.s[b] = RMat::Identity(sf_.blocks[b].dim, sf_.blocks[b].dim);
  }
  it.xn = RVec::Ones(nn_);
  it.sn = RVec::Ones(nn_);
  it.y = RVec::Zero(m_);
  it.tau = 1.0;
  it.kappa = 1.0;

  Solution sol;
  const double mu0 = (complementarity(it)) / (nu_ + 1.0);
  Iterate best = it;
  double best_score = std::numeric_limits<double>::infinity();
  int last_progress = 0;
  double prev_dobj = std::numeric_limits<double>::quiet_NaN();

  for (int iter = 0; iter <= opts_.max_iterations; ++iter) {
    // Convergence check on the tau-normalized candidate; the combined score
    // is <= 1 exactly when every tolerance is met.
    {
      Iterate cand = it;
      cand.y /= it.tau;
      for (auto& xb : cand.x) xb /= it.tau;
      for (auto& sb : cand.s) sb /= it.tau;
      cand.xn /= it.tau;
      cand.sn /= it.tau;
      cand.kappa /= it.tau;
      cand.tau = 1.0;
      Residuals r = residuals(cand);
      double rd2 = 0.0;
      for (int b = 0; b < nb_; ++b) rd2 += r.rd[b].squaredNorm();
      rd2 += r.rdn.squaredNorm();
      const double pres = r.rp.norm() / (1.0 + norm_b_);
      const double dres = std::sqrt(rd2) / (1.0 + norm_c_);
      const double gap = complementarity(cand) - cand.tau * cand.kappa;
      const double pobj = dot_c(cand.x, cand.xn);
      const double dobj = sf_.b.dot(cand.y);
      const double scale = 1.0 + std::abs(pobj) + std::abs(dobj);
      const double score = std::max({pres / opts_.feas_tol, dres / opts_.feas_tol,
                                     gap / (opts_.gap_tol * scale)});
      if (std::getenv("MRE_SOLVER_TRACE"))
        std::fprintf(stderr,
                     "it %3d pres %.2e dres %.2e gap %.2e pobj % .6e dobj % .6e tau %.2e kappa "
                     "%.2e\n",
                     iter, pres, dres, gap, pobj, dobj, it.tau, it.kappa);
      if (!std::isfinite(score))
        return finalize(best, SolveStatus::NumericalFailure, iter,
                        "iterates lost finiteness; best iterate attached");
      if (score <= 1.0) return finalize(it, SolveStatus::Optimal, iter, "converged");
      if (score < best_score) {
        best_score = score;
        best = it;
        last_progress = iter;
      } else if (std::isfinite(prev_dobj) &&
                 std::abs(dobj - prev_dobj) > 1e-6 * (1.0 + std::abs(dobj))) {
        last_progress = iter;  // objective still moving: a long climb, not a stall
      } else if (iter - last_progress >= 8 && it.tau > 1e-6 * std::max(1.0, it.kappa)) {
        return finalize(best, SolveStatus::NumericalFailure, iter,
                        "stalled; best iterate attached");
      }
      prev_dobj = dobj;
    }
    const double mu = complementarity(it) / (nu_ + 1.0);
    if (mu < 1e-17 * mu0 || it.tau < 1e-10 * std::max(1.0, it.kappa)) {
      // The embedding converged to a ray; a collapsed tau rules out a bounded
      // optimum, so accept the ray certificate at reduced accuracy before
      // declaring a breakdown.
      if (certificates(it, &sol, iter)) return sol;
      if (certificates(it, &sol, iter, 1e5)) return sol;
      return finalize(best, SolveStatus::NumericalFailure, iter,
                      "homogeneous model collapsed without a certificate");
    }
    if (iter == opts_.max_iterations) break;
    // Only look for infeasibility rays once tau is visibly collapsing.
    if (it.tau < 1e-2 && it.kappa > it.tau && certificates(it, &sol, iter)) return sol;

    compute_scalings(it);
    if (!schur_ok_)
      return finalize(best, SolveStatus::NumericalFailure, iter, "Schur factorization failed");
    Residuals res = residuals(it);

    Direction aff = newton(it, res, 1.0, 0.0, mu, nullptr);
    const double astep = std::min(1.0, 0.99 * max_step(it, aff));
    double ctc = (it.tau + astep * aff.dtau) * (it.kappa + astep * aff.dkappa);
    for (int b = 0; b < nb_; ++b)
      ctc += inner(it.x[b] + astep * aff.dx[b], it.s[b] + astep * aff.ds[b]);
    ctc += (it.xn + astep * aff.dxn).dot(it.sn + astep * aff.dsn);
    const double mu_aff = std::max(ctc, 0.0) / (nu_ + 1.0);
    double sigma = std::pow(mu_aff / mu, 3.0);
    // The floor keeps late iterates centered; off-center endgame iterates
    // meet the conditioning wall of the Schur system one step too early.
    sigma = std::clamp(sigma, 0.01, 0.8);

    Direction dir = newton(it, res, 1.0 - sigma, sigma, mu, &aff);
    // Walk closer to the boundary once the path has tightened; the endgame
    // steps must land before extreme conditioning degrades the directions.
    const double gamma = mu < 1e-7 * mu0 ? std::max(opts_.step_fraction, 0.999)
                                         : opts_.step_fraction;
    double alpha = std::min(1.0, gamma * max_step(it, dir));
    if (!std::isfinite(alpha) || alpha <= 1e-14)
      return finalize(best, SolveStatus::NumericalFailure, iter, "step length collapsed");
    // The second-order term can misfire near a degenerate optimum; fall back
    // to the plain centering direction when it shortens the step badly.
    if (alpha < 0.5 * astep) {
      Direction plain = newton(it, res, 1.0 - sigma, sigma, mu, nullptr);
      const double alpha_plain = std::min(1.0, opts_.step_fraction * max_step(it, plain));
      if (alpha_plain > alpha) {
        dir = std::move(plain);
        alpha = alpha_plain;
      }
    }

    // In exact arithmetic a step of length a shrinks the linear residuals by
    // the factor 1 - a(1-sigma); a large excess flags a corrupted direction,
    // in which case the step is shortened.
    double rd2 = 0.0;
    for (int b = 0; b < nb_; ++b) rd2 += res.rd[b].squaredNorm();
    rd2 += res.rdn.squaredNorm();
    const double old_p = res.rp.norm(), old_d = std::sqrt(rd2), old_g = std::abs(res.rg);
    bool accepted = false;
    for (int tries = 0; tries < 5 && !accepted; ++tries, alpha *= 0.5) {
      Iterate cand = it;
      for (int b = 0; b < nb_; ++b) {
        cand.x[b] = symm(it.x[b] + alpha * dir.dx[b]);
        cand.s[b] = symm(it.s[b] + alpha * dir.ds[b]);
      }
      cand.xn = it.xn + alpha * dir.dxn;
      cand.sn = it.sn + alpha * dir.dsn;
      cand.y = it.y + alpha * dir.dy;
      cand.tau = it.tau + alpha * dir.dtau;
      cand.kappa = it.kappa + alpha * dir.dkappa;
      Residuals rnew = residuals(cand);
      double nd2 = 0.0;
      for (int b = 0; b < nb_; ++b) nd2 += rnew.rd[b].squaredNorm();
      nd2 += rnew.rdn.squaredNorm();
      const double f = 1.0 - alpha * (1.0 - sigma);
      double iterate_scale = cand.xn.norm() + cand.sn.norm() + cand.y.norm() + cand.tau +
                             cand.kappa;
      for (int b = 0; b < nb_; ++b) iterate_scale += cand.x[b].norm() + cand.s[b].norm();
      const double noise =
          1e-14 * (1.0 + iterate_scale) * (1.0 + std::max(norm_b_, norm_c_));
      // Tolerate the direction's equation error, but never let one step grow
      // a residual past a few times its size (plus a floor well under the
      // feasibility target): that combination admits honest roundoff floors
      // while stopping runaway corruption.
      const double slack = 2.0 * alpha * dir.equation_error + noise;
      const double floor_abs =
          0.3 * opts_.feas_tol * (1.0 + std::max(norm_b_, norm_c_)) + noise;
      auto admissible = [&](double now, double before) {
        return now <= before * (f + 0.2) + slack && now <= 3.0 * before + floor_abs;
      };
      if (admissible(rnew.rp.norm(), old_p) && admissible(std::sqrt(nd2), old_d) &&
          admissible(std::abs(rnew.rg), old_g) && cand.tau > 0 && cand.kappa > 0) {
        it = std::move(cand);
        accepted = true;
      }
    }
    if (!accepted)
      return finalize(best, SolveStatus::NumericalFailure, iter,
                      "direction rejected by residual safeguard; best iterate attached");

    // The embedding is positively homogeneous; renormalizing tau + kappa
    // keeps the iterate magnitudes O(1) even when strict complementarity
    // fails and both variables drift toward zero together.
    const double c = 2.0 / (it.tau + it.kappa);
    if (std::isfinite(c) && c > 0) {
      for (int b = 0; b < nb_; ++b) {
        it.x[b] *= c;
        it.s[b] *= c;
      }
      it.xn *= c;
      it.sn *= c;
      it.y *= c;
      it.tau *= c;
      it.kappa *= c;
    }
  }
  return finalize(best, SolveStatus::NumericalFailure, opts_.max_iterations,
                  "iteration cap reached; best iterate attached");
}

}  // namespace

KktCheck check_kkt(const StandardForm& sf, const Solution& sol) {
  KktCheck out;
  const int m = sf.num_constraints();
  RVec ax = RVec::Zero(m);
  double ctx = 0.0, gap = 0.0;
  double normb = sf.b.norm(), normc = 0.0;
  for (size_t b = 0; b < sf.blocks.size(); ++b) {
    for (const auto& t : sf.blocks[b].terms)
      ax(t.constraint) -= inner(t.mat, sol.x_blocks[b]);
    ctx += inner(sf.blocks[b].f0, sol.x_blocks[b]);
    gap += inner(sol.x_blocks[b], sol.s_blocks[b]);
    normc += sf.blocks[b].f0.squaredNorm();
  }
  for (size_t l = 0; l < sf.nonneg.size(); ++l) {
    for (const auto& [i, w] : sf.nonneg[l].terms) ax(i) -= w * sol.x_nonneg(l);
    ctx += sf.nonneg[l].f0 * sol.x_nonneg(l);
    gap += sol.x_nonneg(l) * sol.s_nonneg(l);
    normc += sf.nonneg[l].f0 * sf.nonneg[l].f0;
  }
  normc = std::sqrt(normc);
  out.primal_residual = (ax - sf.b).norm() / (1.0 + normb);
  double rd2 = 0.0;
  for (size_t b = 0; b < sf.blocks.size(); ++b) {
    RMat rd = sf.blocks[b].f0 - sol.s_blocks[b];
    for (const auto& t : sf.blocks[b].terms) rd += sol.y(t.constraint) * t.mat;
    rd2 += rd.squaredNorm();
  }
  for (size_t l = 0; l < sf.nonneg.size(); ++l) {
    double rd = sf.nonneg[l].f0 - sol.s_nonneg(l);
    for (const auto& [i, w] : sf.nonneg[l].terms) rd += sol.y(i) * w;
    rd2 += rd * rd;
  }
  out.dual_residual = std::sqrt(rd2) / (1.0 + normc);
  out.gap = gap;
  out.objective_mismatch = std::abs(sf.b.dot(sol.y) - ctx);
  return out;
}

Solution InteriorPointSolver::solve(const StandardForm& sf, const SolverOptions& opts) const {
  // Statuses here follow the conic pair: the compiled model sits on the dual
  // side, so the model-level wrapper swaps the two infeasibility labels.
  if (sf.equality_infeasible) {
    Solution sol;
    sol.status = SolveStatus::DualInfeasible;
    sol.message = "equality constraints are inconsistent";
    return sol;
  }
  if (sf.unbounded_free_direction) {
    Solution sol;
    sol.status = SolveStatus::PrimalInfeasible;
    sol.message = "objective direction unconstrained by any cone";
    return sol;
  }
  if (sf.num_constraints() == 0) {
    Solution sol;
    bool ok = true;
    for (const auto& b : sf.blocks) {
      Eigen::SelfAdjointEigenSolver<RMat> es(b.f0);
      if (es.eigenvalues().minCoeff() < -1e-10) ok = false;
    }
    for (const auto& e : sf.nonneg)
      if (e.f0 < -1e-12) ok = false;
    sol.status = ok ? SolveStatus::Optimal : SolveStatus::DualInfeasible;
    sol.objective = 0.0;
    return sol;
  }
  Hsd hsd(sf, opts);
  return hsd.run();
}

Solution solve(const Model& model, const StandardForm& sf, const SolverOptions& opts) {
  InteriorPointSolver backend;
  Solution sol = backend.solve(sf, opts);
  // The model compiles onto the conic dual, so infeasibility labels flip:
  // an unbounded conic dual certifies infeasible model constraints.
  if (sol.status == SolveStatus::PrimalInfeasible) {
    sol.status = SolveStatus::DualInfeasible;
    sol.message = "model objective is unbounded";
  } else if (sol.status == SolveStatus::DualInfeasible) {
    sol.status = SolveStatus::PrimalInfeasible;
    if (sol.message.empty() || sol.message.rfind("improving ray", 0) == 0)
      sol.message = "model constraints are infeasible";
  }
  if (sol.status == SolveStatus::Optimal || sol.status == SolveStatus::NumericalFailure) {
    if (sol.y.size() == sf.num_constraints() && sf.num_constraints() >= 0) {
      sol.objective = sf.obj_sign * (sf.b.dot(sol.y) + sf.obj_offset);
      sol.var_values = sf.recover_variables(model, sol.y);
      const KktCheck kkt = check_kkt(sf, sol);
      sol.kkt = {kkt.primal_residual, kkt.dual_residual, kkt.gap, kkt.objective_mismatch};
      sol.lmi_duals.clear();
      for (size_t i = 0; i < sf.lmi_block_of.size(); ++i) {
        const int b = sf.lmi_block_of[i];
        sol.lmi_duals.push_back(b >= 0 ? real_unembed(sol.x_blocks[b]) : CMat());
      }
      sol.ineq_duals.clear();
      for (int e : sf.ineq_entry_of) sol.ineq_duals.push_back(e >= 0 ? sol.x_nonneg(e) : 0.0);
    }
  }
  return sol;
}

Solution solve(const Model& model, const SolverOptions& opts) {
  return solve(model, compile(model), opts);
}

}  // namespace mre

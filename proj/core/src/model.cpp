#include "mre/model.hpp"

#include "mre/linalg.hpp"

namespace mre {

MatExpr MatExpr::constant_of(const CMat& c) {
  MatExpr e;
  e.dim = static_cast<int>(c.rows());
  e.constant = c;
  return e;
}

MatExpr MatExpr::variable(VarId v, int dim) {
  MatExpr e;
  e.dim = dim;
  e.constant = CMat::Zero(dim, dim);
  e.terms.push_back({v, 1.0, 0});
  return e;
}

MatExpr MatExpr::lifted(VarId v, int var_dim, int lift_dim) {
  MatExpr e;
  e.dim = var_dim * lift_dim;
  e.constant = CMat::Zero(e.dim, e.dim);
  e.terms.push_back({v, 1.0, lift_dim});
  return e;
}

MatExpr MatExpr::conjugated_lifted(VarId v, const CMat& k, int lift_dim) {
  MatExpr e;
  const int rows = static_cast<int>(k.rows());
  e.dim = lift_dim > 0 ? rows * lift_dim : rows;
  e.constant = CMat::Zero(e.dim, e.dim);
  LinTerm t{v, 1.0, lift_dim, k};
  e.terms.push_back(std::move(t));
  return e;
}

MatExpr& MatExpr::add_term(VarId v, double coeff, int lift_dim) {
  terms.push_back({v, coeff, lift_dim});
  return *this;
}

MatExpr MatExpr::operator+(const MatExpr& other) const {
  if (dim != other.dim) throw InputError("MatExpr: dimension mismatch in +");
  MatExpr out = *this;
  out.constant += other.constant;
  out.terms.insert(out.terms.end(), other.terms.begin(), other.terms.end());
  return out;
}

MatExpr MatExpr::operator-(const MatExpr& other) const {
  return *this + other.scaled(-1.0);
}

MatExpr MatExpr::scaled(double s) const {
  MatExpr out = *this;
  out.constant *= s;
  for (LinTerm& t : out.terms) t.coeff *= s;
  return out;
}

ScalarExpr& ScalarExpr::add(VarId v, const CMat& coeff) {
  terms.push_back({v, coeff});
  return *this;
}

ScalarExpr& ScalarExpr::add_scalar(VarId v, double coeff) {
  CMat c(1, 1);
  c(0, 0) = coeff;
  terms.push_back({v, c});
  return *this;
}

LmiBlock LmiBlock::single(MatExpr a, std::string tag) {
  LmiBlock b;
  b.a = std::move(a);
  b.two_by_two = false;
  b.tag = std::move(tag);
  return b;
}

LmiBlock LmiBlock::quad(MatExpr a, MatExpr b2, MatExpr c, std::string tag) {
  if (a.dim != b2.dim || a.dim != c.dim)
    throw InputError("LmiBlock: sub-expression dimensions differ");
  LmiBlock b;
  b.a = std::move(a);
  b.b = std::move(b2);
  b.c = std::move(c);
  b.two_by_two = true;
  b.tag = std::move(tag);
  return b;
}

VarId Model::add_hermitian(int dim, std::string name) {
  if (dim < 1) throw InputError("add_hermitian: dim must be positive");
  vars_.push_back({VarKind::HermitianFree, dim, std::move(name)});
  return static_cast<VarId>(vars_.size()) - 1;
}

VarId Model::add_psd(int dim, std::string name) {
  if (dim < 1) throw InputError("add_psd: dim must be positive");
  vars_.push_back({VarKind::HermitianPsd, dim, std::move(name)});
  return static_cast<VarId>(vars_.size()) - 1;
}

VarId Model::add_nonneg_scalar(std::string name) {
  vars_.push_back({VarKind::NonnegScalar, 1, std::move(name)});
  return static_cast<VarId>(vars_.size()) - 1;
}

const VarInfo& Model::var(VarId v) const {
  if (v < 0 || v >= static_cast<VarId>(vars_.size()))
    throw InputError("unknown variable handle");
  return vars_[v];
}

void Model::validate_expr(const MatExpr& e) const {
  if (e.constant.rows() != e.dim || e.constant.cols() != e.dim)
    throw InputError("MatExpr: constant shape differs from declared dim");
  for (const LinTerm& t : e.terms) {
    const VarInfo& vi = var(t.var);
    int base = vi.dim;
    if (t.conj.size() > 0) {
      if (t.conj.cols() != vi.dim) throw InputError("MatExpr: conjugation shape mismatch");
      base = static_cast<int>(t.conj.rows());
    }
    const int lifted = t.lift_dim > 0 ? base * t.lift_dim : base;
    if (lifted != e.dim) throw InputError("MatExpr: term dimension mismatch");
    if (!std::isfinite(t.coeff)) throw InputError("MatExpr: non-finite coefficient");
  }
}

void Model::validate_expr(const ScalarExpr& e) const {
  if (!std::isfinite(e.constant)) throw InputError("ScalarExpr: non-finite constant");
  for (const ScalarExpr::Term& t : e.terms) {
    const VarInfo& vi = var(t.var);
    if (t.coeff.rows() != vi.dim || t.coeff.cols() != vi.dim)
      throw InputError("ScalarExpr: coefficient shape mismatch");
    if (!t.coeff.allFinite()) throw InputError("ScalarExpr: non-finite coefficient");
  }
}

void Model::add_lmi(LmiBlock block) {
  validate_expr(block.a);
  if (block.two_by_two) {
    validate_expr(block.b);
    validate_expr(block.c);
  }
  lmis_.push_back(std::move(block));
}

void Model::add_mat_eq(MatExpr expr, std::string tag) {
  validate_expr(expr);
  mat_eqs_.push_back({std::move(expr), std::move(tag)});
}

void Model::add_scalar_eq(ScalarExpr expr, std::string tag) {
  validate_expr(expr);
  scalar_eqs_.push_back({std::move(expr), std::move(tag)});
}

void Model::add_scalar_ineq(ScalarExpr expr, std::string tag) {
  validate_expr(expr);
  scalar_ineqs_.push_back({std::move(expr), std::move(tag)});
}

void Model::set_objective(Sense sense, ScalarExpr objective) {
  validate_expr(objective);
  sense_ = sense;
  objective_ = std::move(objective);
}

CMat Model::eval(const MatExpr& e, const std::vector<CMat>& assignment) const {
  CMat out = e.constant;
  for (const LinTerm& t : e.terms) {
    CMat v = assignment.at(t.var);
    if (t.conj.size() > 0) v = t.conj * v * t.conj.adjoint();
    if (t.lift_dim > 0)
      out += t.coeff * kron(v, CMat::Identity(t.lift_dim, t.lift_dim));
    else
      out += t.coeff * v;
  }
  return out;
}

double Model::eval(const ScalarExpr& e, const std::vector<CMat>& assignment) const {
  double out = e.constant;
  for (const ScalarExpr::Term& t : e.terms)
    out += (t.coeff.adjoint() * assignment.at(t.var)).trace().real();
  return out;
}

}  // namespace mre

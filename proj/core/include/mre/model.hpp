#pragma once

#include <string>
#include <vector>

#include "mre/types.hpp"

namespace mre {

using VarId = int;

enum class VarKind { HermitianFree, HermitianPsd, NonnegScalar };

struct VarInfo {
  VarKind kind;
  int dim;  // matrix side; 1 for scalars
  std::string name;
};

/// One linear term of a matrix expression: coeff * lift(K var K^dagger),
/// where the conjugation K is optional and lift is either the identity or
/// (.) (x) I_{lift_dim}.
struct LinTerm {
  VarId var;
  double coeff = 1.0;
  int lift_dim = 0;  // 0: no lift
  CMat conj;         // empty: no conjugation
};

/// Affine Hermitian-matrix-valued expression: constant + sum of terms.
struct MatExpr {
  int dim = 0;
  CMat constant;  // dim x dim; may be zero
  std::vector<LinTerm> terms;

  static MatExpr constant_of(const CMat& c);
  static MatExpr variable(VarId v, int dim);
  /// var (x) I_{lift_dim}
  static MatExpr lifted(VarId v, int var_dim, int lift_dim);
  /// (K var K^dagger) (x) I_{lift_dim}; K may be rectangular.
  static MatExpr conjugated_lifted(VarId v, const CMat& k, int lift_dim);

  MatExpr& add_term(VarId v, double coeff, int lift_dim = 0);
  MatExpr operator+(const MatExpr& other) const;
  MatExpr operator-(const MatExpr& other) const;
  MatExpr scaled(double s) const;
};

/// Affine real functional: constant + sum_v Re <coeff_v, var_v>, with the
/// Hilbert-Schmidt pairing <A, B> = Tr[A^dagger B].
struct ScalarExpr {
  double constant = 0.0;
  struct Term {
    VarId var;
    CMat coeff;  // Hermitian, dim of var
  };
  std::vector<Term> terms;

  ScalarExpr& add(VarId v, const CMat& coeff);
  ScalarExpr& add_scalar(VarId v, double coeff);
};

/// A positive semi-definiteness constraint: either a single affine block
/// a >= 0 or the 2x2 arrangement [[a, b], [b^dagger, c]] >= 0.
struct LmiBlock {
  MatExpr a, b, c;
  bool two_by_two = false;
  std::string tag;

  static LmiBlock single(MatExpr a, std::string tag = {});
  static LmiBlock quad(MatExpr a, MatExpr b, MatExpr c, std::string tag = {});
  int assembled_dim() const { return two_by_two ? 2 * a.dim : a.dim; }
};

enum class Sense { Minimize, Maximize };

/// Declarative SDP over Hermitian matrix variables: linear objective, LMI
/// blocks, affine matrix equalities and scalar equalities/inequalities.
class Model {
 public:
  VarId add_hermitian(int dim, std::string name);
  VarId add_psd(int dim, std::string name);
  VarId add_nonneg_scalar(std::string name);

  void add_lmi(LmiBlock block);
  /// expr == 0 entrywise (expr must be Hermitian-valued).
  void add_mat_eq(MatExpr expr, std::string tag = {});
  void add_scalar_eq(ScalarExpr expr, std::string tag = {});   // expr == 0
  void add_scalar_ineq(ScalarExpr expr, std::string tag = {});  // expr >= 0
  void set_objective(Sense sense, ScalarExpr objective);

  const std::vector<VarInfo>& variables() const { return vars_; }
  const VarInfo& var(VarId v) const;
  int var_dim(VarId v) const { return var(v).dim; }

  const std::vector<LmiBlock>& lmis() const { return lmis_; }
  struct TaggedMatEq {
    MatExpr expr;
    std::string tag;
  };
  struct TaggedScalar {
    ScalarExpr expr;
    std::string tag;
  };
  const std::vector<TaggedMatEq>& mat_eqs() const { return mat_eqs_; }
  const std::vector<TaggedScalar>& scalar_eqs() const { return scalar_eqs_; }
  const std::vector<TaggedScalar>& scalar_ineqs() const { return scalar_ineqs_; }
  Sense sense() const { return sense_; }
  const ScalarExpr& objective() const { return objective_; }

  /// Value of a matrix expression under an assignment of all variables.
  CMat eval(const MatExpr& e, const std::vector<CMat>& assignment) const;
  double eval(const ScalarExpr& e, const std::vector<CMat>& assignment) const;

  void validate_expr(const MatExpr& e) const;
  void validate_expr(const ScalarExpr& e) const;

 private:
  std::vector<VarInfo> vars_;
  std::vector<LmiBlock> lmis_;
  std::vector<TaggedMatEq> mat_eqs_;
  std::vector<TaggedScalar> scalar_eqs_;
  std::vector<TaggedScalar> scalar_ineqs_;
  Sense sense_ = Sense::Minimize;
  ScalarExpr objective_;
};

}  // namespace mre

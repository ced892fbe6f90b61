#include "mre/compile.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mre/linalg.hpp"

namespace mre {

int herm_coord_count(int dim) { return dim * dim; }

CMat herm_basis_element(int dim, int index) {
  CMat b = CMat::Zero(dim, dim);
  if (index < dim) {
    b(index, index) = 1.0;
    return b;
  }
  int rest = index - dim;
  // Upper-triangle pairs in row-major order, re before im.
  int pair = rest / 2;
  for (int i = 0; i < dim; ++i) {
    const int row_len = dim - i - 1;
    if (pair < row_len) {
      const int j = i + 1 + pair;
      const double s = 1.0 / std::sqrt(2.0);
      if (rest % 2 == 0) {
        b(i, j) = s;
        b(j, i) = s;
      } else {
        b(i, j) = Complex(0, s);
        b(j, i) = Complex(0, -s);
      }
      return b;
    }
    pair -= row_len;
  }
  throw InputError("herm_basis_element: index out of range");
}

RVec herm_coordinates(const CMat& h) {
  const int d = static_cast<int>(h.rows());
  RVec out(d * d);
  int idx = 0;
  for (int i = 0; i < d; ++i) out(idx++) = h(i, i).real();
  const double s = std::sqrt(2.0);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      out(idx++) = s * h(i, j).real();
      out(idx++) = s * h(i, j).imag();
    }
  return out;
}

CMat herm_from_coordinates(int dim, const RVec& coords) {
  CMat out = CMat::Zero(dim, dim);
  int idx = 0;
  for (int i = 0; i < dim; ++i) out(i, i) = coords(idx++);
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      const double re = coords(idx++) * s;
      const double im = coords(idx++) * s;
      out(i, j) = Complex(re, im);
      out(j, i) = Complex(re, -im);
    }
  return out;
}

namespace {

CMat lift_if_needed(const CMat& m, int lift_dim) {
  if (lift_dim <= 0) return m;
  return kron(m, CMat::Identity(lift_dim, lift_dim));
}

// Derivative of a matrix expression with respect to one real coordinate of
// one variable.
CMat expr_derivative(const MatExpr& e, VarId v, const CMat& basis_elem) {
  CMat d = CMat::Zero(e.dim, e.dim);
  for (const LinTerm& t : e.terms) {
    if (t.var != v) continue;
    if (t.conj.size() > 0) {
      d += t.coeff * lift_if_needed(CMat(t.conj * basis_elem * t.conj.adjoint()), t.lift_dim);
    } else {
      d += t.coeff * lift_if_needed(basis_elem, t.lift_dim);
    }
  }
  return d;
}

std::set<VarId> expr_vars(const MatExpr& e) {
  std::set<VarId> vs;
  for (const LinTerm& t : e.terms) vs.insert(t.var);
  return vs;
}

struct CoordLayout {
  std::vector<int> offset;
  std::vector<int> count;
  int total = 0;
};

CoordLayout layout_of(const Model& model) {
  CoordLayout lay;
  for (const VarInfo& vi : model.variables()) {
    lay.offset.push_back(lay.total);
    const int n = vi.kind == VarKind::NonnegScalar ? 1 : herm_coord_count(vi.dim);
    lay.count.push_back(n);
    lay.total += n;
  }
  return lay;
}

// Dense objective vector over the full coordinate chart.
void objective_vector(const Model& model, const CoordLayout& lay, RVec& g, double& g0) {
  g = RVec::Zero(lay.total);
  const ScalarExpr& obj = model.objective();
  g0 = obj.constant;
  for (const ScalarExpr::Term& t : obj.terms) {
    const VarInfo& vi = model.var(t.var);
    if (vi.kind == VarKind::NonnegScalar) {
      g(lay.offset[t.var]) += t.coeff(0, 0).real();
    } else {
      RVec coords = herm_coordinates(hermitize(t.coeff));
      g.segment(lay.offset[t.var], lay.count[t.var]) += coords;
    }
  }
}

}  // namespace

std::vector<CMat> StandardForm::recover_variables(const Model& model, const RVec& y) const {
  std::vector<CMat> out;
  const int nvars = static_cast<int>(model.variables().size());
  const int kcount = static_cast<int>(b.size()) - kernel_start;
  RVec ykernel = kcount > 0 ? RVec(y.segment(kernel_start, kcount)) : RVec();
  for (int v = 0; v < nvars; ++v) {
    const VarInfo& vi = model.var(v);
    RVec coords = RVec::Zero(var_coords[v]);
    for (int c = 0; c < var_coords[v]; ++c) {
      const int full = var_offset[v] + c;
      if (map_kind[full] == 0) {
        coords(c) = y(map_index[full]);
      } else if (map_kind[full] == 1) {
        const int row = map_index[full];
        coords(c) = z0(row);
        if (kcount > 0) coords(c) += nullbasis.row(row).dot(ykernel);
      }
    }
    if (vi.kind == VarKind::NonnegScalar) {
      CMat m(1, 1);
      m(0, 0) = coords(0);
      out.push_back(m);
    } else {
      out.push_back(herm_from_coordinates(vi.dim, coords));
    }
  }
  return out;
}

StandardForm compile(const Model& model) {
  const CoordLayout lay = layout_of(model);
  StandardForm sf;
  sf.var_offset = lay.offset;
  sf.var_coords = lay.count;

  RVec g;
  double g0 = 0.0;
  objective_vector(model, lay, g, g0);
  sf.obj_sign = model.sense() == Sense::Maximize ? 1.0 : -1.0;
  g *= sf.obj_sign;
  g0 *= sf.obj_sign;

  // --- Equality system over the coupled coordinates -----------------------
  struct EqRow {
    std::map<int, double> coeff;  // full coordinate -> coefficient
    double rhs = 0.0;
  };
  std::vector<EqRow> eq_rows;
  for (const Model::TaggedMatEq& me : model.mat_eqs()) {
    if (!is_hermitian(me.expr.constant))
      throw InputError("matrix equality: constant part not Hermitian");
    const int ed = me.expr.dim;
    const int ncoords = herm_coord_count(ed);
    std::vector<EqRow> rows(ncoords);
    RVec rhs = herm_coordinates(me.expr.constant);
    for (int r = 0; r < ncoords; ++r) rows[r].rhs = -rhs(r);
    for (VarId v : expr_vars(me.expr)) {
      if (model.var(v).kind == VarKind::NonnegScalar)
        throw InputError("matrix equality over scalar variables is unsupported");
      for (int c = 0; c < lay.count[v]; ++c) {
        CMat d = expr_derivative(me.expr, v, herm_basis_element(model.var(v).dim, c));
        if (d.cwiseAbs().maxCoeff() == 0.0) continue;
        RVec col = herm_coordinates(d);
        for (int r = 0; r < ncoords; ++r)
          if (col(r) != 0.0) rows[r].coeff[lay.offset[v] + c] += col(r);
      }
    }
    for (EqRow& r : rows) eq_rows.push_back(std::move(r));
  }
  for (const Model::TaggedScalar& se : model.scalar_eqs()) {
    EqRow row;
    row.rhs = -se.expr.constant;
    for (const ScalarExpr::Term& t : se.expr.terms) {
      const VarInfo& vi = model.var(t.var);
      if (vi.kind == VarKind::NonnegScalar) {
        row.coeff[lay.offset[t.var]] += t.coeff(0, 0).real();
      } else {
        RVec coords = herm_coordinates(hermitize(t.coeff));
        for (int c = 0; c < coords.size(); ++c)
          if (coords(c) != 0.0) row.coeff[lay.offset[t.var] + c] += coords(c);
      }
    }
    eq_rows.push_back(std::move(row));
  }

  // Coordinates coupled by equalities get a nullspace parametrization; the
  // rest map one-to-one onto solver constraints.
  std::set<int> coupled_set;
  for (const EqRow& r : eq_rows)
    for (const auto& [c, v] : r.coeff)
      if (v != 0.0) coupled_set.insert(c);
  std::vector<int> coupled(coupled_set.begin(), coupled_set.end());
  std::map<int, int> coupled_row;  // full coordinate -> row in the E-chart
  for (size_t i = 0; i < coupled.size(); ++i) coupled_row[coupled[i]] = static_cast<int>(i);

  const int ne = static_cast<int>(coupled.size());
  int kdim = 0;
  RMat n2;
  RVec z0;
  if (ne > 0) {
    RMat e2 = RMat::Zero(static_cast<int>(eq_rows.size()), ne);
    RVec f(static_cast<int>(eq_rows.size()));
    for (size_t r = 0; r < eq_rows.size(); ++r) {
      f(static_cast<int>(r)) = eq_rows[r].rhs;
      for (const auto& [c, v] : eq_rows[r].coeff) e2(static_cast<int>(r), coupled_row[c]) = v;
    }
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(e2);
    z0 = cod.solve(f);
    const double resid = (e2 * z0 - f).norm();
    if (resid > 1e-9 * (1.0 + f.norm())) sf.equality_infeasible = true;
    Eigen::ColPivHouseholderQR<RMat> qr(e2.transpose());
    const int rank = static_cast<int>(qr.rank());
    kdim = ne - rank;
    RMat q = qr.householderQ();
    n2 = q.rightCols(kdim);
  } else {
    z0 = RVec();
    n2 = RMat();
  }
  sf.z0 = z0;
  sf.nullbasis = n2;

  // Candidate solver constraints: one per uncoupled coordinate, then the
  // kernel directions of the equality system.
  sf.map_kind.assign(lay.total, -1);
  sf.map_index.assign(lay.total, -1);
  std::vector<int> candidate_of_coord(lay.total, -1);
  int num_u = 0;
  for (int c = 0; c < lay.total; ++c) {
    if (coupled_row.count(c)) {
      sf.map_kind[c] = 1;
      sf.map_index[c] = coupled_row[c];
    } else {
      candidate_of_coord[c] = num_u++;
      sf.map_kind[c] = 0;  // index assigned after compression
    }
  }
  const int mtot = num_u + kdim;

  // --- Assemble affine blocks over candidate constraints ------------------
  struct PendingBlock {
    int dim;
    RMat f0;
    std::map<int, RMat> terms;  // candidate constraint -> coefficient
    std::string tag;
  };
  std::vector<PendingBlock> pending;
  std::vector<char> used(mtot, 0);

  auto add_coeff = [&](PendingBlock& pb, int full_coord, const RMat& f) {
    if (coupled_row.count(full_coord)) {
      const int row = coupled_row[full_coord];
      for (int j = 0; j < kdim; ++j) {
        const double w = n2(row, j);
        if (w == 0.0) continue;
        auto [it, fresh] = pb.terms.try_emplace(num_u + j, RMat::Zero(pb.dim, pb.dim));
        it->second += w * f;
      }
      // The particular solution contributes to the constant part.
      pb.f0 += z0(row) * f;
    } else {
      auto [it, fresh] =
          pb.terms.try_emplace(candidate_of_coord[full_coord], RMat::Zero(pb.dim, pb.dim));
      it->second += f;
    }
  };

  auto assemble_2x2 = [](const CMat& a, const CMat& b2, const CMat& c) {
    const int d = static_cast<int>(a.rows());
    CMat m(2 * d, 2 * d);
    m.topLeftCorner(d, d) = a;
    m.topRightCorner(d, d) = b2;
    m.bottomLeftCorner(d, d) = b2.adjoint();
    m.bottomRightCorner(d, d) = c;
    return m;
  };

  // PSD-kind variables become identity-mapped cone blocks.
  sf.psd_block_of.assign(model.variables().size(), -1);
  for (VarId v = 0; v < static_cast<VarId>(model.variables().size()); ++v) {
    const VarInfo& vi = model.var(v);
    if (vi.kind != VarKind::HermitianPsd) continue;
    PendingBlock pb;
    pb.dim = 2 * vi.dim;
    pb.f0 = RMat::Zero(pb.dim, pb.dim);
    pb.tag = "psd:" + vi.name;
    for (int c = 0; c < lay.count[v]; ++c)
      add_coeff(pb, lay.offset[v] + c, real_embed(herm_basis_element(vi.dim, c)));
    sf.psd_block_of[v] = static_cast<int>(pending.size());
    pending.push_back(std::move(pb));
  }

  sf.lmi_block_of.clear();
  for (const LmiBlock& blk : model.lmis()) {
    PendingBlock pb;
    const int d = blk.a.dim;
    pb.dim = blk.two_by_two ? 4 * d : 2 * d;
    CMat f0c = blk.two_by_two ? assemble_2x2(blk.a.constant, blk.b.constant, blk.c.constant)
                              : blk.a.constant;
    if (!is_hermitian(f0c)) throw InputError("LMI block: constant part not Hermitian");
    pb.f0 = real_embed(f0c);
    pb.tag = blk.tag;
    std::set<VarId> vs = expr_vars(blk.a);
    if (blk.two_by_two) {
      for (VarId v : expr_vars(blk.b)) vs.insert(v);
      for (VarId v : expr_vars(blk.c)) vs.insert(v);
    }
    for (VarId v : vs) {
      if (model.var(v).kind == VarKind::NonnegScalar)
        throw InputError("LMI over scalar variables is unsupported");
      for (int c = 0; c < lay.count[v]; ++c) {
        CMat be = herm_basis_element(model.var(v).dim, c);
        CMat da = expr_derivative(blk.a, v, be);
        CMat dmat;
        if (blk.two_by_two) {
          CMat db = expr_derivative(blk.b, v, be);
          CMat dc = expr_derivative(blk.c, v, be);
          dmat = assemble_2x2(da, db, dc);
        } else {
          dmat = da;
        }
        if (dmat.cwiseAbs().maxCoeff() == 0.0) continue;
        add_coeff(pb, lay.offset[v] + c, real_embed(dmat));
      }
    }
    sf.lmi_block_of.push_back(static_cast<int>(pending.size()));
    pending.push_back(std::move(pb));
  }

  // Nonneg entries: scalar inequalities and nonneg scalar variables.
  struct PendingEntry {
    double f0 = 0.0;
    std::map<int, double> terms;
    std::string tag;
  };
  std::vector<PendingEntry> pending_nonneg;
  auto add_scalar_coeff = [&](PendingEntry& pe, int full_coord, double w) {
    if (w == 0.0) return;
    if (coupled_row.count(full_coord)) {
      const int row = coupled_row[full_coord];
      for (int j = 0; j < kdim; ++j)
        if (n2(row, j) != 0.0) pe.terms[num_u + j] += w * n2(row, j);
      pe.f0 += z0(row) * w;
    } else {
      pe.terms[candidate_of_coord[full_coord]] += w;
    }
  };

  sf.scalar_entry_of.assign(model.variables().size(), -1);
  for (VarId v = 0; v < static_cast<VarId>(model.variables().size()); ++v) {
    if (model.var(v).kind != VarKind::NonnegScalar) continue;
    PendingEntry pe;
    pe.tag = "nonneg:" + model.var(v).name;
    add_scalar_coeff(pe, lay.offset[v], 1.0);
    sf.scalar_entry_of[v] = static_cast<int>(pending_nonneg.size());
    pending_nonneg.push_back(std::move(pe));
  }
  sf.ineq_entry_of.clear();
  for (const Model::TaggedScalar& si : model.scalar_ineqs()) {
    PendingEntry pe;
    pe.f0 = si.expr.constant;
    pe.tag = si.tag;
    for (const ScalarExpr::Term& t : si.expr.terms) {
      const VarInfo& vi = model.var(t.var);
      if (vi.kind == VarKind::NonnegScalar) {
        add_scalar_coeff(pe, lay.offset[t.var], t.coeff(0, 0).real());
      } else {
        RVec coords = herm_coordinates(hermitize(t.coeff));
        for (int c = 0; c < coords.size(); ++c)
          add_scalar_coeff(pe, lay.offset[t.var] + c, coords(c));
      }
    }
    sf.ineq_entry_of.push_back(static_cast<int>(pending_nonneg.size()));
    pending_nonneg.push_back(std::move(pe));
  }

  // --- Usage analysis and index compression --------------------------------
  for (const PendingBlock& pb : pending)
    for (const auto& [i, f] : pb.terms)
      if (f.cwiseAbs().maxCoeff() > 1e-14) used[i] = 1;
  for (const PendingEntry& pe : pending_nonneg)
    for (const auto& [i, w] : pe.terms)
      if (std::abs(w) > 1e-14) used[i] = 1;

  RVec b_candidate = RVec::Zero(mtot);
  double offset = g0;
  for (int c = 0; c < lay.total; ++c) {
    if (sf.map_kind[c] == 0) {
      b_candidate(candidate_of_coord[c]) += g(c);
    } else if (sf.map_kind[c] == 1) {
      const int row = sf.map_index[c];
      offset += g(c) * z0(row);
      for (int j = 0; j < kdim; ++j) b_candidate(num_u + j) += g(c) * n2(row, j);
    }
  }
  sf.obj_offset = offset;

  std::vector<int> new_index(mtot, -1);
  int m = 0;
  int kernel_kept = 0;
  for (int i = 0; i < mtot; ++i) {
    if (used[i]) {
      new_index[i] = m++;
      if (i >= num_u) ++kernel_kept;
    } else if (std::abs(b_candidate(i)) > 1e-12) {
      sf.unbounded_free_direction = true;
    }
  }
  sf.kernel_start = m - kernel_kept;

  // Kernel columns must stay aligned with the kept constraint order.
  if (kdim > 0) {
    RMat pruned(ne, kernel_kept);
    int col = 0;
    for (int j = 0; j < kdim; ++j)
      if (used[num_u + j]) pruned.col(col++) = n2.col(j);
    sf.nullbasis = pruned;
  }

  sf.b = RVec::Zero(m);
  for (int i = 0; i < mtot; ++i)
    if (new_index[i] >= 0) sf.b(new_index[i]) = b_candidate(i);
  for (int c = 0; c < lay.total; ++c) {
    if (sf.map_kind[c] == 0) {
      const int ni = new_index[candidate_of_coord[c]];
      if (ni >= 0) {
        sf.map_index[c] = ni;
      } else {
        sf.map_kind[c] = -1;  // free, unused, objective-neutral: pin to zero
        sf.map_index[c] = -1;
      }
    }
  }

  for (PendingBlock& pb : pending) {
    StandardForm::Block blk;
    blk.dim = pb.dim;
    blk.f0 = std::move(pb.f0);
    blk.tag = std::move(pb.tag);
    for (auto& [i, f] : pb.terms) {
      if (new_index[i] < 0) continue;
      blk.terms.push_back({new_index[i], std::move(f)});
    }
    sf.blocks.push_back(std::move(blk));
  }
  for (PendingEntry& pe : pending_nonneg) {
    StandardForm::NonnegEntry en;
    en.f0 = pe.f0;
    en.tag = std::move(pe.tag);
    for (const auto& [i, w] : pe.terms)
      if (new_index[i] >= 0 && w != 0.0) en.terms.push_back({new_index[i], w});
    sf.nonneg.push_back(std::move(en));
  }

  // Constant constraints (everything eliminated) either hold or refute the
  // model outright; keeping a zero-slack entry would destroy interiority.
  {
    std::vector<StandardForm::Block> blocks;
    std::vector<int> block_map(sf.blocks.size(), -1);
    for (size_t bi = 0; bi < sf.blocks.size(); ++bi) {
      StandardForm::Block& blk = sf.blocks[bi];
      if (!blk.terms.empty()) {
        block_map[bi] = static_cast<int>(blocks.size());
        blocks.push_back(std::move(blk));
        continue;
      }
      Eigen::SelfAdjointEigenSolver<RMat> es(blk.f0);
      if (es.eigenvalues().minCoeff() < -1e-10) sf.equality_infeasible = true;
    }
    sf.blocks = std::move(blocks);
    for (int& b : sf.lmi_block_of) b = b >= 0 ? block_map[b] : -1;
    for (int& b : sf.psd_block_of) b = b >= 0 ? block_map[b] : -1;

    std::vector<StandardForm::NonnegEntry> nn;
    std::vector<int> entry_map(sf.nonneg.size(), -1);
    for (size_t l = 0; l < sf.nonneg.size(); ++l) {
      if (!sf.nonneg[l].terms.empty()) {
        entry_map[l] = static_cast<int>(nn.size());
        nn.push_back(std::move(sf.nonneg[l]));
      } else if (sf.nonneg[l].f0 < -1e-12) {
        sf.equality_infeasible = true;
      }
    }
    sf.nonneg = std::move(nn);
    for (int& e : sf.ineq_entry_of) e = e >= 0 ? entry_map[e] : -1;
    for (int& e : sf.scalar_entry_of) e = e >= 0 ? entry_map[e] : -1;
  }

  return sf;
}

}  // namespace mre

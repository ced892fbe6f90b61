#pragma once

#include <vector>

#include "mre/model.hpp"

namespace mre {

/// Hermitian coordinate chart: a d x d Hermitian matrix has d*d real
/// coordinates over an orthonormal basis (diagonals first, then re/im pairs
/// of the upper triangle in row-major order).
int herm_coord_count(int dim);
CMat herm_basis_element(int dim, int index);
RVec herm_coordinates(const CMat& h);
CMat herm_from_coordinates(int dim, const RVec& coords);

/// Solver-ready conic form.
///
/// The compiled problem is
///   maximize  b^T y
///   s.t.      S_b(y) = F0_b + sum_i y_i Fi_b  >= 0   for every PSD block b,
///             g0 + sum_i y_i gi               >= 0   entrywise (nonneg part),
/// produced from the model by eliminating all affine equality constraints
/// through a nullspace substitution of the coupled coordinates and by
/// real-embedding every Hermitian coefficient. Model variables are recovered
/// from y via the stored affine map.
struct StandardForm {
  struct BlockTerm {
    int constraint;  // index into y
    RMat mat;        // symmetric coefficient
  };
  struct Block {
    int dim = 0;  // embedded (real) side
    RMat f0;
    std::vector<BlockTerm> terms;
    std::string tag;
  };
  std::vector<Block> blocks;

  // Nonneg part, stored sparsely per entry.
  struct NonnegEntry {
    double f0 = 0.0;
    std::vector<std::pair<int, double>> terms;  // (constraint, coeff)
    std::string tag;
  };
  std::vector<NonnegEntry> nonneg;

  RVec b;  // objective on y (maximization)

  // Equalities turned out inconsistent at compile time.
  bool equality_infeasible = false;
  // A coordinate entered the objective but no constraint: unbounded model.
  bool unbounded_free_direction = false;

  // Recovery of model quantities.
  double obj_sign = 1.0;    // model value = obj_sign * (b^T y + obj_offset)
  double obj_offset = 0.0;
  std::vector<int> var_offset;    // full-coordinate layout per variable
  std::vector<int> var_coords;    // coordinate count per variable
  // full coordinate -> either identity-mapped constraint or eliminated:
  //   map_kind[c] == -1: dropped (fixed by equalities with no freedom)
  //   map_kind[c] ==  0: z_c = y[map_index[c]]
  //   map_kind[c] ==  1: z_c = z0(row) + N(row, :) . y_kernel
  std::vector<int> map_kind;
  std::vector<int> map_index;
  RVec z0;          // particular solution rows for eliminated coordinates
  RMat nullbasis;   // rows align with eliminated coordinates
  int kernel_start = 0;  // first y index belonging to the kernel section
  std::vector<int> lmi_block_of;     // model LMI -> block index
  std::vector<int> psd_block_of;     // model var -> block index (or -1)
  std::vector<int> ineq_entry_of;    // model scalar ineq -> nonneg entry
  std::vector<int> scalar_entry_of;  // model nonneg scalar var -> nonneg entry

  int num_constraints() const { return static_cast<int>(b.size()); }
  std::vector<CMat> recover_variables(const Model& model, const RVec& y) const;
};

StandardForm compile(const Model& model);

}  // namespace mre

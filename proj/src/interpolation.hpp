#pragma once

// Quasi-interpolation I_H = E_H o Pi_H from fine to coarse dofs and the
// patch-restricted kernel constraints that characterise fine-scale functions.

#include "linalg.hpp"
#include "mesh.hpp"

#include <vector>

namespace sdwave {

struct Interpolator {
  /// Rows: coarse interior dofs. Columns: fine interior dofs.
  SparseMatrix matrix;
};

/// Pi_H is the elementwise L2 projection onto affine functions on every
/// coarse element; E_H averages the elementwise values at each interior
/// coarse node over the elements containing it.
Interpolator build_interpolator(const NestedMeshPair& pair);

struct KernelConstraints {
  /// Columns indexed by position in the patch dof list.
  SparseMatrix C;
  /// Coarse dof of each row of C.
  std::vector<int> coarse_rows;
};

/// Rows of I_H restricted to the patch dofs, identically zero rows dropped.
KernelConstraints kernel_constraints(const Interpolator& interp, std::span<const int> patch_dofs);

}  // namespace sdwave

#pragma once

#include "assembly.hpp"
#include "interpolation.hpp"
#include "mesh.hpp"

namespace sdwave {

/// Everything that depends only on the meshes and the two coefficients.
struct Problem {
  NestedMeshPair pair;
  CoefficientField A;
  CoefficientField B;
  DiscreteForms forms;
  Interpolator interp;
  /// Coarse hats in fine dofs.
  SparseMatrix P;

  int fine_dofs() const { return pair.fine.num_dofs(); }
  int coarse_dofs() const { return pair.coarse.num_dofs(); }
};

Problem make_problem(NestedMeshPair pair, CoefficientField A, CoefficientField B);

}  // namespace sdwave

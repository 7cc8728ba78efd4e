#include "problem.hpp"

#include "error.hpp"

namespace sdwave {

Problem make_problem(NestedMeshPair pair, CoefficientField A, CoefficientField B) {
  require(A.mesh_n() == pair.fine.n && B.mesh_n() == pair.fine.n,
          "make_problem: coefficients must live on the fine mesh");
  Problem p;
  p.forms = assemble_forms(pair.fine, A, B);
  p.interp = build_interpolator(pair);
  p.P = prolongation(pair);
  p.pair = std::move(pair);
  p.A = std::move(A);
  p.B = std::move(B);
  return p;
}

}  // namespace sdwave

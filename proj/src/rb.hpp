#pragma once

// Reduced-basis compression of the transient correctors.

#include "evolution.hpp"
#include "lod.hpp"

#include <span>
#include <vector>

namespace sdwave {

/// a~-orthonormal basis of the first snapshots of one node, with the
/// projected matrices of the xi recursion.
struct ReducedBasis {
  int coarse_dof = -1;
  std::vector<int> dofs;
  /// Patch dofs x m.
  DenseMatrix Z;
  /// K~ Z, used for a~ projections onto the basis.
  DenseMatrix KZ;
  /// Z^T K~ Z (identity up to round-off).
  DenseMatrix A_hat;
  /// Z^T K_A Z.
  DenseMatrix K_hat;
  /// Number of snapshots consumed.
  int m_selected = 0;

  int size() const { return static_cast<int>(Z.cols()); }
};

struct RbOptions {
  /// A snapshot is rejected when its a~-norm after projection drops below
  /// tol_rel times its original a~-norm.
  double tol_rel = 1e-10;
  /// Stop collecting at the first rejection (automatic M); otherwise skip
  /// rejected snapshots and consume all of them.
  bool stop_at_first_rejection = true;
};

/// Modified Gram-Schmidt with one reorthogonalization pass in the
/// a~ = a + tau b inner product given by K_tilde. With constraints C, every
/// new direction is projected back onto ker C before normalization; a
/// direction that survives only at the 1e-10 level is otherwise dominated by
/// amplified round-off that leaves the constrained space.
ReducedBasis build_rb(std::span<const Vector> snapshots, const SparseMatrix& K_tilde, const SparseMatrix& K_A,
                      const RbOptions& options = {}, const SparseMatrix& constraints = SparseMatrix());

/// Solves A_hat c = K_hat c_prev.
Vector rb_step(const ReducedBasis& basis, const Vector& c_prev);

/// Coefficients of the a~-projection of v onto the basis.
Vector rb_coefficients(const ReducedBasis& basis, const Vector& v);

Vector rb_lift(const ReducedBasis& basis, const Vector& c);

/// Singular values (descending) of the snapshot matrix in the a~ inner
/// product, from a thin SVD of the Cholesky-weighted snapshots.
Vector snapshot_singular_values(std::span<const Vector> snapshots, const SparseMatrix& K_tilde);

struct RbTransient {
  TransientCorrectors transient;
  std::vector<ReducedBasis> bases;
};

/// Keeps the first M directly computed xi of every node (all of them when
/// M <= 0, with automatic selection) and produces the rest up to the
/// horizon with rb_step lifts.
RbTransient rb_extend(const Problem& problem, const TransientCorrectors& direct, int M,
                      const RbOptions& options = {});

Trajectory rb_gfem_solve(const Problem& problem, const CorrectorSet& correctors, const TransientCorrectors& direct,
                         const SourceFunction& f, const TimeGrid& grid, const Vector& alpha0, const Vector& alpha1,
                         int M, const RbOptions& options = {});

}  // namespace sdwave

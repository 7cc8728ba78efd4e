#include "rb.hpp"

#include "error.hpp"
#include "parallel.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace sdwave {

ReducedBasis build_rb(std::span<const Vector> snapshots, const SparseMatrix& K_tilde, const SparseMatrix& K_A,
                      const RbOptions& options, const SparseMatrix& constraints) {
  require(!snapshots.empty(), "build_rb: no snapshots");
  require(options.tol_rel >= 0.0, "build_rb: tol_rel must be >= 0");
  const Index n = K_tilde.rows();
  require(constraints.rows() == 0 || constraints.cols() == n, "build_rb: constraint width mismatch");

  auto inner = [&](const Vector& x, const Vector& y) { return x.dot(K_tilde * y); };

  // Euclidean projector onto ker C over the nonzero rows of C.
  std::vector<Index> rows;
  {
    const SparseMatrix Ct = constraints.transpose();
    for (Index r = 0; r < Ct.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(Ct, r); it; ++it)
        if (it.value() != 0.0) {
          rows.push_back(r);
          break;
        }
  }
  DenseMatrix C(static_cast<Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) C.row(static_cast<Index>(i)) = DenseMatrix(constraints.row(rows[i]));
  const Eigen::LLT<DenseMatrix> gram(C * C.transpose());
  if (!rows.empty() && gram.info() != Eigen::Success)
    throw Error(ErrorCode::degenerate_constraint, "degenerate constraint: constraint rows are dependent");
  auto project = [&](Vector& v) {
    if (!rows.empty()) v -= C.transpose() * gram.solve(C * v);
  };

  std::vector<Vector> basis;
  ReducedBasis out;
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const Vector& snap = snapshots[s];
    require(snap.size() == n, "build_rb: snapshot size mismatch");
    const double original = std::sqrt(std::max(0.0, inner(snap, snap)));
    if (s == 0 && !(original > 0.0)) throw Error(ErrorCode::empty_basis, "empty basis: first snapshot is zero");

    Vector v = snap;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& z : basis) v -= inner(z, v) * z;
      project(v);
    }
    const double remaining = std::sqrt(std::max(0.0, inner(v, v)));
    if (!(remaining > options.tol_rel * original) || !(original > 0.0)) {
      if (options.stop_at_first_rejection) break;
      out.m_selected = static_cast<int>(s) + 1;
      continue;
    }
    basis.push_back(v / remaining);
    out.m_selected = static_cast<int>(s) + 1;
  }

  out.Z.resize(n, static_cast<Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) out.Z.col(static_cast<Index>(j)) = basis[j];
  out.KZ = K_tilde * out.Z;
  out.A_hat = out.Z.transpose() * out.KZ;
  out.K_hat = out.Z.transpose() * (K_A * out.Z);
  return out;
}

Vector rb_step(const ReducedBasis& basis, const Vector& c_prev) {
  require(c_prev.size() == basis.size(), "rb_step: coefficient size mismatch");
  if (basis.size() == 0) return Vector();
  return basis.A_hat.llt().solve(basis.K_hat * c_prev);
}

Vector rb_coefficients(const ReducedBasis& basis, const Vector& v) {
  require(v.size() == basis.Z.rows(), "rb_coefficients: size mismatch");
  if (basis.size() == 0) return Vector();
  return basis.A_hat.llt().solve(basis.KZ.transpose() * v);
}

Vector rb_lift(const ReducedBasis& basis, const Vector& c) {
  require(c.size() == basis.size(), "rb_lift: coefficient size mismatch");
  return basis.Z * c;
}

Vector snapshot_singular_values(std::span<const Vector> snapshots, const SparseMatrix& K_tilde) {
  require(!snapshots.empty(), "snapshot_singular_values: no snapshots");
  const Index n = K_tilde.rows();
  DenseMatrix X(n, static_cast<Index>(snapshots.size()));
  for (std::size_t j = 0; j < snapshots.size(); ++j) {
    require(snapshots[j].size() == n, "snapshot_singular_values: snapshot size mismatch");
    X.col(static_cast<Index>(j)) = snapshots[j];
  }
  Eigen::SimplicialLLT<SparseMatrix> llt(K_tilde);
  if (llt.info() != Eigen::Success)
    throw SingularSystemError(-1, "singular system: inner product matrix not positive definite");
  // K~ = P^T L L^T P, so a~(x, y) = (L^T P x) . (L^T P y).
  const DenseMatrix permuted = llt.permutationP() * X;
  const DenseMatrix Y = llt.matrixU() * permuted;
  Eigen::BDCSVD<DenseMatrix> svd(Y);
  return svd.singularValues();
}

RbTransient rb_extend(const Problem& problem, const TransientCorrectors& direct, int M, const RbOptions& options) {
  RbTransient out;
  out.transient.config = direct.config;
  out.transient.horizon = direct.horizon;
  out.transient.stop_tol = direct.stop_tol;
  const std::size_t n_nodes = direct.nodes.size();
  out.transient.nodes.resize(n_nodes);
  out.bases.resize(n_nodes);
  RbOptions opts = options;
  opts.stop_at_first_rejection = M <= 0;

  parallel_for(static_cast<int>(n_nodes), [&](int x) {
    const NodeTransient& src = direct.nodes[static_cast<std::size_t>(x)];
    NodeTransient& dst = out.transient.nodes[static_cast<std::size_t>(x)];
    dst.coarse_dof = src.coarse_dof;
    dst.dofs = src.dofs;
    const int stored = static_cast<int>(src.xi.size());
    const int available = M <= 0 ? stored : std::min(M, stored);
    // No correctors, or fewer than M were stored: nothing to compress.
    if (available == 0 || (M > 0 && stored <= M)) {
      dst.xi = src.xi;
      return;
    }
    const PatchSystem sys = make_patch_system(problem, direct.config.tau, src.dofs);
    ReducedBasis& basis = out.bases[static_cast<std::size_t>(x)];
    basis = build_rb(std::span<const Vector>(src.xi).first(static_cast<std::size_t>(available)), sys.K_tilde, sys.K_A, opts,
                     sys.constraints.C);
    basis.coarse_dof = src.coarse_dof;
    basis.dofs = src.dofs;

    const int m = basis.m_selected;
    dst.xi.assign(src.xi.begin(), src.xi.begin() + m);
    Vector c = rb_coefficients(basis, src.xi[static_cast<std::size_t>(m - 1)]);
    for (int l = m + 1; l <= direct.horizon; ++l) {
      c = rb_step(basis, c);
      dst.xi.push_back(rb_lift(basis, c));
    }
  });
  return out;
}

Trajectory rb_gfem_solve(const Problem& problem, const CorrectorSet& correctors, const TransientCorrectors& direct,
                         const SourceFunction& f, const TimeGrid& grid, const Vector& alpha0, const Vector& alpha1,
                         int M, const RbOptions& options) {
  const RbTransient extended = rb_extend(problem, direct, M, options);
  Trajectory traj = localized_gfem_solve(problem, correctors, extended.transient, f, grid, alpha0, alpha1);
  traj.scheme = "gfem_rb";
  return traj;
}

}  // namespace sdwave

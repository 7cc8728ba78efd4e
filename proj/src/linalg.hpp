#pragma once

// Sparse symmetric systems and the constrained (saddle point) solves used by
// every corrector and time-step system.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <memory>
#include <span>
#include <vector>

namespace sdwave {

using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Relative residual ||A x - b|| / ||b|| (0 when b = 0 and A x = 0).
double relative_residual(const SparseMatrix& A, const Vector& x, const Vector& b);

bool is_symmetric(const SparseMatrix& A, double tol = 0.0);

bool all_finite(const Vector& v);

/// A(rows, cols) for sorted or unsorted index lists.
SparseMatrix restrict_matrix(const SparseMatrix& A, std::span<const int> rows,
                             std::span<const int> cols);

/// x(idx)
Vector gather(const Vector& x, std::span<const int> idx);

/// y(idx) += x
void scatter_add(Vector& y, std::span<const int> idx, const Vector& x);

/// Reusable LDL^T factorization (AMD ordering) of a symmetric positive
/// definite matrix. Immutable after construction; solve() may be called
/// concurrently.
class Factorization {
 public:
  explicit Factorization(const SparseMatrix& A);

  Vector solve(const Vector& b) const;
  DenseMatrix solve(const DenseMatrix& B) const;
  Index size() const { return n_; }

 private:
  using Solver = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
  std::shared_ptr<const Solver> solver_;
#ifndef NDEBUG
  SparseMatrix matrix_;
#endif
  Index n_ = 0;
};

inline Factorization factor(const SparseMatrix& A) { return Factorization(A); }

struct SaddleSolution {
  Vector w;
  /// One multiplier per row of the original constraint matrix; dropped
  /// (identically zero) rows carry 0.
  Vector mu;
};

/// Factorization of [A C^T; C 0] with identically zero rows of C removed.
class SaddleFactorization {
 public:
  SaddleFactorization(const SparseMatrix& A, const SparseMatrix& C);

  SaddleSolution solve(const Vector& r) const;
  /// Primal part only, for many right-hand sides.
  Vector solve_primal(const Vector& r) const;

  Index primal_size() const { return n_; }
  Index active_constraints() const { return static_cast<Index>(kept_rows_.size()); }

 private:
  Vector solve_kkt(const Vector& r) const;

  using Solver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
  std::shared_ptr<Solver> solver_;
  SparseMatrix kkt_;
  std::vector<int> kept_rows_;
  /// As many independent constraints as unknowns: the primal part is 0.
  bool trivial_kernel_ = false;
  Index n_ = 0;
  Index m_total_ = 0;
};

SaddleSolution solve_saddle(const SparseMatrix& A, const SparseMatrix& C, const Vector& r);

/// Dense symmetric positive definite solve used for the small coarse systems.
class DenseFactorization {
 public:
  explicit DenseFactorization(const DenseMatrix& A);
  Vector solve(const Vector& b) const { return llt_.solve(b); }
  Index size() const { return llt_.rows(); }

 private:
  Eigen::LLT<DenseMatrix> llt_;
};

}  // namespace sdwave

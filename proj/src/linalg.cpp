#include "linalg.hpp"

#include "error.hpp"

#include <cassert>
#include <cmath>
#include <string>

namespace sdwave {

double relative_residual(const SparseMatrix& A, const Vector& x, const Vector& b) {
  const double r = (A * x - b).norm();
  const double nb = b.norm();
  return nb > 0.0 ? r / nb : r;
}

bool is_symmetric(const SparseMatrix& A, double tol) {
  if (A.rows() != A.cols()) return false;
  const SparseMatrix At = A.transpose();
  const SparseMatrix D = A - At;
  for (Index k = 0; k < D.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(D, k); it; ++it)
      if (std::abs(it.value()) > tol) return false;
  return true;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

SparseMatrix restrict_matrix(const SparseMatrix& A, std::span<const int> rows,
                             std::span<const int> cols) {
  std::vector<int> row_map(static_cast<std::size_t>(A.rows()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) row_map[static_cast<std::size_t>(rows[i])] = static_cast<int>(i);

  std::vector<Triplet> entries;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (SparseMatrix::InnerIterator it(A, cols[j]); it; ++it) {
      const int li = row_map[static_cast<std::size_t>(it.row())];
      if (li >= 0) entries.emplace_back(li, static_cast<int>(j), it.value());
    }
  }
  SparseMatrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

Vector gather(const Vector& x, std::span<const int> idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Index>(i)] = x[idx[i]];
  return out;
}

void scatter_add(Vector& y, std::span<const int> idx, const Vector& x) {
  assert(static_cast<Index>(idx.size()) == x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) y[idx[i]] += x[static_cast<Index>(i)];
}

Factorization::Factorization(const SparseMatrix& A) : n_(A.rows()) {
  require(A.rows() == A.cols(), "factor: matrix must be square");
  auto solver = std::make_shared<Solver>();
  if (n_ > 0) {
    solver->compute(A);
    const Vector d = solver->vectorD();
    const double scale = d.size() > 0 ? d.cwiseAbs().maxCoeff() : 0.0;
    const double floor = scale * 1e-14 * static_cast<double>(n_);
    for (Index i = 0; i < d.size(); ++i) {
      if (!(std::abs(d[i]) > floor)) {
        const long pivot = solver->permutationPinv().indices()[i];
        throw SingularSystemError(pivot, "singular system: zero pivot at index " + std::to_string(pivot));
      }
    }
    if (solver->info() != Eigen::Success) throw SingularSystemError(-1, "singular system: factorization failed");
  }
  solver_ = std::move(solver);
#ifndef NDEBUG
  matrix_ = A;
#endif
}

Vector Factorization::solve(const Vector& b) const {
  require(b.size() == n_, "solve: dimension mismatch");
  if (n_ == 0) return Vector();
  Vector x = solver_->solve(b);
#ifndef NDEBUG
  assert(relative_residual(matrix_, x, b) <= 1e-12);
#endif
  return x;
}

DenseMatrix Factorization::solve(const DenseMatrix& B) const {
  require(B.rows() == n_, "solve: dimension mismatch");
  if (n_ == 0) return DenseMatrix(0, B.cols());
  return solver_->solve(B);
}

SaddleFactorization::SaddleFactorization(const SparseMatrix& A, const SparseMatrix& C)
    : n_(A.rows()), m_total_(C.rows()) {
  require(A.rows() == A.cols(), "solve_saddle: A must be square");
  require(C.rows() == 0 || C.cols() == A.cols(), "solve_saddle: constraint width mismatch");

  // Row r of C is kept when it has at least one nonzero value.
  std::vector<char> nonzero(static_cast<std::size_t>(C.rows()), 0);
  for (Index k = 0; k < C.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(C, k); it; ++it)
      if (it.value() != 0.0) nonzero[static_cast<std::size_t>(it.row())] = 1;
  std::vector<int> local(static_cast<std::size_t>(C.rows()), -1);
  for (Index r = 0; r < C.rows(); ++r) {
    if (nonzero[static_cast<std::size_t>(r)]) {
      local[static_cast<std::size_t>(r)] = static_cast<int>(kept_rows_.size());
      kept_rows_.push_back(static_cast<int>(r));
    }
  }
  const Index m = static_cast<Index>(kept_rows_.size());

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * C.nonZeros()));
  for (Index k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      entries.emplace_back(it.row(), it.col(), it.value());
  for (Index k = 0; k < C.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(C, k); it; ++it) {
      if (it.value() == 0.0) continue;
      const Index r = n_ + local[static_cast<std::size_t>(it.row())];
      entries.emplace_back(r, it.col(), it.value());
      entries.emplace_back(it.col(), r, it.value());
    }
  }
  kkt_.resize(n_ + m, n_ + m);
  kkt_.setFromTriplets(entries.begin(), entries.end());
  kkt_.makeCompressed();

  solver_ = std::make_shared<Solver>();
  if (n_ + m == 0) return;
  solver_->analyzePattern(kkt_);
  solver_->factorize(kkt_);
  if (solver_->info() != Eigen::Success) {
    if (m > 0)
      throw Error(ErrorCode::degenerate_constraint,
                  "degenerate constraint: saddle system is singular (" + solver_->lastErrorMessage() + ")");
    throw SingularSystemError(-1, "singular system: " + solver_->lastErrorMessage());
  }
  trivial_kernel_ = m == n_;
}

Vector SaddleFactorization::solve_kkt(const Vector& r) const {
  require(r.size() == n_, "solve_saddle: rhs dimension mismatch");
  const Index m = static_cast<Index>(kept_rows_.size());
  if (n_ + m == 0) return Vector();
  Vector rhs = Vector::Zero(n_ + m);
  rhs.head(n_) = r;
  Vector x = solver_->solve(rhs);
#ifndef NDEBUG
  assert(relative_residual(kkt_, x, rhs) <= 1e-10);
#endif
  return x;
}

SaddleSolution SaddleFactorization::solve(const Vector& r) const {
  const Vector x = solve_kkt(r);
  SaddleSolution out;
  out.w = trivial_kernel_ ? Vector(Vector::Zero(n_)) : Vector(x.head(n_));
  out.mu = Vector::Zero(m_total_);
  for (std::size_t i = 0; i < kept_rows_.size(); ++i)
    out.mu[kept_rows_[i]] = x[n_ + static_cast<Index>(i)];
  return out;
}

Vector SaddleFactorization::solve_primal(const Vector& r) const {
  if (n_ == 0) return Vector();
  if (trivial_kernel_) {
    require(r.size() == n_, "solve_saddle: rhs dimension mismatch");
    return Vector::Zero(n_);
  }
  return solve_kkt(r).head(n_);
}

SaddleSolution solve_saddle(const SparseMatrix& A, const SparseMatrix& C, const Vector& r) {
  return SaddleFactorization(A, C).solve(r);
}

DenseFactorization::DenseFactorization(const DenseMatrix& A) : llt_(A) {
  require(A.rows() == A.cols(), "dense factor: matrix must be square");
  if (A.rows() > 0 && llt_.info() != Eigen::Success)
    throw SingularSystemError(-1, "singular system: dense matrix not positive definite");
}

}  // namespace sdwave

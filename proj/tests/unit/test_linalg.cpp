#include "linalg.hpp"
#include "error.hpp"
#include "support.hpp"

using namespace sdwave;
using sdwave::testing::random_vector;

namespace {

SparseMatrix sparse(const DenseMatrix& D) { return D.sparseView(); }

SparseMatrix random_spd(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = u(rng);
  DenseMatrix A = G * G.transpose() + n * DenseMatrix::Identity(n, n);
  return sparse(A);
}

}  // namespace

TEST_CASE("factorization solves identity and diagonal systems exactly") {
  Vector b(3);
  b << 1, 2, 3;
  SparseMatrix I(3, 3);
  I.setIdentity();
  CHECK((Factorization(I).solve(b) - b).norm() == 0.0);

  DenseMatrix D(2, 2);
  D << 2, 0, 0, 4;
  Vector rhs(2);
  rhs << 2, 4;
  const Vector x = Factorization(sparse(D)).solve(rhs);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(1.0));
}

TEST_CASE("factorization residual on random SPD systems") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SparseMatrix A = random_spd(50, seed);
    const Vector b = random_vector(50, seed + 100);
    CHECK(relative_residual(A, Factorization(A).solve(b), b) <= 1e-12);
  }
}

TEST_CASE("factorization rejects singular matrices with the pivot") {
  DenseMatrix D = DenseMatrix::Zero(3, 3);
  D(0, 0) = 1.0;
  D(2, 2) = 1.0;
  try {
    Factorization f(sparse(D));
    FAIL("expected singular system");
  } catch (const SingularSystemError& e) {
    CHECK(e.code() == ErrorCode::singular_system);
    CHECK(e.pivot() == 1);
  }
}

TEST_CASE("saddle solve by hand elimination") {
  SparseMatrix A(2, 2);
  A.setIdentity();
  DenseMatrix Cd(1, 2);
  Cd << 1, 0;
  Vector r(2);
  r << 1, 1;
  const SaddleSolution s = solve_saddle(A, sparse(Cd), r);
  CHECK(s.w[0] == doctest::Approx(0.0));
  CHECK(s.w[1] == doctest::Approx(1.0));
  CHECK(s.mu[0] == doctest::Approx(1.0));

  const SaddleSolution zero = solve_saddle(A, sparse(Cd), Vector::Zero(2));
  CHECK(zero.w.norm() == 0.0);
  CHECK(zero.mu.norm() == 0.0);
}

TEST_CASE("saddle solve without constraints is a plain solve") {
  const SparseMatrix A = random_spd(20, 7);
  const Vector b = random_vector(20, 8);
  const SaddleSolution s = solve_saddle(A, SparseMatrix(0, 20), b);
  CHECK((s.w - Factorization(A).solve(b)).norm() <= 1e-12 * b.norm());
  CHECK(s.mu.size() == 0);
}

TEST_CASE("zero constraint rows are dropped and get zero multipliers") {
  const SparseMatrix A = random_spd(6, 3);
  DenseMatrix Cd = DenseMatrix::Zero(3, 6);
  Cd(0, 1) = 1.0;
  Cd(2, 4) = 2.0;
  Cd(2, 5) = -1.0;
  const SaddleFactorization f(A, sparse(Cd));
  CHECK(f.active_constraints() == 2);
  const Vector r = random_vector(6, 4);
  const SaddleSolution s = f.solve(r);
  CHECK(s.mu.size() == 3);
  CHECK(s.mu[1] == 0.0);
  CHECK((Cd * s.w).norm() <= 1e-13);
  const Vector residual = A * s.w + Cd.transpose() * s.mu - r;
  CHECK(residual.norm() <= 1e-12 * r.norm());
}

TEST_CASE("dependent constraints are reported as degenerate") {
  const SparseMatrix A = random_spd(4, 5);
  DenseMatrix Cd = DenseMatrix::Zero(2, 4);
  Cd.row(0) << 1, 1, 0, 0;
  Cd.row(1) << 2, 2, 0, 0;
  CHECK_THROWS_AS(SaddleFactorization(A, sparse(Cd)), Error);
  try {
    SaddleFactorization f(A, sparse(Cd));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_constraint);
  }
}

TEST_CASE("property: random saddle systems satisfy both block equations") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 10 + trial * 3;
    const int m = 1 + trial % 4;
    const SparseMatrix A = random_spd(n, 50 + trial);
    DenseMatrix Cd = DenseMatrix::Zero(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) Cd(i, j) = static_cast<double>(rng() % 5) - 2.0;
    const Vector r = random_vector(n, 90 + trial);
    const SaddleSolution s = solve_saddle(A, sparse(Cd), r);
    CHECK((Cd * s.w).norm() <= 1e-11 * r.norm());
    CHECK((A * s.w + Cd.transpose() * s.mu - r).norm() <= 1e-11 * r.norm());
  }
}

TEST_CASE("restrict, gather and scatter agree with dense indexing") {
  DenseMatrix D(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) D(i, j) = (i + 1) * 10 + j;
  const std::vector<int> rows{3, 1}, cols{0, 2, 3};
  const DenseMatrix R = DenseMatrix(restrict_matrix(sparse(D), rows, cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) CHECK(R(i, j) == D(rows[i], cols[j]));

  Vector x(4);
  x << 1, 2, 3, 4;
  const Vector g = gather(x, rows);
  CHECK(g[0] == 4.0);
  CHECK(g[1] == 2.0);
  Vector y = Vector::Zero(4);
  scatter_add(y, rows, g);
  scatter_add(y, rows, g);
  CHECK(y[3] == 8.0);
  CHECK(y[1] == 4.0);
  CHECK(y[0] == 0.0);
}

TEST_CASE("symmetry and finiteness checks") {
  const SparseMatrix A = random_spd(8, 9);
  CHECK(is_symmetric(A, 1e-14));
  DenseMatrix N = DenseMatrix(A);
  N(0, 1) += 1.0;
  CHECK_FALSE(is_symmetric(sparse(N)));
  Vector v = Vector::Ones(3);
  CHECK(all_finite(v));
  v[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(all_finite(v));
}

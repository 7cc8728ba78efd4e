#pragma once

#include "harness.hpp"
#include "problem.hpp"

#include <doctest.h>

#include <random>

namespace sdwave::testing {

inline Problem constant_problem(int coarse_n, int r, double a = 1.0, double b = 1.0) {
  NestedMeshPair pair = refine(build_uniform_mesh(coarse_n), r);
  const int n = pair.fine.n;
  return make_problem(std::move(pair), CoefficientField::constant(n, a), CoefficientField::constant(n, b));
}

inline Problem random_problem(int coarse_n, int r, std::uint64_t seed = 1, double lo = 0.1, double hi = 1000.0) {
  NestedMeshPair pair = refine(build_uniform_mesh(coarse_n), r);
  CoefficientField A = random_field(pair.fine, lo, hi, seed, CoefficientLaw::log_uniform, 0);
  CoefficientField B = random_field(pair.fine, lo, hi, seed + 1000, CoefficientLaw::log_uniform, 0);
  return make_problem(std::move(pair), std::move(A), std::move(B));
}

inline Vector random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline double rel_diff(const Vector& a, const Vector& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace sdwave::testing

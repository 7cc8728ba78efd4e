#pragma once

// Backward Euler time stepping: the fine reference FEM, the ideal and the
// localized GFEM, subspace Galerkin baselines and the first-order auxiliary
// problem.

#include "assembly.hpp"
#include "lod.hpp"
#include "problem.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sdwave {

struct TimeGrid {
  double tau = 0.02;
  int steps = 50;

  double final_time() const { return tau * steps; }
  double time(int n) const { return tau * n; }
};

void validate(const TimeGrid& grid);

struct Trajectory {
  std::string scheme;
  TimeGrid grid;
  /// Fine dof vectors u^0..u^N.
  std::vector<Vector> states;
  /// Coarse coefficients alpha^0..alpha^N for the multiscale schemes.
  std::vector<Vector> coarse;
};

/// (M/tau^2 + K_A/tau + K_B) u^n = F^n + M(2u^{n-1} - u^{n-2})/tau^2 + K_A u^{n-1}/tau, n >= 2.
Trajectory fine_fem_solve(const Problem& problem, const SourceFunction& f, const Vector& u0, const Vector& u1,
                          const TimeGrid& grid);

/// Ideal method: coarse step in span(Q), fine-scale part from a global
/// saddle solve a~(w^n, z) = a(u^{n-1}, z) every step. Needs saturated
/// correctors.
Trajectory ideal_gfem_solve(const Problem& problem, const CorrectorSet& correctors, const SourceFunction& f,
                            const TimeGrid& grid, const Vector& alpha0, const Vector& alpha1);

enum class FineScalePath {
  superposition,
  /// Per-step patch solves; reference for the superposition.
  direct,
};

Trajectory localized_gfem_solve(const Problem& problem, const CorrectorSet& correctors,
                                const TransientCorrectors& transient, const SourceFunction& f,
                                const TimeGrid& grid, const Vector& alpha0, const Vector& alpha1,
                                FineScalePath path = FineScalePath::superposition);

/// Galerkin projection of the fine scheme onto span(basis) with no
/// fine-scale correction. basis = P gives coarse FEM; Q from an a-only or
/// b-only corrector set gives the single-coefficient LOD baselines.
Trajectory galerkin_solve(const Problem& problem, const SparseMatrix& basis, const SourceFunction& f,
                          const TimeGrid& grid, const Vector& alpha0, const Vector& alpha1,
                          std::string scheme);

/// (K_A + tau K_B) Z^n = tau F^n + K_A Z^{n-1}, n = 1..N.
Trajectory aux_fine_solve(const Problem& problem, const SourceFunction& f, const Vector& z0, const TimeGrid& grid);

/// Multiscale splitting of the auxiliary problem with the ideal correctors.
Trajectory aux_gfem_solve(const Problem& problem, const CorrectorSet& correctors, const SourceFunction& f,
                          const Vector& alpha0, const TimeGrid& grid);

/// 1/2 |(u - u_prev)/tau|_M^2 + 1/2 |u|_{K_B}^2
double discrete_energy(const DiscreteForms& forms, const Vector& u_prev, const Vector& u, double tau);

struct TrajectoryError {
  /// |e^N|_{H1} / |u_ref^N|_{H1}
  double rel_h1_final = 0.0;
  /// (sum_n tau |e^n|_{H1}^2)^{1/2} / (sum_n tau |u_ref^n|_{H1}^2)^{1/2}, n = 1..N
  double rel_l2h1 = 0.0;
};

TrajectoryError relative_error(const DiscreteForms& forms, const Trajectory& reference, const Trajectory& approx);

/// step,time,l2,h1
void write_trajectory_csv(std::ostream& os, const DiscreteForms& forms, const Trajectory& trajectory);
/// int64 step count N, int64 dof count, then u^N as doubles.
void write_final_state_binary(std::ostream& os, const Trajectory& trajectory);
Vector read_final_state_binary(std::istream& is);

}  // namespace sdwave

#include "evolution.hpp"

#include "error.hpp"

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>

namespace sdwave {

void validate(const TimeGrid& grid) {
  require(grid.tau > 0.0 && std::isfinite(grid.tau), "time grid: tau must be > 0");
  require(grid.steps >= 2, "time grid: at least two steps required");
}

namespace {

void check_finite(const Vector& v, const char* scheme, int n) {
  if (!v.allFinite())
    throw Error(ErrorCode::singular_system,
                std::string(scheme) + ": non-finite state at step " + std::to_string(n));
}

Trajectory start(std::string scheme, const TimeGrid& grid) {
  validate(grid);
  Trajectory t;
  t.scheme = std::move(scheme);
  t.grid = grid;
  t.states.reserve(static_cast<std::size_t>(grid.steps) + 1);
  return t;
}

void require_matching_tau(const CorrectorSet& correctors, const TimeGrid& grid) {
  require(std::abs(correctors.config.tau - grid.tau) <= 1e-14 * grid.tau,
          "correctors were built for a different time step");
}

}  // namespace

Trajectory fine_fem_solve(const Problem& problem, const SourceFunction& f, const Vector& u0, const Vector& u1,
                          const TimeGrid& grid) {
  Trajectory traj = start("fem", grid);
  const DiscreteForms& forms = problem.forms;
  const int n_dofs = problem.fine_dofs();
  require(u0.size() == n_dofs && u1.size() == n_dofs, "fine_fem_solve: initial data size mismatch");
  const double tau = grid.tau;
  const SparseMatrix lhs = forms.M / (tau * tau) + forms.K_A / tau + forms.K_B;
  const Factorization solver(lhs);

  traj.states.push_back(u0);
  traj.states.push_back(u1);
  for (int n = 2; n <= grid.steps; ++n) {
    const Vector& u1p = traj.states[static_cast<std::size_t>(n - 1)];
    const Vector& u2p = traj.states[static_cast<std::size_t>(n - 2)];
    const Vector rhs = assemble_load(problem.pair.fine, f, grid.time(n)) +
                       forms.M * (2.0 * u1p - u2p) / (tau * tau) + forms.K_A * u1p / tau;
    traj.states.push_back(solver.solve(rhs));
    check_finite(traj.states.back(), "fine_fem_solve", n);
  }
  return traj;
}

namespace {

/// Shared coarse stepping for the GFEM variants. fine_scale(n, traj) returns w^n.
template <typename FineScale>
Trajectory gfem_loop(const Problem& problem, const CorrectorSet& correctors, const SourceFunction& f,
                     const TimeGrid& grid, const Vector& alpha0, const Vector& alpha1, std::string scheme,
                     FineScale&& fine_scale) {
  Trajectory traj = start(std::move(scheme), grid);
  require_matching_tau(correctors, grid);
  const int m = problem.coarse_dofs();
  require(alpha0.size() == m && alpha1.size() == m, "gfem: initial data size mismatch");
  const double tau = grid.tau;
  const SparseMatrix& Q = correctors.Q;
  const SparseMatrix Qt = Q.transpose();
  const DenseFactorization coarse(correctors.M_ms / tau + correctors.A_ms + tau * correctors.B_ms);

  traj.coarse = {alpha0, alpha1};
  traj.states = {Q * alpha0, Q * alpha1};
  for (int n = 2; n <= grid.steps; ++n) {
    const Vector& a1 = traj.coarse[static_cast<std::size_t>(n - 1)];
    const Vector& a2 = traj.coarse[static_cast<std::size_t>(n - 2)];
    const Vector& u_prev = traj.states[static_cast<std::size_t>(n - 1)];
    const Vector rhs = tau * (Qt * assemble_load(problem.pair.fine, f, grid.time(n))) +
                       correctors.M_ms * (2.0 * a1 - a2) / tau + Qt * (problem.forms.K_A * u_prev);
    traj.coarse.push_back(coarse.solve(rhs));
    const Vector w = fine_scale(n, traj);
    traj.states.push_back(Q * traj.coarse.back() + w);
    check_finite(traj.states.back(), traj.scheme.c_str(), n);
  }
  return traj;
}

}  // namespace

Trajectory ideal_gfem_solve(const Problem& problem, const CorrectorSet& correctors, const SourceFunction& f,
                            const TimeGrid& grid, const Vector& alpha0, const Vector& alpha1) {
  require(correctors.saturated(problem), "ideal_gfem_solve: correctors must use saturated patches");
  require(correctors.config.form == FormChoice::a_plus_tau_b, "ideal_gfem_solve: correctors must use a + tau b");
  const SparseMatrix K = corrector_matrix(problem, correctors.config);
  const SaddleFactorization fine = global_fine_scale_solver(problem, K);
  return gfem_loop(problem, correctors, f, grid, alpha0, alpha1, "gfem_ideal", [&](int n, const Trajectory& traj) {
    return fine.solve_primal(problem.forms.K_A * traj.states[static_cast<std::size_t>(n - 1)]);
  });
}

Trajectory localized_gfem_solve(const Problem& problem, const CorrectorSet& correctors,
                                const TransientCorrectors& transient, const SourceFunction& f,
                                const TimeGrid& grid, const Vector& alpha0, const Vector& alpha1,
                                FineScalePath path) {
  const CorrectorConfig& a = correctors.config;
  const CorrectorConfig& b = transient.config;
  require(a.k == b.k && a.tau == b.tau && a.form == b.form,
          "localized_gfem_solve: transient correctors built with a different config");
  require(a.form == FormChoice::a_plus_tau_b, "localized_gfem_solve: correctors must use a + tau b");
  require(static_cast<int>(transient.nodes.size()) == problem.coarse_dofs(),
          "localized_gfem_solve: transient correctors missing nodes");

  if (path == FineScalePath::direct) {
    DirectFineScaleStepper stepper(problem, correctors);
    return gfem_loop(problem, correctors, f, grid, alpha0, alpha1, "gfem_direct",
                     [&](int n, const Trajectory& traj) { return stepper.step(traj.coarse[static_cast<std::size_t>(n - 1)]); });
  }
  const int fine_dofs = problem.fine_dofs();
  return gfem_loop(problem, correctors, f, grid, alpha0, alpha1, "gfem", [&](int n, const Trajectory& traj) {
    return superpose(transient, traj.coarse, n, fine_dofs);
  });
}

Trajectory galerkin_solve(const Problem& problem, const SparseMatrix& basis, const SourceFunction& f,
                          const TimeGrid& grid, const Vector& alpha0, const Vector& alpha1, std::string scheme) {
  Trajectory traj = start(std::move(scheme), grid);
  require(basis.rows() == problem.fine_dofs(), "galerkin_solve: basis row count mismatch");
  require(alpha0.size() == basis.cols() && alpha1.size() == basis.cols(), "galerkin_solve: initial data size mismatch");
  const double tau = grid.tau;
  const DiscreteForms& forms = problem.forms;
  const SparseMatrix Bt = basis.transpose();
  const DenseMatrix M = DenseMatrix(Bt * (forms.M * basis));
  const DenseMatrix KA = DenseMatrix(Bt * (forms.K_A * basis));
  const DenseMatrix KB = DenseMatrix(Bt * (forms.K_B * basis));
  const DenseFactorization solver(M / (tau * tau) + KA / tau + KB);

  traj.coarse = {alpha0, alpha1};
  traj.states = {basis * alpha0, basis * alpha1};
  for (int n = 2; n <= grid.steps; ++n) {
    const Vector& a1 = traj.coarse[static_cast<std::size_t>(n - 1)];
    const Vector& a2 = traj.coarse[static_cast<std::size_t>(n - 2)];
    const Vector rhs = Bt * assemble_load(problem.pair.fine, f, grid.time(n)) + M * (2.0 * a1 - a2) / (tau * tau) +
                       KA * a1 / tau;
    traj.coarse.push_back(solver.solve(rhs));
    traj.states.push_back(basis * traj.coarse.back());
    check_finite(traj.states.back(), traj.scheme.c_str(), n);
  }
  return traj;
}

Trajectory aux_fine_solve(const Problem& problem, const SourceFunction& f, const Vector& z0, const TimeGrid& grid) {
  Trajectory traj = start("aux_fem", grid);
  require(z0.size() == problem.fine_dofs(), "aux_fine_solve: initial data size mismatch");
  const DiscreteForms& forms = problem.forms;
  const Factorization solver(forms.K_A + grid.tau * forms.K_B);
  traj.states.push_back(z0);
  for (int n = 1; n <= grid.steps; ++n) {
    const Vector rhs = grid.tau * assemble_load(problem.pair.fine, f, grid.time(n)) +
                       forms.K_A * traj.states.back();
    traj.states.push_back(solver.solve(rhs));
    check_finite(traj.states.back(), "aux_fine_solve", n);
  }
  return traj;
}

Trajectory aux_gfem_solve(const Problem& problem, const CorrectorSet& correctors, const SourceFunction& f,
                          const Vector& alpha0, const TimeGrid& grid) {
  Trajectory traj = start("aux_gfem", grid);
  require_matching_tau(correctors, grid);
  require(correctors.saturated(problem), "aux_gfem_solve: correctors must use saturated patches");
  require(correctors.config.form == FormChoice::a_plus_tau_b, "aux_gfem_solve: correctors must use a + tau b");
  require(alpha0.size() == problem.coarse_dofs(), "aux_gfem_solve: initial data size mismatch");
  const SparseMatrix& Q = correctors.Q;
  const SparseMatrix Qt = Q.transpose();
  const SparseMatrix K = corrector_matrix(problem, correctors.config);
  const DenseFactorization coarse(correctors.A_ms + grid.tau * correctors.B_ms);
  const SaddleFactorization fine = global_fine_scale_solver(problem, K);

  traj.coarse.push_back(alpha0);
  traj.states.push_back(Q * alpha0);
  for (int n = 1; n <= grid.steps; ++n) {
    const Vector a_prev = problem.forms.K_A * traj.states.back();
    const Vector rhs = grid.tau * (Qt * assemble_load(problem.pair.fine, f, grid.time(n))) + Qt * a_prev;
    traj.coarse.push_back(coarse.solve(rhs));
    traj.states.push_back(Q * traj.coarse.back() + fine.solve_primal(a_prev));
    check_finite(traj.states.back(), "aux_gfem_solve", n);
  }
  return traj;
}

double discrete_energy(const DiscreteForms& forms, const Vector& u_prev, const Vector& u, double tau) {
  const Vector v = (u - u_prev) / tau;
  return 0.5 * v.dot(forms.M * v) + 0.5 * u.dot(forms.K_B * u);
}

TrajectoryError relative_error(const DiscreteForms& forms, const Trajectory& reference, const Trajectory& approx) {
  require(reference.states.size() == approx.states.size(), "relative_error: trajectory length mismatch");
  require(!reference.states.empty(), "relative_error: empty trajectory");
  double err2 = 0.0, ref2 = 0.0;
  const double tau = reference.grid.tau;
  for (std::size_t n = 1; n < reference.states.size(); ++n) {
    const double e = h1_norm(forms, reference.states[n] - approx.states[n]);
    const double r = h1_norm(forms, reference.states[n]);
    err2 += tau * e * e;
    ref2 += tau * r * r;
  }
  TrajectoryError out;
  const double e_final = h1_norm(forms, reference.states.back() - approx.states.back());
  const double r_final = h1_norm(forms, reference.states.back());
  out.rel_h1_final = r_final > 0.0 ? e_final / r_final : e_final;
  out.rel_l2h1 = ref2 > 0.0 ? std::sqrt(err2 / ref2) : std::sqrt(err2);
  return out;
}

void write_trajectory_csv(std::ostream& os, const DiscreteForms& forms, const Trajectory& trajectory) {
  os << "step,time,l2,h1\n";
  os.precision(17);
  for (std::size_t n = 0; n < trajectory.states.size(); ++n) {
    const NormReport r = norms(forms, trajectory.states[n]);
    os << n << ',' << trajectory.grid.time(static_cast<int>(n)) << ',' << r.l2 << ',' << r.h1 << '\n';
  }
  if (!os) throw Error(ErrorCode::io, "write_trajectory_csv: stream error");
}

void write_final_state_binary(std::ostream& os, const Trajectory& trajectory) {
  require(!trajectory.states.empty(), "write_final_state_binary: empty trajectory");
  const Vector& u = trajectory.states.back();
  const std::int64_t steps = trajectory.grid.steps, size = u.size();
  os.write(reinterpret_cast<const char*>(&steps), sizeof steps);
  os.write(reinterpret_cast<const char*>(&size), sizeof size);
  os.write(reinterpret_cast<const char*>(u.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(size)));
  if (!os) throw Error(ErrorCode::io, "write_final_state_binary: stream error");
}

Vector read_final_state_binary(std::istream& is) {
  std::int64_t steps = 0, size = 0;
  is.read(reinterpret_cast<char*>(&steps), sizeof steps);
  is.read(reinterpret_cast<char*>(&size), sizeof size);
  if (!is || size < 0) throw Error(ErrorCode::io, "read_final_state_binary: bad header");
  Vector u(size);
  is.read(reinterpret_cast<char*>(u.data()), static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(size)));
  if (!is) throw Error(ErrorCode::io, "read_final_state_binary: truncated");
  return u;
}

}  // namespace sdwave

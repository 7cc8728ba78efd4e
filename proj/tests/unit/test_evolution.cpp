#include "evolution.hpp"
#include "error.hpp"
#include "support.hpp"

#include <sstream>

using namespace sdwave;
using sdwave::testing::constant_problem;
using sdwave::testing::random_problem;
using sdwave::testing::random_vector;
using sdwave::testing::rel_diff;

namespace {

double max_state_diff(const Trajectory& a, const Trajectory& b) {
  REQUIRE(a.states.size() == b.states.size());
  double worst = 0.0;
  for (std::size_t n = 0; n < a.states.size(); ++n) worst = std::max(worst, rel_diff(a.states[n], b.states[n]));
  return worst;
}

}  // namespace

TEST_CASE("time grid validation") {
  CHECK_NOTHROW(validate(TimeGrid{0.02, 50}));
  CHECK_THROWS_AS(validate(TimeGrid{0.0, 50}), Error);
  CHECK_THROWS_AS(validate(TimeGrid{0.02, 1}), Error);
  CHECK(TimeGrid{0.02, 50}.final_time() == doctest::Approx(1.0));
}

TEST_CASE("zero data gives the zero trajectory") {
  const Problem p = random_problem(4, 2);
  const Vector z = Vector::Zero(p.fine_dofs());
  const Trajectory t = fine_fem_solve(p, constant_source(0.0), z, z, TimeGrid{0.02, 10});
  REQUIRE(t.states.size() == 11);
  for (const Vector& u : t.states) CHECK(u.norm() == 0.0);
}

TEST_CASE("single dof matches the scalar recurrence") {
  // n = 2, one interior node: M = h^2/2, K = 4 a, F = h^2 f.
  const Problem p = constant_problem(2, 1);
  REQUIRE(p.fine_dofs() == 1);
  const double h = 0.5, tau = 0.1, m = h * h / 2.0, k = 4.0, f = h * h;
  const TimeGrid grid{tau, 400};
  const Vector z = Vector::Zero(1);
  const Trajectory t = fine_fem_solve(p, constant_source(1.0), z, z, grid);
  double u2 = 0.0, u1 = 0.0;
  for (int n = 2; n <= grid.steps; ++n) {
    const double u = (f + m * (2.0 * u1 - u2) / (tau * tau) + k * u1 / tau) / (m / (tau * tau) + k / tau + k);
    u2 = u1;
    u1 = u;
    CHECK(t.states[static_cast<std::size_t>(n)][0] == doctest::Approx(u).epsilon(1e-13));
  }
  CHECK(t.states.back()[0] == doctest::Approx(1.0 / 16.0).epsilon(1e-10));
}

TEST_CASE("discrete energy is non-increasing without a source") {
  const Problem p = random_problem(4, 2, 7);
  const Vector u0 = random_vector(p.fine_dofs(), 1);
  const Vector u1 = u0 + 0.02 * random_vector(p.fine_dofs(), 2);
  const TimeGrid grid{0.02, 60};
  const Trajectory t = fine_fem_solve(p, constant_source(0.0), u0, u1, grid);
  double prev = discrete_energy(p.forms, t.states[0], t.states[1], grid.tau);
  const double tol = 1e-12 * prev;
  for (int n = 2; n <= grid.steps; ++n) {
    const double e = discrete_energy(p.forms, t.states[static_cast<std::size_t>(n - 1)],
                                     t.states[static_cast<std::size_t>(n)], grid.tau);
    CHECK(e <= prev + tol);
    prev = e;
  }
}

TEST_CASE("r = 1 localized method reproduces the fine solve") {
  const Problem p = random_problem(6, 1, 3, 1.0, 1e4);
  const TimeGrid grid{0.02, 20};
  const CorrectorSet set = build_corrector_set(p, CorrectorConfig{2, grid.tau, FormChoice::a_plus_tau_b});
  const TransientCorrectors tr = compute_all_transient_correctors(p, set, grid.steps);
  const Vector a0 = Vector::Zero(p.coarse_dofs());
  const Trajectory loc = localized_gfem_solve(p, set, tr, constant_source(1.0), grid, a0, a0);
  const Trajectory fine = fine_fem_solve(p, constant_source(1.0), a0, a0, grid);
  CHECK(relative_error(p.forms, fine, loc).rel_l2h1 <= 1e-9);
  const Trajectory gal = galerkin_solve(p, p.P, constant_source(1.0), grid, a0, a0, "fem_coarse");
  CHECK(max_state_diff(fine, gal) <= 1e-10);
}

TEST_CASE("saturated localized method equals the ideal method") {
  const Problem p = random_problem(2, 3, 5);
  const TimeGrid grid{0.02, 12};
  const CorrectorSet set =
      build_corrector_set(p, CorrectorConfig{saturation_layers(p.pair.coarse), grid.tau, FormChoice::a_plus_tau_b});
  const TransientCorrectors tr = compute_all_transient_correctors(p, set, grid.steps, 0.0);
  const Vector a0 = Vector::Zero(p.coarse_dofs());
  const Trajectory ideal = ideal_gfem_solve(p, set, constant_source(1.0), grid, a0, a0);
  const Trajectory loc = localized_gfem_solve(p, set, tr, constant_source(1.0), grid, a0, a0);
  const Trajectory direct =
      localized_gfem_solve(p, set, tr, constant_source(1.0), grid, a0, a0, FineScalePath::direct);
  CHECK(max_state_diff(ideal, loc) <= 1e-8);
  CHECK(max_state_diff(direct, loc) <= 1e-9);
}

TEST_CASE("auxiliary splitting is exact without a source") {
  const Problem p = random_problem(4, 2, 9, 1.0, 1e4);
  const TimeGrid grid{0.02, 15};
  const CorrectorSet set =
      build_corrector_set(p, CorrectorConfig{saturation_layers(p.pair.coarse), grid.tau, FormChoice::a_plus_tau_b});
  const Vector alpha0 = random_vector(p.coarse_dofs(), 4);
  const Trajectory ms = aux_gfem_solve(p, set, constant_source(0.0), alpha0, grid);
  const Trajectory fine = aux_fine_solve(p, constant_source(0.0), DenseMatrix(set.Q) * alpha0, grid);
  CHECK(max_state_diff(fine, ms) <= 1e-9);
}

TEST_CASE("ideal method needs saturated correctors") {
  const Problem p = random_problem(4, 2);
  const TimeGrid grid{0.02, 5};
  const CorrectorSet set = build_corrector_set(p, CorrectorConfig{1, grid.tau, FormChoice::a_plus_tau_b});
  const Vector a0 = Vector::Zero(p.coarse_dofs());
  CHECK_THROWS_AS(ideal_gfem_solve(p, set, constant_source(1.0), grid, a0, a0), Error);
}

TEST_CASE("relative error of a trajectory against itself is zero") {
  const Problem p = random_problem(4, 1);
  const Vector z = Vector::Zero(p.fine_dofs());
  const Trajectory t = fine_fem_solve(p, constant_source(1.0), z, z, TimeGrid{0.05, 8});
  const TrajectoryError e = relative_error(p.forms, t, t);
  CHECK(e.rel_h1_final == 0.0);
  CHECK(e.rel_l2h1 == 0.0);
}

TEST_CASE("trajectory output") {
  const Problem p = random_problem(4, 1);
  const Vector z = Vector::Zero(p.fine_dofs());
  const Trajectory t = fine_fem_solve(p, constant_source(1.0), z, z, TimeGrid{0.05, 8});

  std::ostringstream csv;
  write_trajectory_csv(csv, p.forms, t);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "step,time,l2,h1");
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 9);

  std::stringstream bin;
  write_final_state_binary(bin, t);
  const Vector back = read_final_state_binary(bin);
  CHECK((back - t.states.back()).norm() == 0.0);
}

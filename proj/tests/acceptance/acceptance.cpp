// Acceptance run: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria unless --report-only is given.

#include "evolution.hpp"
#include "harness.hpp"
#include "lod.hpp"
#include "rb.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace sdwave;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Vector random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double b = slope(x, y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fit = my + b * (x[i] - mx);
    ss_res += (y[i] - fit) * (y[i] - fit);
    ss_tot += (y[i] - my) * (y[i] - my);
  }
  return ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
}

double rel(const Vector& a, const Vector& ref) {
  const double s = ref.norm();
  return s == 0.0 ? (a - ref).norm() : (a - ref).norm() / s;
}

int central_dof(const Mesh& coarse) { return coarse.dof_of_vertex[coarse.vertex(coarse.n / 2, coarse.n / 2)]; }

ExperimentConfig desk(ExperimentKind kind) { return resolve_config(kind, nlohmann::json::object()); }

// exp-H results are shared with the reduced-basis criterion.
double gfem_error_finest_H = -1.0;

Outcome oracle_collapse() {
  const Problem p = make_random_problem(3, 3, 1, 0.1, 1000.0, CoefficientLaw::log_uniform, 0);
  const TimeGrid grid{0.02, 25};
  const CorrectorSet set = build_corrector_set(p, CorrectorConfig{3, grid.tau, FormChoice::a_plus_tau_b});
  const TransientCorrectors tr = compute_all_transient_correctors(p, set, grid.steps);
  const Vector z = Vector::Zero(p.coarse_dofs());
  const SourceFunction f = constant_source(1.0);
  const Trajectory fine = fine_fem_solve(p, f, z, z, grid);
  const Trajectory loc = localized_gfem_solve(p, set, tr, f, grid, z, z);
  const double gap = relative_error(p.forms, fine, loc).rel_l2h1;
  return {gap <= 1e-8, fmt("L2(H1) gap %.3g", gap)};
}

Outcome aux_exactness() {
  const Problem p = make_random_problem(6, 4, 1, 0.1, 1000.0, CoefficientLaw::log_uniform, 0);
  const TimeGrid grid{0.02, 25};
  const CorrectorSet set =
      build_corrector_set(p, CorrectorConfig{saturation_layers(p.pair.coarse), grid.tau, FormChoice::a_plus_tau_b});
  const Vector alpha0 = random_vector(p.coarse_dofs(), 1);
  const SourceFunction f = constant_source(0.0);
  const Trajectory ms = aux_gfem_solve(p, set, f, alpha0, grid);
  const Trajectory fine = aux_fine_solve(p, f, project_initial_data(set, alpha0), grid);
  double worst = 0.0;
  for (std::size_t n = 0; n < fine.states.size(); ++n) worst = std::max(worst, rel(ms.states[n], fine.states[n]));
  return {worst <= 1e-9, fmt("max per-step gap %.3g", worst)};
}

Outcome superposition_identity() {
  const Problem p = make_random_problem(5, 3, 1, 0.1, 1000.0, CoefficientLaw::log_uniform, 0);
  const int steps = 25;
  const CorrectorSet set = build_corrector_set(p, CorrectorConfig{3, 0.02, FormChoice::a_plus_tau_b});
  const TransientCorrectors tr = compute_all_transient_correctors(p, set, steps, 0.0);
  std::vector<Vector> alpha;
  for (int m = 0; m <= steps; ++m) alpha.push_back(random_vector(p.coarse_dofs(), 100 + m));
  const std::vector<Vector> direct = direct_fine_scale_history(p, set, alpha, steps);
  double worst = 0.0;
  for (int n = 2; n <= steps; ++n)
    worst = std::max(worst, rel(superpose(tr, alpha, n, p.fine_dofs()), direct[static_cast<std::size_t>(n)]));
  return {worst <= 1e-9, fmt("max per-step gap %.3g", worst)};
}

Outcome localization_decay() {
  const ErrorReport r = run_exp_k(desk(ExperimentKind::exp_k));
  std::vector<double> k, logerr;
  bool decreasing = true;
  std::string values;
  for (const ErrorRow& row : r.rows) {
    if (!logerr.empty() && std::log(row.rel_h1_final) >= logerr.back()) decreasing = false;
    k.push_back(row.param);
    logerr.push_back(std::log(row.rel_h1_final));
    values += fmt(" %.3g", row.rel_h1_final);
  }
  const double s = slope(k, logerr);
  return {k.size() == 5 && decreasing && s <= -0.3, fmt("errors k=2..6:%s, slope %.3f", values.c_str(), s)};
}

Outcome h_convergence() {
  const ErrorReport r = run_exp_H(desk(ExperimentKind::exp_H));
  std::vector<double> logH, logerr;
  double finest_param = 1e300;
  struct Range {
    std::string method;
    double lo = 1e300, hi = 0.0;
  };
  std::vector<Range> plateaus{{"fem_coarse"}, {"lod_a"}, {"lod_b"}};
  for (const ErrorRow& row : r.rows) {
    if (row.method == "gfem") {
      logH.push_back(std::log(row.param));
      logerr.push_back(std::log(row.rel_h1_final));
      if (row.param < finest_param) {
        finest_param = row.param;
        gfem_error_finest_H = row.rel_h1_final;
      }
    }
    for (Range& pr : plateaus)
      if (row.method == pr.method) {
        pr.lo = std::min(pr.lo, row.rel_h1_final);
        pr.hi = std::max(pr.hi, row.rel_h1_final);
      }
  }
  const double rate = slope(logH, logerr);
  bool flat = true;
  std::string ratios;
  for (const Range& pr : plateaus) {
    const double q = pr.hi / pr.lo;
    flat = flat && q <= 3.0;
    ratios += fmt(" %s %.2f", pr.method.c_str(), q);
  }
  std::string values;
  for (double e : logerr) values += fmt(" %.3g", std::exp(e));
  return {logH.size() == 4 && rate >= 1.0 && flat,
          fmt("gfem errors H=1/4..1/32:%s, rate %.3f; max/min ratios:%s", values.c_str(), rate, ratios.c_str())};
}

Outcome rb_compression() {
  ExperimentConfig c = desk(ExperimentKind::exp_rb);
  const int N = c.steps();
  c.M = {1, 10, N};
  const ErrorReport r = run_exp_rb(c);
  double g1 = -1, g10 = -1, gN = -1;
  for (const ErrorRow& row : r.rows) {
    if (row.method != "gfem_rb") continue;
    if (row.param == 1) g1 = row.rel_h1_final;
    if (row.param == 10) g10 = row.rel_h1_final;
    if (row.param == N) gN = row.rel_h1_final;
  }
  const bool have_ref = gfem_error_finest_H > 0.0;
  const bool pass = gN >= 0.0 && gN <= 1e-12 && g10 < g1 && have_ref && g10 < gfem_error_finest_H;
  return {pass, fmt("gap M=1 %.3g, M=10 %.3g, M=%d %.3g; GFEM error at H=1/32 %.3g", g1, g10, N, gN,
                    gfem_error_finest_H)};
}

Outcome snapshot_spectrum() {
  const Problem p = make_random_problem(6, 4, 1, 0.1, 1000.0, CoefficientLaw::log_uniform, 0);
  const CorrectorSet set = build_corrector_set(p, CorrectorConfig{4, 0.02, FormChoice::a_plus_tau_b});
  const int x = central_dof(p.pair.coarse);
  const NodeTransient node = compute_transient_correctors(p, set, x, 100, 0.0);
  const PatchSystem sys = make_patch_system(p, 0.02, node.dofs);
  const Vector s = snapshot_singular_values(node.xi, sys.K_tilde);
  double worst = 0.0;
  for (Index j = 29; j < s.size(); ++j) worst = std::max(worst, s[j] / s[0]);
  const bool enough = node.xi.size() == 100;
  return {enough && worst <= 1e-10,
          fmt("%zu snapshots, max sigma_j/sigma_1 for j>=30: %.3g", node.xi.size(), worst)};
}

Outcome energy_dissipation() {
  const Problem p = make_random_problem(6, 4, 1, 0.1, 1000.0, CoefficientLaw::log_uniform, 0);
  const TimeGrid grid{0.02, 100};
  const Vector u0 = random_vector(p.fine_dofs(), 11);
  const Vector u1 = u0 + grid.tau * random_vector(p.fine_dofs(), 12);
  const Trajectory t = fine_fem_solve(p, constant_source(0.0), u0, u1, grid);
  const double e1 = discrete_energy(p.forms, t.states[0], t.states[1], grid.tau);
  double prev = e1, worst = -1e300;
  for (int n = 2; n <= grid.steps; ++n) {
    const double e = discrete_energy(p.forms, t.states[static_cast<std::size_t>(n - 1)],
                                     t.states[static_cast<std::size_t>(n)], grid.tau);
    worst = std::max(worst, e - prev);
    prev = e;
  }
  return {worst <= 1e-12 * e1, fmt("E^1 %.4g, largest increase %.3g", e1, worst)};
}

Outcome decay_profiles() {
  const Problem p = make_random_problem(6, 4, 1, 0.1, 1000.0, CoefficientLaw::log_uniform, 0);
  const Mesh& coarse = p.pair.coarse;
  const CorrectorConfig config{saturation_layers(coarse), 0.02, FormChoice::a_plus_tau_b};
  const int x = central_dof(coarse);
  const int vertex = coarse.interior_nodes[static_cast<std::size_t>(x)];
  const Vector phi = global_corrector(p, config, x);
  const SaddleFactorization fine = global_fine_scale_solver(p, corrector_matrix(p, config));
  const Vector hat = p.P * Vector::Unit(p.coarse_dofs(), x);
  const Vector xi1 = fine.solve_primal(p.forms.K_A * (hat - phi));

  bool pass = true;
  std::string detail;
  for (const auto& [name, v] : {std::pair<const char*, const Vector*>{"phi", &phi}, {"xi1", &xi1}}) {
    std::vector<double> j, logv;
    for (const auto& [layer, value] : decay_profile(p.pair, *v, vertex))
      if (value > 1e-12) {
        j.push_back(layer);
        logv.push_back(std::log(value));
      }
    const bool fit = j.size() >= 3;
    const double s = fit ? slope(j, logv) : 0.0;
    const double r2 = fit ? r_squared(j, logv) : 0.0;
    pass = pass && fit && s < 0.0 && r2 >= 0.9;
    detail += fmt("%s%s: %zu layers, slope %.3f, R^2 %.3f", detail.empty() ? "" : "; ", name, j.size(), s, r2);
  }
  return {pass, detail};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  bool report_only = false;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--report-only") == 0)
      report_only = true;
    else
      only.push_back(std::atoi(argv[i]));
  }

  const std::vector<Criterion> criteria{
      {1, "oracle collapse", 10, oracle_collapse},
      {2, "auxiliary exactness", 10, aux_exactness},
      {3, "superposition identity", 30, superposition_identity},
      {4, "localization decay", 600, localization_decay},
      {5, "H-convergence", 1200, h_convergence},
      {6, "RB compression", 900, rb_compression},
      {7, "snapshot spectrum", 120, snapshot_spectrum},
      {8, "energy dissipation", 60, energy_dissipation},
      {9, "corrector decay profiles", 120, decay_profiles},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %d %s: %s (%.1f s, limit %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.limit_s, in_time ? "" : ", too slow");
    std::fflush(stdout);
  }
  std::printf("%d failed\n", failed);
  return report_only ? 0 : failed;
}

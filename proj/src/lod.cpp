#include "lod.hpp"

#include "error.hpp"
#include "parallel.hpp"

#include <cmath>
#include <memory>
#include <mutex>

namespace sdwave {

void validate(const CorrectorConfig& config) {
  require(config.k >= 1, "corrector config: k must be >= 1");
  require(config.tau > 0.0 && std::isfinite(config.tau), "corrector config: tau must be > 0");
}

SparseMatrix corrector_matrix(const Problem& problem, const CorrectorConfig& config) {
  switch (config.form) {
    case FormChoice::a_only:
      return problem.forms.K_A;
    case FormChoice::b_only:
      return problem.forms.K_B;
    case FormChoice::a_plus_tau_b:
      break;
  }
  return problem.forms.K_A + config.tau * problem.forms.K_B;
}

CoefficientField corrector_field(const Problem& problem, const CorrectorConfig& config) {
  switch (config.form) {
    case FormChoice::a_only:
      return problem.A;
    case FormChoice::b_only:
      return problem.B;
    case FormChoice::a_plus_tau_b:
      break;
  }
  return problem.A.axpy(config.tau, problem.B);
}

namespace {

/// Shared pieces of the corrector computation for one config.
struct CorrectorContext {
  const Problem& problem;
  CorrectorConfig config;
  SparseMatrix K;
  CoefficientField field;
  std::once_flag global_once;
  std::unique_ptr<SaddleFactorization> global;

  CorrectorContext(const Problem& p, const CorrectorConfig& c)
      : problem(p), config(c), K(corrector_matrix(p, c)), field(corrector_field(p, c)) {}

  const SaddleFactorization& global_solver() {
    std::call_once(global_once, [&] {
      global = std::make_unique<SaddleFactorization>(global_fine_scale_solver(problem, K));
    });
    return *global;
  }
};

ElementCorrectors element_correctors(CorrectorContext& ctx, int T) {
  const Problem& problem = ctx.problem;
  const Mesh& coarse = problem.pair.coarse;
  ElementCorrectors out;
  out.element = T;
  const auto& tri = coarse.triangles[static_cast<std::size_t>(T)];
  for (std::size_t i = 0; i < 3; ++i) out.coarse_dofs[i] = coarse.dof_of_vertex[static_cast<std::size_t>(tri[i])];

  const std::vector<int> patch = element_patch(coarse, T, ctx.config.k);
  const bool full = static_cast<int>(patch.size()) == coarse.num_elements();
  out.dofs = patch_fine_dofs(problem.pair, patch);
  if (out.dofs.empty()) {
    for (auto& v : out.values) v = Vector();
    return out;
  }

  std::unique_ptr<SaddleFactorization> local;
  const SaddleFactorization* solver = nullptr;
  if (full) {
    solver = &ctx.global_solver();
  } else {
    const SparseMatrix K_patch = restrict_matrix(ctx.K, out.dofs, out.dofs);
    const KernelConstraints constraints = kernel_constraints(problem.interp, out.dofs);
    local = std::make_unique<SaddleFactorization>(K_patch, constraints.C);
    solver = local.get();
  }

  for (std::size_t i = 0; i < 3; ++i) {
    if (out.coarse_dofs[i] < 0) continue;
    const Vector hat = problem.P.col(out.coarse_dofs[i]);
    const Vector rhs = element_rhs(problem.pair, ctx.field, T, hat);
    out.values[i] = solver->solve_primal(gather(rhs, out.dofs));
  }
  return out;
}

}  // namespace

ElementCorrectors compute_element_correctors(const Problem& problem, int coarse_element,
                                             const CorrectorConfig& config) {
  validate(config);
  require(coarse_element >= 0 && coarse_element < problem.pair.coarse.num_elements(),
          "compute_element_correctors: element out of range");
  CorrectorContext ctx(problem, config);
  return element_correctors(ctx, coarse_element);
}

SaddleFactorization global_fine_scale_solver(const Problem& problem, const SparseMatrix& K) {
  return SaddleFactorization(K, problem.interp.matrix);
}

Vector global_corrector(const Problem& problem, const CorrectorConfig& config, int coarse_dof) {
  validate(config);
  const SparseMatrix K = corrector_matrix(problem, config);
  const Vector hat = problem.P.col(coarse_dof);
  return global_fine_scale_solver(problem, K).solve_primal(K * hat);
}

CorrectorSet make_corrector_set(const Problem& problem, const CorrectorConfig& config, SparseMatrix Phi) {
  CorrectorSet set;
  set.config = config;
  set.Phi = std::move(Phi);
  set.Phi.makeCompressed();
  set.Q = problem.P - set.Phi;
  set.Q.makeCompressed();
  const SparseMatrix Qt = set.Q.transpose();
  set.M_ms = DenseMatrix(Qt * (problem.forms.M * set.Q));
  set.A_ms = DenseMatrix(Qt * (problem.forms.K_A * set.Q));
  set.B_ms = DenseMatrix(Qt * (problem.forms.K_B * set.Q));
  return set;
}

CorrectorSet build_corrector_set(const Problem& problem, const CorrectorConfig& config) {
  validate(config);
  CorrectorContext ctx(problem, config);
  const int n_elements = problem.pair.coarse.num_elements();
  std::vector<ElementCorrectors> parts(static_cast<std::size_t>(n_elements));
  parallel_for(n_elements, [&](int T) { parts[static_cast<std::size_t>(T)] = element_correctors(ctx, T); });

  std::vector<Triplet> entries;
  for (const auto& part : parts) {
    for (std::size_t i = 0; i < 3; ++i) {
      if (part.coarse_dofs[i] < 0 || part.values[i].size() == 0) continue;
      for (std::size_t j = 0; j < part.dofs.size(); ++j)
        entries.emplace_back(part.dofs[j], part.coarse_dofs[i], part.values[i][static_cast<Index>(j)]);
    }
  }
  SparseMatrix Phi(problem.fine_dofs(), problem.coarse_dofs());
  Phi.setFromTriplets(entries.begin(), entries.end());
  return make_corrector_set(problem, config, std::move(Phi));
}

PatchSystem make_patch_system(const Problem& problem, double tau, std::vector<int> dofs) {
  PatchSystem sys;
  sys.dofs = std::move(dofs);
  sys.K_A = restrict_matrix(problem.forms.K_A, sys.dofs, sys.dofs);
  const SparseMatrix K_B = restrict_matrix(problem.forms.K_B, sys.dofs, sys.dofs);
  sys.K_tilde = sys.K_A + tau * K_B;
  sys.H1 = restrict_matrix(problem.forms.K_1, sys.dofs, sys.dofs) +
           restrict_matrix(problem.forms.M, sys.dofs, sys.dofs);
  if (!sys.dofs.empty()) sys.constraints = kernel_constraints(problem.interp, sys.dofs);
  return sys;
}

std::vector<int> node_patch_dofs(const Problem& problem, int coarse_dof, int k) {
  const Mesh& coarse = problem.pair.coarse;
  require(coarse_dof >= 0 && coarse_dof < coarse.num_dofs(), "coarse dof out of range");
  const int vertex = coarse.interior_nodes[static_cast<std::size_t>(coarse_dof)];
  return patch_fine_dofs(problem.pair, node_patch(coarse, vertex, k));
}

NodeTransient compute_transient_correctors(const Problem& problem, const CorrectorSet& correctors,
                                           int coarse_dof, int horizon, double stop_tol) {
  const CorrectorConfig& config = correctors.config;
  validate(config);
  require(config.form == FormChoice::a_plus_tau_b,
          "transient correctors require correctors built with a + tau b");
  require(horizon >= 0, "transient correctors: horizon must be >= 0");
  require(stop_tol >= 0.0, "transient correctors: stop_tol must be >= 0");

  NodeTransient out;
  out.coarse_dof = coarse_dof;
  out.dofs = node_patch_dofs(problem, coarse_dof, config.k);
  if (out.dofs.empty() || horizon == 0) return out;

  const PatchSystem sys = make_patch_system(problem, config.tau, out.dofs);
  const SaddleFactorization solver(sys.K_tilde, sys.constraints.C);
  const Vector q = correctors.basis(coarse_dof);
  const Vector first_rhs = gather(problem.forms.K_A * q, out.dofs);

  auto h1 = [&](const Vector& v) { return std::sqrt(std::max(0.0, v.dot(sys.H1 * v))); };

  Vector xi = solver.solve_primal(first_rhs);
  const double first_norm = h1(xi);
  if (!(first_norm > 0.0)) return out;
  out.xi.push_back(xi);
  for (int l = 2; l <= horizon; ++l) {
    xi = solver.solve_primal(sys.K_A * out.xi.back());
    if (h1(xi) <= stop_tol * first_norm) break;
    out.xi.push_back(xi);
  }
  return out;
}

TransientCorrectors compute_all_transient_correctors(const Problem& problem, const CorrectorSet& correctors,
                                                     int horizon, double stop_tol) {
  TransientCorrectors out;
  out.config = correctors.config;
  out.horizon = horizon;
  out.stop_tol = stop_tol;
  const int n = problem.coarse_dofs();
  out.nodes.resize(static_cast<std::size_t>(n));
  parallel_for(n, [&](int x) {
    out.nodes[static_cast<std::size_t>(x)] = compute_transient_correctors(problem, correctors, x, horizon, stop_tol);
  });
  return out;
}

Vector superpose(const TransientCorrectors& transient, std::span<const Vector> alpha, int n, int fine_dofs) {
  require(n >= 0 && static_cast<int>(alpha.size()) >= n, "superpose: alpha history too short");
  Vector w = Vector::Zero(fine_dofs);
  for (const NodeTransient& node : transient.nodes) {
    const int terms = std::min(n - 1, static_cast<int>(node.xi.size()));
    if (terms <= 0) continue;
    Vector local = Vector::Zero(static_cast<Index>(node.dofs.size()));
    for (int l = 1; l <= terms; ++l)
      local += alpha[static_cast<std::size_t>(n - l)][node.coarse_dof] * node.xi[static_cast<std::size_t>(l - 1)];
    scatter_add(w, node.dofs, local);
  }
  return w;
}

DirectFineScaleStepper::DirectFineScaleStepper(const Problem& problem, const CorrectorSet& correctors)
    : fine_dofs_(problem.fine_dofs()) {
  const CorrectorConfig& config = correctors.config;
  validate(config);
  const int n = problem.coarse_dofs();
  nodes_.resize(static_cast<std::size_t>(n));
  parallel_for(n, [&](int x) {
    NodeState& node = nodes_[static_cast<std::size_t>(x)];
    node.system = make_patch_system(problem, config.tau, node_patch_dofs(problem, x, config.k));
    if (node.system.dofs.empty()) return;
    node.solver = std::make_unique<SaddleFactorization>(node.system.K_tilde, node.system.constraints.C);
    node.load = gather(problem.forms.K_A * correctors.basis(x), node.system.dofs);
    node.w = Vector::Zero(static_cast<Index>(node.system.dofs.size()));
  });
}

Vector DirectFineScaleStepper::step(const Vector& alpha_prev) {
  require(alpha_prev.size() == static_cast<Index>(nodes_.size()), "direct stepper: coefficient size mismatch");
  Vector w = Vector::Zero(fine_dofs_);
  for (std::size_t x = 0; x < nodes_.size(); ++x) {
    NodeState& node = nodes_[x];
    if (!node.solver) continue;
    node.w = node.solver->solve_primal(node.system.K_A * node.w + alpha_prev[static_cast<Index>(x)] * node.load);
    scatter_add(w, node.system.dofs, node.w);
  }
  return w;
}

std::vector<Vector> direct_fine_scale_history(const Problem& problem, const CorrectorSet& correctors,
                                              std::span<const Vector> alpha, int steps) {
  require(steps >= 0 && static_cast<int>(alpha.size()) >= steps, "direct history: alpha history too short");
  std::vector<Vector> history(static_cast<std::size_t>(steps) + 1, Vector::Zero(problem.fine_dofs()));
  DirectFineScaleStepper stepper(problem, correctors);
  for (int n = 2; n <= steps; ++n) history[static_cast<std::size_t>(n)] = stepper.step(alpha[static_cast<std::size_t>(n - 1)]);
  return history;
}

std::vector<std::pair<int, double>> decay_profile(const NestedMeshPair& pair, const Vector& v, int coarse_vertex) {
  const Mesh& fine = pair.fine;
  const Mesh& coarse = pair.coarse;
  require(v.size() == fine.num_dofs(), "decay_profile: vector size mismatch");

  std::vector<double> energy(static_cast<std::size_t>(coarse.num_elements()), 0.0);
  for (int e = 0; e < fine.num_elements(); ++e) {
    const auto& t = fine.triangles[static_cast<std::size_t>(e)];
    const auto g = hat_gradients(fine, e);
    std::array<double, 3> val{};
    for (std::size_t i = 0; i < 3; ++i) {
      const int d = fine.dof_of_vertex[static_cast<std::size_t>(t[i])];
      val[i] = d >= 0 ? v[d] : 0.0;
    }
    const double area = fine.area(e);
    const double gx = val[0] * g[0][0] + val[1] * g[1][0] + val[2] * g[2][0];
    const double gy = val[0] * g[0][1] + val[1] * g[1][1] + val[2] * g[2][1];
    double mass = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) mass += val[i] * val[j] * (i == j ? 2.0 : 1.0);
    energy[static_cast<std::size_t>(pair.parent[static_cast<std::size_t>(e)])] +=
        area * (gx * gx + gy * gy) + area / 12.0 * mass;
  }

  std::vector<std::pair<int, double>> profile;
  for (int j = 1;; ++j) {
    const std::vector<int> patch = node_patch(coarse, coarse_vertex, j);
    std::vector<char> inside(energy.size(), 0);
    for (int T : patch) inside[static_cast<std::size_t>(T)] = 1;
    double sum = 0.0;
    for (std::size_t T = 0; T < energy.size(); ++T)
      if (!inside[T]) sum += energy[T];
    profile.emplace_back(j, std::sqrt(std::max(0.0, sum)));
    if (static_cast<int>(patch.size()) == coarse.num_elements()) break;
  }
  return profile;
}

Vector project_initial_data(const CorrectorSet& correctors, const Vector& u_coarse) {
  require(u_coarse.size() == correctors.Q.cols(), "project_initial_data: size mismatch");
  return correctors.Q * u_coarse;
}

}  // namespace sdwave

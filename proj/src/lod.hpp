#pragma once

// Fine-scale correctors: element-restricted Ritz projections on coarse
// patches, the multiscale basis Q = P - Phi, transient correctors xi and
// their superposition, decay diagnostics and initial-data projection.

#include "linalg.hpp"
#include "problem.hpp"

#include <array>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace sdwave {

enum class FormChoice {
  /// a(.,.) + tau b(.,.)
  a_plus_tau_b,
  a_only,
  b_only,
};

struct CorrectorConfig {
  int k = 1;
  double tau = 0.02;
  FormChoice form = FormChoice::a_plus_tau_b;
};

void validate(const CorrectorConfig& config);

/// Stiffness matrix of the inner product selected by the config.
SparseMatrix corrector_matrix(const Problem& problem, const CorrectorConfig& config);
CoefficientField corrector_field(const Problem& problem, const CorrectorConfig& config);

/// Corrector contributions R^T_{f,k} lambda_x for the three vertices of T,
/// stored on the fine dofs of the patch N^k(T).
struct ElementCorrectors {
  int element = -1;
  std::vector<int> dofs;
  /// Coarse dof of each vertex of T, -1 on the boundary.
  std::array<int, 3> coarse_dofs{-1, -1, -1};
  std::array<Vector, 3> values;
};

ElementCorrectors compute_element_correctors(const Problem& problem, int coarse_element,
                                             const CorrectorConfig& config);

struct CorrectorSet {
  CorrectorConfig config;
  /// Fine dofs x coarse dofs; column x is phi_{x,k}.
  SparseMatrix Phi;
  /// P - Phi; column x is lambda_x - phi_{x,k}.
  SparseMatrix Q;
  DenseMatrix M_ms;
  DenseMatrix A_ms;
  DenseMatrix B_ms;

  Vector phi(int coarse_dof) const { return Vector(Phi.col(coarse_dof)); }
  Vector basis(int coarse_dof) const { return Vector(Q.col(coarse_dof)); }
  bool saturated(const Problem& problem) const { return config.k >= saturation_layers(problem.pair.coarse); }
};

CorrectorSet build_corrector_set(const Problem& problem, const CorrectorConfig& config);

/// Assembles Q and the coarse matrices from a given Phi.
CorrectorSet make_corrector_set(const Problem& problem, const CorrectorConfig& config, SparseMatrix Phi);

/// Global corrector of coarse dof x from one saddle solve over all fine
/// dofs with the full constraint I_H w = 0. Used as an oracle.
Vector global_corrector(const Problem& problem, const CorrectorConfig& config, int coarse_dof);

/// Saddle factorization over all fine dofs of the config's inner product
/// with constraint I_H w = 0.
SaddleFactorization global_fine_scale_solver(const Problem& problem, const SparseMatrix& K);

/// Transient correctors xi^1..xi^L of one coarse node on the patch N^k(x).
struct NodeTransient {
  int coarse_dof = -1;
  std::vector<int> dofs;
  std::vector<Vector> xi;
};

struct TransientCorrectors {
  CorrectorConfig config;
  int horizon = 0;
  double stop_tol = 1e-12;
  /// Indexed by coarse dof.
  std::vector<NodeTransient> nodes;
};

/// Matrices of the a~ = a + tau b and a forms restricted to a patch, and
/// the kernel constraint on it.
struct PatchSystem {
  std::vector<int> dofs;
  SparseMatrix K_tilde;
  SparseMatrix K_A;
  SparseMatrix H1;
  KernelConstraints constraints;
};

PatchSystem make_patch_system(const Problem& problem, double tau, std::vector<int> dofs);

/// Fine dofs of N^k(x) for a coarse dof x.
std::vector<int> node_patch_dofs(const Problem& problem, int coarse_dof, int k);

NodeTransient compute_transient_correctors(const Problem& problem, const CorrectorSet& correctors,
                                           int coarse_dof, int horizon, double stop_tol = 1e-12);

TransientCorrectors compute_all_transient_correctors(const Problem& problem, const CorrectorSet& correctors,
                                                     int horizon, double stop_tol = 1e-12);

/// w^n = sum_x sum_{l=1}^{n-1} alpha_x^{n-l} xi^l_x, with alpha[m] the coarse
/// coefficients at step m (w^0 = w^1 = 0).
Vector superpose(const TransientCorrectors& transient, std::span<const Vector> alpha, int n, int fine_dofs);

/// Steps the localized fine-scale part node by node with direct patch
/// solves: a~(w^n_x, z) = a(w^{n-1}_x, z) + alpha_x^{n-1} a(lambda_x - phi_x, z)
/// for z in the fine-scale functions on N^k(x). Starts from w^1 = 0.
class DirectFineScaleStepper {
 public:
  DirectFineScaleStepper(const Problem& problem, const CorrectorSet& correctors);

  /// Advances one step given the previous coarse coefficients alpha^{n-1}
  /// and returns w^n summed over nodes.
  Vector step(const Vector& alpha_prev);

 private:
  struct NodeState {
    PatchSystem system;
    std::unique_ptr<SaddleFactorization> solver;
    Vector load;
    Vector w;
  };
  int fine_dofs_ = 0;
  std::vector<NodeState> nodes_;
};

/// Reference path for the superposition: per node, steps
/// a~(w^n_x, z) = a(w^{n-1}_x, z) + alpha_x^{n-1} a(lambda_x - phi_x, z) on
/// N^k(x) directly. Returns w^0..w^N (summed over nodes).
std::vector<Vector> direct_fine_scale_history(const Problem& problem, const CorrectorSet& correctors,
                                              std::span<const Vector> alpha, int steps);

/// (j, ||v||_{H1(Omega \ N^j(x))}) for j = 1.. until the patch saturates.
std::vector<std::pair<int, double>> decay_profile(const NestedMeshPair& pair, const Vector& v, int coarse_vertex);

/// Q u: the multiscale function with coarse coefficients u.
Vector project_initial_data(const CorrectorSet& correctors, const Vector& u_coarse);

}  // namespace sdwave

#include "interpolation.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>

namespace sdwave {

Interpolator build_interpolator(const NestedMeshPair& pair) {
  const Mesh& coarse = pair.coarse;
  const Mesh& fine = pair.fine;

  // Inverse of the P1 element mass matrix is (3/|K|) [[3,-1,-1],[-1,3,-1],[-1,-1,3]].
  std::vector<Triplet> entries;
  for (int K = 0; K < coarse.num_elements(); ++K) {
    const auto& ct = coarse.triangles[static_cast<std::size_t>(K)];
    std::array<int, 3> cdof{};
    bool any = false;
    for (std::size_t i = 0; i < 3; ++i) {
      cdof[i] = coarse.dof_of_vertex[static_cast<std::size_t>(ct[i])];
      any = any || cdof[i] >= 0;
    }
    if (!any) continue;
    const double inv_area = 3.0 / coarse.area(K);

    for (int e : pair.children_of(K)) {
      const auto& ft = fine.triangles[static_cast<std::size_t>(e)];
      // lambda_j^K at the three fine vertices.
      std::array<std::array<double, 3>, 3> lam{};
      for (std::size_t b = 0; b < 3; ++b) {
        const auto bc = barycentric(coarse, K, fine.vertices[static_cast<std::size_t>(ft[b])]);
        for (std::size_t j = 0; j < 3; ++j) lam[j][b] = bc[j];
      }
      const double s = fine.area(e) / 12.0;
      for (std::size_t a = 0; a < 3; ++a) {
        const int fd = fine.dof_of_vertex[static_cast<std::size_t>(ft[a])];
        if (fd < 0) continue;
        // Moments m_j = int_e phi_a lambda_j.
        std::array<double, 3> moment{};
        for (std::size_t j = 0; j < 3; ++j) moment[j] = s * (lam[j][0] + lam[j][1] + lam[j][2] + lam[j][a]);
        for (std::size_t i = 0; i < 3; ++i) {
          if (cdof[i] < 0) continue;
          double c = 0.0;
          for (std::size_t j = 0; j < 3; ++j) c += (i == j ? 3.0 : -1.0) * moment[j];
          const double card = static_cast<double>(coarse.elements_of_vertex(ct[i]).size());
          entries.emplace_back(cdof[i], fd, inv_area * c / card);
        }
      }
    }
  }

  SparseMatrix I(coarse.num_dofs(), fine.num_dofs());
  I.setFromTriplets(entries.begin(), entries.end());

  // Drop round-off residue from exact cancellations.
  std::vector<double> row_max(static_cast<std::size_t>(I.rows()), 0.0);
  for (Index k = 0; k < I.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(I, k); it; ++it)
      row_max[static_cast<std::size_t>(it.row())] = std::max(row_max[static_cast<std::size_t>(it.row())], std::abs(it.value()));
  I.prune([&](Index row, Index, double value) {
    return std::abs(value) > 1e-13 * row_max[static_cast<std::size_t>(row)];
  });
  I.makeCompressed();
  return Interpolator{std::move(I)};
}

KernelConstraints kernel_constraints(const Interpolator& interp, std::span<const int> patch_dofs) {
  require(!patch_dofs.empty(), "kernel_constraints: empty patch");
  const SparseMatrix& I = interp.matrix;
  std::vector<char> used(static_cast<std::size_t>(I.rows()), 0);
  for (int d : patch_dofs)
    for (SparseMatrix::InnerIterator it(I, d); it; ++it)
      if (it.value() != 0.0) used[static_cast<std::size_t>(it.row())] = 1;

  KernelConstraints out;
  for (int r = 0; r < static_cast<int>(I.rows()); ++r)
    if (used[static_cast<std::size_t>(r)]) out.coarse_rows.push_back(r);
  out.C = restrict_matrix(I, out.coarse_rows, patch_dofs);
  out.C.makeCompressed();
  return out;
}

}  // namespace sdwave

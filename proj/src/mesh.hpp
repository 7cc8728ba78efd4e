#pragma once

// Uniform criss-cross triangulations of the unit square, nested pairs and
// coarse-grid patches.

#include "linalg.hpp"

#include <array>
#include <vector>

namespace sdwave {

using Point = std::array<double, 2>;

/// Uniform mesh of [0,1]^2 with n cells per side. Each cell (i, j) is split
/// along its lower-left to upper-right diagonal into triangle 2(i + j n)
/// (below the diagonal) and 2(i + j n) + 1 (above). Vertex (i, j) has index
/// i + j (n + 1).
struct Mesh {
  int n = 0;
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  /// Vertex index of each interior dof, in dof order.
  std::vector<int> interior_nodes;
  /// Dof index of each vertex, -1 for vertices on the boundary.
  std::vector<int> dof_of_vertex;
  /// Elements incident to each vertex (CSR).
  std::vector<int> vertex_element_offsets;
  std::vector<int> vertex_elements;
  double shape_regularity = 0.0;

  double width() const { return 1.0 / n; }
  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_elements() const { return static_cast<int>(triangles.size()); }
  int num_dofs() const { return static_cast<int>(interior_nodes.size()); }
  int vertex(int i, int j) const { return i + j * (n + 1); }
  double area(int element) const;
  std::span<const int> elements_of_vertex(int v) const;
};

Mesh build_uniform_mesh(int n);

struct NestedMeshPair {
  Mesh coarse;
  Mesh fine;
  int ratio = 1;
  /// Coarse parent of each fine element.
  std::vector<int> parent;
  /// Fine children of each coarse element (CSR).
  std::vector<int> child_offsets;
  std::vector<int> children;

  std::span<const int> children_of(int coarse_element) const;
};

NestedMeshPair refine(const Mesh& coarse, int r);

/// k layers of coarse elements around element T (sorted).
std::vector<int> element_patch(const Mesh& mesh, int element, int k);

/// k layers of coarse elements around vertex x (sorted). x is a vertex index.
std::vector<int> node_patch(const Mesh& mesh, int vertex, int k);

/// Smallest k for which every element patch and every interior node patch
/// is the whole mesh. Larger than n on the criss-cross mesh, where growth
/// against the diagonal direction is slower.
int saturation_layers(const Mesh& mesh);

/// Fine dofs whose support lies inside the union of the given coarse
/// elements (all incident fine elements have their parent in the set).
std::vector<int> patch_fine_dofs(const NestedMeshPair& pair, std::span<const int> coarse_elements);

/// Coarse hat functions sampled at fine nodes: rows are fine interior dofs,
/// columns coarse interior dofs.
SparseMatrix prolongation(const NestedMeshPair& pair);

/// Barycentric coordinates of p with respect to triangle `element`.
std::array<double, 3> barycentric(const Mesh& mesh, int element, const Point& p);

}  // namespace sdwave

#include "mesh.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>

namespace sdwave {

double Mesh::area(int element) const {
  const auto& t = triangles[static_cast<std::size_t>(element)];
  const Point& a = vertices[static_cast<std::size_t>(t[0])];
  const Point& b = vertices[static_cast<std::size_t>(t[1])];
  const Point& c = vertices[static_cast<std::size_t>(t[2])];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

std::span<const int> Mesh::elements_of_vertex(int v) const {
  const auto begin = static_cast<std::size_t>(vertex_element_offsets[static_cast<std::size_t>(v)]);
  const auto end = static_cast<std::size_t>(vertex_element_offsets[static_cast<std::size_t>(v) + 1]);
  return std::span<const int>(vertex_elements).subspan(begin, end - begin);
}

Mesh build_uniform_mesh(int n) {
  require(n >= 1, "build_uniform_mesh: n must be >= 1");
  Mesh m;
  m.n = n;
  const double h = 1.0 / n;
  m.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices.push_back({i * h, j * h});

  m.triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = m.vertex(i, j), v10 = m.vertex(i + 1, j);
      const int v01 = m.vertex(i, j + 1), v11 = m.vertex(i + 1, j + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }
  }

  m.dof_of_vertex.assign(m.vertices.size(), -1);
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) {
      m.dof_of_vertex[static_cast<std::size_t>(m.vertex(i, j))] = static_cast<int>(m.interior_nodes.size());
      m.interior_nodes.push_back(m.vertex(i, j));
    }
  }

  std::vector<int> count(m.vertices.size() + 1, 0);
  for (const auto& t : m.triangles)
    for (int v : t) ++count[static_cast<std::size_t>(v) + 1];
  for (std::size_t i = 1; i < count.size(); ++i) count[i] += count[i - 1];
  m.vertex_element_offsets = count;
  m.vertex_elements.resize(static_cast<std::size_t>(count.back()));
  std::vector<int> fill(count.begin(), count.end() - 1);
  for (int e = 0; e < m.num_elements(); ++e)
    for (int v : m.triangles[static_cast<std::size_t>(e)])
      m.vertex_elements[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] = e;

  // Right isosceles triangles with legs h: inscribed diameter h(2 - sqrt 2),
  // diameter h sqrt 2.
  m.shape_regularity = (2.0 - std::sqrt(2.0)) / std::sqrt(2.0);
  return m;
}

std::span<const int> NestedMeshPair::children_of(int coarse_element) const {
  const auto begin = static_cast<std::size_t>(child_offsets[static_cast<std::size_t>(coarse_element)]);
  const auto end = static_cast<std::size_t>(child_offsets[static_cast<std::size_t>(coarse_element) + 1]);
  return std::span<const int>(children).subspan(begin, end - begin);
}

NestedMeshPair refine(const Mesh& coarse, int r) {
  require(r >= 1, "refine: ratio must be >= 1");
  NestedMeshPair pair;
  pair.coarse = coarse;
  pair.fine = build_uniform_mesh(coarse.n * r);
  pair.ratio = r;

  const int nf = pair.fine.n;
  pair.parent.resize(static_cast<std::size_t>(pair.fine.num_elements()));
  for (int fj = 0; fj < nf; ++fj) {
    for (int fi = 0; fi < nf; ++fi) {
      const int ci = fi / r, cj = fj / r;
      const int li = fi % r, lj = fj % r;
      const int base = 2 * (ci + cj * coarse.n);
      const int lower = 2 * (fi + fj * nf), upper = lower + 1;
      if (li > lj) {
        pair.parent[static_cast<std::size_t>(lower)] = base;
        pair.parent[static_cast<std::size_t>(upper)] = base;
      } else if (li < lj) {
        pair.parent[static_cast<std::size_t>(lower)] = base + 1;
        pair.parent[static_cast<std::size_t>(upper)] = base + 1;
      } else {
        pair.parent[static_cast<std::size_t>(lower)] = base;
        pair.parent[static_cast<std::size_t>(upper)] = base + 1;
      }
    }
  }

  std::vector<int> count(static_cast<std::size_t>(coarse.num_elements()) + 1, 0);
  for (int p : pair.parent) ++count[static_cast<std::size_t>(p) + 1];
  for (std::size_t i = 1; i < count.size(); ++i) count[i] += count[i - 1];
  pair.child_offsets = count;
  pair.children.resize(pair.parent.size());
  std::vector<int> fill(count.begin(), count.end() - 1);
  for (int e = 0; e < static_cast<int>(pair.parent.size()); ++e)
    pair.children[static_cast<std::size_t>(fill[static_cast<std::size_t>(pair.parent[static_cast<std::size_t>(e)])]++)] = e;
  return pair;
}

namespace {

std::vector<int> grow(const Mesh& mesh, std::vector<char>& in_patch, int k) {
  std::vector<int> current;
  for (int e = 0; e < mesh.num_elements(); ++e)
    if (in_patch[static_cast<std::size_t>(e)]) current.push_back(e);
  for (int layer = 1; layer < k; ++layer) {
    std::vector<char> touched(mesh.vertices.size(), 0);
    for (int e : current)
      for (int v : mesh.triangles[static_cast<std::size_t>(e)]) touched[static_cast<std::size_t>(v)] = 1;
    bool changed = false;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (!touched[static_cast<std::size_t>(v)]) continue;
      for (int e : mesh.elements_of_vertex(v)) {
        if (!in_patch[static_cast<std::size_t>(e)]) {
          in_patch[static_cast<std::size_t>(e)] = 1;
          changed = true;
        }
      }
    }
    current.clear();
    for (int e = 0; e < mesh.num_elements(); ++e)
      if (in_patch[static_cast<std::size_t>(e)]) current.push_back(e);
    if (!changed) break;
  }
  return current;
}

}  // namespace

std::vector<int> element_patch(const Mesh& mesh, int element, int k) {
  require(k >= 1, "element_patch: k must be >= 1");
  require(element >= 0 && element < mesh.num_elements(), "element_patch: element out of range");
  std::vector<char> in_patch(static_cast<std::size_t>(mesh.num_elements()), 0);
  for (int v : mesh.triangles[static_cast<std::size_t>(element)])
    for (int e : mesh.elements_of_vertex(v)) in_patch[static_cast<std::size_t>(e)] = 1;
  return grow(mesh, in_patch, k);
}

std::vector<int> node_patch(const Mesh& mesh, int vertex, int k) {
  require(k >= 1, "node_patch: k must be >= 1");
  require(vertex >= 0 && vertex < mesh.num_vertices(), "node_patch: vertex out of range");
  std::vector<char> in_patch(static_cast<std::size_t>(mesh.num_elements()), 0);
  for (int e : mesh.elements_of_vertex(vertex)) in_patch[static_cast<std::size_t>(e)] = 1;
  return grow(mesh, in_patch, k);
}

namespace {

// Layers needed for the patch grown from `start` (layer 1) to cover the mesh.
int layers_to_cover(const Mesh& mesh, const std::vector<int>& start) {
  std::vector<int> layer(static_cast<std::size_t>(mesh.num_elements()), 0);
  std::vector<int> frontier = start;
  for (int e : start) layer[static_cast<std::size_t>(e)] = 1;
  int depth = 1;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int e : frontier)
      for (int v : mesh.triangles[static_cast<std::size_t>(e)])
        for (int f : mesh.elements_of_vertex(v))
          if (layer[static_cast<std::size_t>(f)] == 0) {
            layer[static_cast<std::size_t>(f)] = depth + 1;
            next.push_back(f);
          }
    if (next.empty()) break;
    ++depth;
    frontier = std::move(next);
  }
  return depth;
}

}  // namespace

int saturation_layers(const Mesh& mesh) {
  int k = 1;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    std::vector<int> start;
    for (int v : mesh.triangles[static_cast<std::size_t>(e)])
      for (int f : mesh.elements_of_vertex(v)) start.push_back(f);
    std::sort(start.begin(), start.end());
    start.erase(std::unique(start.begin(), start.end()), start.end());
    k = std::max(k, layers_to_cover(mesh, start));
  }
  for (int v : mesh.interior_nodes) {
    const auto inc = mesh.elements_of_vertex(v);
    k = std::max(k, layers_to_cover(mesh, std::vector<int>(inc.begin(), inc.end())));
  }
  return k;
}

std::vector<int> patch_fine_dofs(const NestedMeshPair& pair, std::span<const int> coarse_elements) {
  std::vector<char> in_patch(static_cast<std::size_t>(pair.coarse.num_elements()), 0);
  for (int e : coarse_elements) in_patch[static_cast<std::size_t>(e)] = 1;
  std::vector<int> dofs;
  const Mesh& fine = pair.fine;
  for (int d = 0; d < fine.num_dofs(); ++d) {
    bool inside = true;
    for (int e : fine.elements_of_vertex(fine.interior_nodes[static_cast<std::size_t>(d)])) {
      if (!in_patch[static_cast<std::size_t>(pair.parent[static_cast<std::size_t>(e)])]) {
        inside = false;
        break;
      }
    }
    if (inside) dofs.push_back(d);
  }
  return dofs;
}

SparseMatrix prolongation(const NestedMeshPair& pair) {
  const Mesh& fine = pair.fine;
  const Mesh& coarse = pair.coarse;
  const int r = pair.ratio;
  std::vector<Triplet> entries;
  for (int d = 0; d < fine.num_dofs(); ++d) {
    const int v = fine.interior_nodes[static_cast<std::size_t>(d)];
    const int fi = v % (fine.n + 1), fj = v / (fine.n + 1);
    // Candidate coarse nodes: corners of the coarse cells around the point.
    const int ci0 = fi / r, cj0 = fj / r;
    for (int cj = std::max(cj0 - 1, 1); cj <= std::min(cj0 + 1, coarse.n - 1); ++cj) {
      for (int ci = std::max(ci0 - 1, 1); ci <= std::min(ci0 + 1, coarse.n - 1); ++ci) {
        // Hat of the criss-cross mesh in units of the coarse width; integer
        // arithmetic keeps the values exact multiples of 1/r.
        const int dx = fi - ci * r, dy = fj - cj * r;
        int dist;
        if ((dx >= 0) == (dy >= 0))
          dist = std::max(std::abs(dx), std::abs(dy));
        else
          dist = std::abs(dx) + std::abs(dy);
        if (dist >= r) continue;
        const double value = static_cast<double>(r - dist) / r;
        const int cd = coarse.dof_of_vertex[static_cast<std::size_t>(coarse.vertex(ci, cj))];
        entries.emplace_back(d, cd, value);
      }
    }
  }
  SparseMatrix P(fine.num_dofs(), coarse.num_dofs());
  P.setFromTriplets(entries.begin(), entries.end());
  return P;
}

std::array<double, 3> barycentric(const Mesh& mesh, int element, const Point& p) {
  const auto& t = mesh.triangles[static_cast<std::size_t>(element)];
  const Point& a = mesh.vertices[static_cast<std::size_t>(t[0])];
  const Point& b = mesh.vertices[static_cast<std::size_t>(t[1])];
  const Point& c = mesh.vertices[static_cast<std::size_t>(t[2])];
  const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
  const double l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
  const double l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
  return {1.0 - l1 - l2, l1, l2};
}

}  // namespace sdwave

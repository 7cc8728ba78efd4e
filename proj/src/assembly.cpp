#include "assembly.hpp"

#include "error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>

namespace sdwave {

CoefficientField::CoefficientField(int mesh_n, std::vector<double> values)
    : mesh_n_(mesh_n), values_(std::move(values)) {
  require(mesh_n >= 1, "coefficient field: mesh size must be >= 1");
  require(values_.size() == static_cast<std::size_t>(2 * mesh_n * mesh_n),
          "coefficient field: expected one value per element");
  for (double v : values_)
    require(std::isfinite(v) && v > 0.0, "coefficient field: values must be finite and positive");
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  min_ = *lo;
  max_ = *hi;
}

CoefficientField CoefficientField::constant(int mesh_n, double value) {
  return CoefficientField(mesh_n, std::vector<double>(static_cast<std::size_t>(2 * mesh_n * mesh_n), value));
}

CoefficientField CoefficientField::axpy(double s, const CoefficientField& other) const {
  require(other.mesh_n_ == mesh_n_, "coefficient field: mesh mismatch");
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] + s * other.values_[i];
  return CoefficientField(mesh_n_, std::move(out));
}

CoefficientField CoefficientField::scaled(double s) const {
  std::vector<double> out(values_);
  for (double& v : out) v *= s;
  return CoefficientField(mesh_n_, std::move(out));
}

void write_field_csv(std::ostream& os, const CoefficientField& field, int ratio) {
  os << "n,r,count\n" << field.mesh_n() << ',' << ratio << ',' << field.size() << '\n';
  os.precision(17);
  for (double v : field.values()) os << v << '\n';
  if (!os) throw Error(ErrorCode::io, "write_field_csv: stream error");
}

CoefficientField read_field_csv(std::istream& is, int* ratio) {
  std::string line;
  if (!std::getline(is, line) || line != "n,r,count")
    throw Error(ErrorCode::io, "read_field_csv: missing header");
  if (!std::getline(is, line)) throw Error(ErrorCode::io, "read_field_csv: missing sizes");
  std::replace(line.begin(), line.end(), ',', ' ');
  std::istringstream sizes(line);
  int n = 0, r = 0;
  std::size_t count = 0;
  if (!(sizes >> n >> r >> count)) throw Error(ErrorCode::io, "read_field_csv: bad sizes line");
  std::vector<double> values;
  values.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double v;
    if (!(is >> v)) throw Error(ErrorCode::io, "read_field_csv: truncated values");
    values.push_back(v);
  }
  if (ratio) *ratio = r;
  return CoefficientField(n, std::move(values));
}

namespace {

template <typename T>
void put(std::ostream& os, T value) {
  static_assert(std::endian::native == std::endian::little);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T value{};
  if (!is.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw Error(ErrorCode::io, "read_field_binary: truncated stream");
  return value;
}

}  // namespace

void write_field_binary(std::ostream& os, const CoefficientField& field, int ratio) {
  put<std::int32_t>(os, field.mesh_n());
  put<std::int32_t>(os, ratio);
  put<std::int64_t>(os, static_cast<std::int64_t>(field.size()));
  for (double v : field.values()) put<double>(os, v);
  if (!os) throw Error(ErrorCode::io, "write_field_binary: stream error");
}

CoefficientField read_field_binary(std::istream& is, int* ratio) {
  const auto n = get<std::int32_t>(is);
  const auto r = get<std::int32_t>(is);
  const auto count = get<std::int64_t>(is);
  if (count < 0) throw Error(ErrorCode::io, "read_field_binary: negative count");
  std::vector<double> values(static_cast<std::size_t>(count));
  for (double& v : values) v = get<double>(is);
  if (ratio) *ratio = r;
  return CoefficientField(n, std::move(values));
}

std::array<Point, 3> hat_gradients(const Mesh& mesh, int element) {
  const auto& t = mesh.triangles[static_cast<std::size_t>(element)];
  const Point& a = mesh.vertices[static_cast<std::size_t>(t[0])];
  const Point& b = mesh.vertices[static_cast<std::size_t>(t[1])];
  const Point& c = mesh.vertices[static_cast<std::size_t>(t[2])];
  const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
  // grad of barycentric coordinates: rotated opposite edges over 2|K|.
  return {Point{(b[1] - c[1]) / det, (c[0] - b[0]) / det},
          Point{(c[1] - a[1]) / det, (a[0] - c[0]) / det},
          Point{(a[1] - b[1]) / det, (b[0] - a[0]) / det}};
}

namespace {

int dof_index(const Mesh& mesh, int vertex, DofSet dofs) {
  return dofs == DofSet::all ? vertex : mesh.dof_of_vertex[static_cast<std::size_t>(vertex)];
}

int dof_count(const Mesh& mesh, DofSet dofs) {
  return dofs == DofSet::all ? mesh.num_vertices() : mesh.num_dofs();
}

using LocalMatrix = std::array<std::array<double, 3>, 3>;

LocalMatrix local_stiffness(const Mesh& mesh, int e, double coefficient) {
  const auto g = hat_gradients(mesh, e);
  const double scale = coefficient * mesh.area(e);
  LocalMatrix k{};
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      k[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          scale * (g[static_cast<std::size_t>(i)][0] * g[static_cast<std::size_t>(j)][0] +
                   g[static_cast<std::size_t>(i)][1] * g[static_cast<std::size_t>(j)][1]);
      k[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = k[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  return k;
}

LocalMatrix local_mass(const Mesh& mesh, int e) {
  const double s = mesh.area(e) / 12.0;
  LocalMatrix m{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m[i][j] = (i == j ? 2.0 : 1.0) * s;
  return m;
}

template <typename Local>
SparseMatrix assemble(const Mesh& mesh, DofSet dofs, Local&& local) {
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(9 * mesh.num_elements()));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const LocalMatrix k = local(e);
    const auto& t = mesh.triangles[static_cast<std::size_t>(e)];
    for (std::size_t i = 0; i < 3; ++i) {
      const int di = dof_index(mesh, t[i], dofs);
      if (di < 0) continue;
      for (std::size_t j = 0; j < 3; ++j) {
        const int dj = dof_index(mesh, t[j], dofs);
        if (dj < 0) continue;
        entries.emplace_back(di, dj, k[i][j]);
      }
    }
  }
  const int n = dof_count(mesh, dofs);
  SparseMatrix out(n, n);
  out.setFromTriplets(entries.begin(), entries.end());
  out.makeCompressed();
  return out;
}

}  // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const CoefficientField& field, DofSet dofs) {
  require(field.mesh_n() == mesh.n && field.size() == static_cast<std::size_t>(mesh.num_elements()),
          "assemble_stiffness: field does not live on this mesh");
  return assemble(mesh, dofs, [&](int e) { return local_stiffness(mesh, e, field[static_cast<std::size_t>(e)]); });
}

SparseMatrix assemble_mass(const Mesh& mesh, DofSet dofs) {
  return assemble(mesh, dofs, [&](int e) { return local_mass(mesh, e); });
}

SourceFunction constant_source(double value) {
  return [value](const Point&, double) { return value; };
}

Vector assemble_load(const Mesh& mesh, const SourceFunction& f, double t) {
  std::vector<double> at_vertex(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    at_vertex[v] = f(mesh.vertices[v], t);
    if (!std::isfinite(at_vertex[v])) throw_invalid("assemble_load: non-finite source value");
  }
  Vector load = Vector::Zero(mesh.num_dofs());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double w = mesh.area(e) / 3.0;
    for (int v : mesh.triangles[static_cast<std::size_t>(e)]) {
      const int d = mesh.dof_of_vertex[static_cast<std::size_t>(v)];
      if (d >= 0) load[d] += w * at_vertex[static_cast<std::size_t>(v)];
    }
  }
  return load;
}

Vector element_rhs(const NestedMeshPair& pair, const CoefficientField& field, int coarse_element,
                   const Vector& v) {
  const Mesh& fine = pair.fine;
  require(v.size() == fine.num_dofs(), "element_rhs: vector size mismatch");
  Vector out = Vector::Zero(fine.num_dofs());
  for (int e : pair.children_of(coarse_element)) {
    const LocalMatrix k = local_stiffness(fine, e, field[static_cast<std::size_t>(e)]);
    const auto& t = fine.triangles[static_cast<std::size_t>(e)];
    std::array<double, 3> vl{};
    std::array<int, 3> d{};
    for (std::size_t i = 0; i < 3; ++i) {
      d[i] = fine.dof_of_vertex[static_cast<std::size_t>(t[i])];
      vl[i] = d[i] >= 0 ? v[d[i]] : 0.0;
    }
    for (std::size_t i = 0; i < 3; ++i) {
      if (d[i] < 0) continue;
      out[d[i]] += k[i][0] * vl[0] + k[i][1] * vl[1] + k[i][2] * vl[2];
    }
  }
  return out;
}

DiscreteForms assemble_forms(const Mesh& mesh, const CoefficientField& A, const CoefficientField& B) {
  DiscreteForms forms;
  forms.M = assemble_mass(mesh);
  forms.K_A = assemble_stiffness(mesh, A);
  forms.K_B = assemble_stiffness(mesh, B);
  forms.K_1 = assemble_stiffness(mesh, CoefficientField::constant(mesh.n, 1.0));
  return forms;
}

namespace {

double quad(const SparseMatrix& K, const Vector& v) { return std::max(0.0, v.dot(K * v)); }

}  // namespace

NormReport norms(const DiscreteForms& forms, const Vector& v, double tau) {
  require(v.size() == forms.M.rows(), "norms: dimension mismatch");
  NormReport r;
  const double m = quad(forms.M, v);
  const double k1 = quad(forms.K_1, v);
  const double a = quad(forms.K_A, v);
  const double b = quad(forms.K_B, v);
  r.l2 = std::sqrt(m);
  r.h1 = std::sqrt(m + k1);
  r.a = std::sqrt(a);
  r.b = std::sqrt(b);
  r.energy = std::sqrt(a + tau * b);
  return r;
}

double h1_norm(const DiscreteForms& forms, const Vector& v) {
  return std::sqrt(quad(forms.M, v) + quad(forms.K_1, v));
}

}  // namespace sdwave

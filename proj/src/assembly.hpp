#pragma once

// P1 assembly of mass, stiffness and load; coefficient fields; discrete norms.

#include "linalg.hpp"
#include "mesh.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace sdwave {

/// One strictly positive scalar per element of a uniform mesh.
class CoefficientField {
 public:
  CoefficientField() = default;
  CoefficientField(int mesh_n, std::vector<double> values);

  static CoefficientField constant(int mesh_n, double value);

  int mesh_n() const { return mesh_n_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t e) const { return values_[e]; }
  std::size_t size() const { return values_.size(); }
  double min() const { return min_; }
  double max() const { return max_; }

  /// this + s * other, elementwise.
  CoefficientField axpy(double s, const CoefficientField& other) const;
  CoefficientField scaled(double s) const;

 private:
  int mesh_n_ = 0;
  std::vector<double> values_;
  double min_ = 0.0;
  double max_ = 0.0;
};

/// CSV layout: "n,r,count" header line, the three integers, then one value
/// per line in element order.
void write_field_csv(std::ostream& os, const CoefficientField& field, int ratio);
CoefficientField read_field_csv(std::istream& is, int* ratio = nullptr);
/// Binary layout: int32 n, int32 r, int64 count, count little-endian doubles.
void write_field_binary(std::ostream& os, const CoefficientField& field, int ratio);
CoefficientField read_field_binary(std::istream& is, int* ratio = nullptr);

enum class DofSet { interior, all };

SparseMatrix assemble_stiffness(const Mesh& mesh, const CoefficientField& field,
                                DofSet dofs = DofSet::interior);
SparseMatrix assemble_mass(const Mesh& mesh, DofSet dofs = DofSet::interior);

using SourceFunction = std::function<double(const Point&, double)>;

SourceFunction constant_source(double value);

Vector assemble_load(const Mesh& mesh, const SourceFunction& f, double t);

/// z -> sum over fine children K of T of field(K) (grad v, grad z)_K, in fine
/// interior dofs.
Vector element_rhs(const NestedMeshPair& pair, const CoefficientField& field, int coarse_element,
                   const Vector& v);

/// Local P1 gradients of the three hat functions on `element`.
std::array<Point, 3> hat_gradients(const Mesh& mesh, int element);

struct DiscreteForms {
  SparseMatrix M;
  SparseMatrix K_A;
  SparseMatrix K_B;
  SparseMatrix K_1;
};

DiscreteForms assemble_forms(const Mesh& mesh, const CoefficientField& A, const CoefficientField& B);

struct NormReport {
  double l2 = 0.0;
  double h1 = 0.0;
  double a = 0.0;
  double b = 0.0;
  /// sqrt(v^T (K_A + tau K_B) v)
  double energy = 0.0;
};

NormReport norms(const DiscreteForms& forms, const Vector& v, double tau = 0.0);

/// sqrt(v^T (K_1 + M) v)
double h1_norm(const DiscreteForms& forms, const Vector& v);

}  // namespace sdwave

#pragma once
// Uniform finite-difference grids on (0,1)^d, d = 1 or 2, with Dirichlet folding.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "csplit/kernels.hpp"

namespace csplit {

using cplx = std::complex<double>;
using ScalarFunction = std::function<double(double x, double y)>;

/// Uniform grid of the unit interval or square. Nodes are addressed on the closed
/// grid by (i, j) with 0 <= i, j <= n + 1; only interior nodes carry state.
///
/// Boundary ordering (used by every boundary vector in the library):
///   1D: x = 0, x = 1.
///   2D: bottom edge j = 0 for i = 0..n+1, top edge j = n+1 for i = 0..n+1,
///       left edge i = 0 for j = 1..n, right edge i = n+1 for j = 1..n.
class Mesh {
 public:
  Mesh(int dim, std::size_t n_per_axis);

  /// Mesh with spacing dx; 1/dx must be an integer up to round-off.
  static Mesh from_spacing(int dim, double dx);

  int dim() const noexcept { return dim_; }
  std::size_t n_per_axis() const noexcept { return n_; }
  std::size_t closed_per_axis() const noexcept { return n_ + 2; }
  double dx() const noexcept { return dx_; }

  /// Number of interior nodes (the length of every Field).
  std::size_t size() const noexcept { return dim_ == 1 ? n_ : n_ * n_; }
  std::size_t closed_size() const noexcept {
    return dim_ == 1 ? n_ + 2 : (n_ + 2) * (n_ + 2);
  }
  std::size_t boundary_size() const noexcept { return dim_ == 1 ? 2 : 4 * (n_ + 1); }

  bool is_interior(std::size_t i, std::size_t j = 1) const noexcept;
  /// Flat interior index of closed-grid node (i, j); requires is_interior(i, j).
  std::size_t interior_index(std::size_t i, std::size_t j = 1) const noexcept;
  /// Closed-grid position of an interior flat index.
  std::array<std::size_t, 2> interior_node(std::size_t flat) const noexcept;

  /// Position in the boundary ordering of boundary node (i, j).
  std::size_t boundary_index(std::size_t i, std::size_t j = 0) const;
  std::array<std::size_t, 2> boundary_node(std::size_t b) const noexcept;

  /// Flat closed-grid index, row-major in j: i + (n+2) j.
  std::size_t closed_index(std::size_t i, std::size_t j = 0) const noexcept {
    return i + (dim_ == 1 ? 0 : (n_ + 2) * j);
  }

  double coord(std::size_t i) const noexcept { return static_cast<double>(i) * dx_; }
  std::array<double, 2> interior_coords(std::size_t flat) const noexcept;
  std::array<double, 2> boundary_coords(std::size_t b) const noexcept;

  bool operator==(const Mesh& other) const noexcept {
    return dim_ == other.dim_ && n_ == other.n_;
  }

 private:
  int dim_;
  std::size_t n_;
  double dx_;
};

/// Complex grid function over the interior nodes of a mesh.
class Field {
 public:
  explicit Field(std::shared_ptr<const Mesh> mesh);
  Field(std::shared_ptr<const Mesh> mesh, std::vector<cplx> values);

  static Field sample(std::shared_ptr<const Mesh> mesh, const ScalarFunction& fn);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }
  cplx& operator[](std::size_t k) noexcept { return values_[k]; }
  const cplx& operator[](std::size_t k) const noexcept { return values_[k]; }

  /// this += alpha * other
  Field& axpy(cplx alpha, const Field& other);
  Field operator-(const Field& other) const;
  Field operator+(const Field& other) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<cplx> values_;
};

/// sqrt(dx^dim * sum |v_i|^2)
double l2_norm(const Field& v);
double max_abs(const Field& v);

enum class BoundaryKind { Dirichlet, Neumann, Robin };

/// Boundary operator B and data b. Only Dirichlet (B = trace) is discretized;
/// the Neumann/Robin coefficients are carried but rejected by assembly.
struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::Dirichlet;
  ScalarFunction value = [](double, double) { return 0.0; };
  std::array<ScalarFunction, 2> beta{};
  ScalarFunction gamma{};

  static BoundarySpec dirichlet(ScalarFunction value) {
    BoundarySpec spec;
    spec.value = std::move(value);
    return spec;
  }
};

/// D = sum a_ij d_ij + sum b_i d_i + c. Unused entries for 1D are ignored.
struct DiffusionCoefficients {
  ScalarFunction a11 = [](double, double) { return 1.0; };
  ScalarFunction a12 = [](double, double) { return 0.0; };
  ScalarFunction a22 = [](double, double) { return 1.0; };
  ScalarFunction b1 = [](double, double) { return 0.0; };
  ScalarFunction b2 = [](double, double) { return 0.0; };
  ScalarFunction c = [](double, double) { return 0.0; };
  bool is_laplacian = true;

  static DiffusionCoefficients laplacian() { return {}; }
};

struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int64_t> col_idx;
  std::vector<double> values;
  /// Set by assembly when the matrix equals its transpose; enables the
  /// symmetric Krylov path.
  bool symmetric = false;

  CsrView view() const noexcept {
    return CsrView{rows, row_ptr.data(), col_idx.data(), values.data()};
  }
  std::size_t nnz() const noexcept { return values.size(); }
  std::size_t max_row_nnz() const noexcept;
  double at(std::size_t row, std::size_t col) const noexcept;
  bool equals_transpose() const noexcept;
};

/// Method-of-lines realization of D: (Du)|interior ~ L u + g_b for u with trace b.
class DiscreteOperator {
 public:
  DiscreteOperator(std::shared_ptr<const Mesh> mesh, DiffusionCoefficients coeffs,
                   CsrMatrix interior, CsrMatrix boundary_coupling, std::vector<double> lift);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
  const DiffusionCoefficients& coefficients() const noexcept { return coeffs_; }

  /// Interior matrix L.
  const CsrMatrix& matrix() const noexcept { return interior_; }
  /// Interior-by-boundary coupling; fold(bv) = coupling * bv.
  const CsrMatrix& boundary_coupling() const noexcept { return boundary_coupling_; }
  /// Boundary lift g_b of the Dirichlet data the operator was assembled with.
  std::span<const double> lift() const noexcept { return lift_; }

  /// y = L x
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
  Field apply(const Field& x) const;

  /// Interior contribution of boundary values (boundary ordering of Mesh).
  std::vector<cplx> fold(std::span<const cplx> boundary_values) const;
  std::vector<double> fold(std::span<const double> boundary_values) const;

  /// Applies the continuous D at every boundary node of a closed-grid function,
  /// using second-order one-sided differences normal to the boundary and
  /// centered differences along it.
  std::vector<cplx> apply_on_boundary(std::span<const cplx> closed_values) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  DiffusionCoefficients coeffs_;
  CsrMatrix interior_;
  CsrMatrix boundary_coupling_;
  std::vector<double> lift_;
};

DiscreteOperator assemble_operator(std::shared_ptr<const Mesh> mesh,
                                   const DiffusionCoefficients& coeffs,
                                   const BoundarySpec& bc);

/// g sampled at the boundary nodes, in the documented boundary ordering.
std::vector<double> boundary_trace(const Mesh& mesh, const ScalarFunction& g);

/// Closed-grid vector from interior values and boundary values.
std::vector<cplx> to_closed_grid(const Mesh& mesh, std::span<const cplx> interior,
                                 std::span<const cplx> boundary);

}  // namespace csplit

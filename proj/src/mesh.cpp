#include "csplit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "csplit/error.hpp"

namespace csplit {

Mesh::Mesh(int dim, std::size_t n_per_axis)
    : dim_(dim), n_(n_per_axis), dx_(1.0 / static_cast<double>(n_per_axis + 1)) {
  if (dim != 1 && dim != 2) {
    throw ConfigError("mesh dimension must be 1 or 2");
  }
  if (n_per_axis < 2) {
    throw ConfigError("mesh needs at least 2 interior nodes per axis");
  }
}

Mesh Mesh::from_spacing(int dim, double dx) {
  if (!(dx > 0.0) || dx >= 0.5) {
    throw ConfigError("mesh spacing must lie in (0, 1/2)");
  }
  const double cells = 1.0 / dx;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * rounded) {
    std::ostringstream msg;
    msg << "1/dx = " << cells << " is not an integer";
    throw ConfigError(msg.str());
  }
  return Mesh(dim, static_cast<std::size_t>(rounded) - 1);
}

bool Mesh::is_interior(std::size_t i, std::size_t j) const noexcept {
  const bool ix = i >= 1 && i <= n_;
  if (dim_ == 1) {
    return ix;
  }
  return ix && j >= 1 && j <= n_;
}

std::size_t Mesh::interior_index(std::size_t i, std::size_t j) const noexcept {
  return dim_ == 1 ? i - 1 : (i - 1) + n_ * (j - 1);
}

std::array<std::size_t, 2> Mesh::interior_node(std::size_t flat) const noexcept {
  if (dim_ == 1) {
    return {flat + 1, 0};
  }
  return {flat % n_ + 1, flat / n_ + 1};
}

std::size_t Mesh::boundary_index(std::size_t i, std::size_t j) const {
  const std::size_t last = n_ + 1;
  if (dim_ == 1) {
    if (i == 0) return 0;
    if (i == last) return 1;
  } else {
    if (j == 0) return i;
    if (j == last) return (n_ + 2) + i;
    if (i == 0) return 2 * (n_ + 2) + (j - 1);
    if (i == last) return 2 * (n_ + 2) + n_ + (j - 1);
  }
  throw Error("boundary_index called on an interior node");
}

std::array<std::size_t, 2> Mesh::boundary_node(std::size_t b) const noexcept {
  const std::size_t last = n_ + 1;
  if (dim_ == 1) {
    return {b == 0 ? 0 : last, 0};
  }
  const std::size_t row = n_ + 2;
  if (b < row) return {b, 0};
  if (b < 2 * row) return {b - row, last};
  if (b < 2 * row + n_) return {0, b - 2 * row + 1};
  return {last, b - 2 * row - n_ + 1};
}

std::array<double, 2> Mesh::interior_coords(std::size_t flat) const noexcept {
  const auto [i, j] = interior_node(flat);
  return {coord(i), dim_ == 1 ? 0.0 : coord(j)};
}

std::array<double, 2> Mesh::boundary_coords(std::size_t b) const noexcept {
  const auto [i, j] = boundary_node(b);
  return {coord(i), dim_ == 1 ? 0.0 : coord(j)};
}

// --- Field ------------------------------------------------------------------

Field::Field(std::shared_ptr<const Mesh> mesh)
    : mesh_(std::move(mesh)), values_(mesh_->size(), cplx(0.0, 0.0)) {}

Field::Field(std::shared_ptr<const Mesh> mesh, std::vector<cplx> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (values_.size() != mesh_->size()) {
    throw Error("field length does not match the mesh interior node count");
  }
}

Field Field::sample(std::shared_ptr<const Mesh> mesh, const ScalarFunction& fn) {
  Field out(mesh);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto [x, y] = mesh->interior_coords(k);
    out[k] = fn(x, y);
  }
  return out;
}

Field& Field::axpy(cplx alpha, const Field& other) {
  kernels::axpy(alpha, other.values(), values());
  return *this;
}

Field Field::operator-(const Field& other) const {
  Field out(*this);
  out.axpy(-1.0, other);
  return out;
}

Field Field::operator+(const Field& other) const {
  Field out(*this);
  out.axpy(1.0, other);
  return out;
}

double l2_norm(const Field& v) {
  const double cell = std::pow(v.mesh().dx(), v.mesh().dim());
  return std::sqrt(cell * kernels::norm2_sq(v.values()));
}

double max_abs(const Field& v) {
  double m = 0.0;
  for (const cplx& z : v.values()) {
    m = std::max(m, std::abs(z));
  }
  return m;
}

// --- CsrMatrix --------------------------------------------------------------

std::size_t CsrMatrix::max_row_nnz() const noexcept {
  std::size_t m = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    m = std::max(m, static_cast<std::size_t>(row_ptr[i + 1] - row_ptr[i]));
  }
  return m;
}

double CsrMatrix::at(std::size_t row, std::size_t col) const noexcept {
  for (std::int64_t k = row_ptr[row]; k < row_ptr[row + 1]; ++k) {
    if (static_cast<std::size_t>(col_idx[k]) == col) {
      return values[k];
    }
  }
  return 0.0;
}

bool CsrMatrix::equals_transpose() const noexcept {
  if (rows != cols) return false;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (at(static_cast<std::size_t>(col_idx[k]), i) != values[k]) return false;
    }
  }
  return true;
}

// --- DiscreteOperator -------------------------------------------------------

DiscreteOperator::DiscreteOperator(std::shared_ptr<const Mesh> mesh, DiffusionCoefficients coeffs,
                                   CsrMatrix interior, CsrMatrix boundary_coupling,
                                   std::vector<double> lift)
    : mesh_(std::move(mesh)),
      coeffs_(std::move(coeffs)),
      interior_(std::move(interior)),
      boundary_coupling_(std::move(boundary_coupling)),
      lift_(std::move(lift)) {}

void DiscreteOperator::apply(std::span<const cplx> x, std::span<cplx> y) const {
  kernels::csr_matvec(interior_.view(), x, y);
}

Field DiscreteOperator::apply(const Field& x) const {
  Field y(x.mesh_ptr());
  apply(x.values(), y.values());
  return y;
}

std::vector<cplx> DiscreteOperator::fold(std::span<const cplx> boundary_values) const {
  std::vector<cplx> out(boundary_coupling_.rows);
  kernels::csr_matvec(boundary_coupling_.view(), boundary_values, out);
  return out;
}

std::vector<double> DiscreteOperator::fold(std::span<const double> boundary_values) const {
  std::vector<double> out(boundary_coupling_.rows, 0.0);
  for (std::size_t i = 0; i < boundary_coupling_.rows; ++i) {
    double s = 0.0;
    for (std::int64_t k = boundary_coupling_.row_ptr[i]; k < boundary_coupling_.row_ptr[i + 1];
         ++k) {
      s += boundary_coupling_.values[k] * boundary_values[boundary_coupling_.col_idx[k]];
    }
    out[i] = s;
  }
  return out;
}

namespace {

// Second-order first and second derivatives along one axis of a closed grid,
// one-sided at the two ends. `at(k)` returns the value at position k.
template <typename At>
cplx diff1(const At& at, std::size_t k, std::size_t count, double h) {
  if (k == 0) {
    return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  }
  if (k == count - 1) {
    return (3.0 * at(k) - 4.0 * at(k - 1) + at(k - 2)) / (2.0 * h);
  }
  return (at(k + 1) - at(k - 1)) / (2.0 * h);
}

template <typename At>
cplx diff2(const At& at, std::size_t k, std::size_t count, double h) {
  if (k == 0) {
    return (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / (h * h);
  }
  if (k == count - 1) {
    return (2.0 * at(k) - 5.0 * at(k - 1) + 4.0 * at(k - 2) - at(k - 3)) / (h * h);
  }
  return (at(k + 1) - 2.0 * at(k) + at(k - 1)) / (h * h);
}

}  // namespace

std::vector<cplx> DiscreteOperator::apply_on_boundary(std::span<const cplx> closed) const {
  const Mesh& m = *mesh_;
  const std::size_t count = m.closed_per_axis();
  const double h = m.dx();
  std::vector<cplx> out(m.boundary_size());
  for (std::size_t b = 0; b < out.size(); ++b) {
    const auto [i, j] = m.boundary_node(b);
    const auto [x, y] = m.boundary_coords(b);
    auto along_x = [&](std::size_t jj) {
      return [&, jj](std::size_t k) { return closed[m.closed_index(k, jj)]; };
    };
    cplx value = coeffs_.c(x, y) * closed[m.closed_index(i, j)];
    value += coeffs_.a11(x, y) * diff2(along_x(j), i, count, h);
    value += coeffs_.b1(x, y) * diff1(along_x(j), i, count, h);
    if (m.dim() == 2) {
      auto along_y = [&](std::size_t k) { return closed[m.closed_index(i, k)]; };
      value += coeffs_.a22(x, y) * diff2(along_y, j, count, h);
      value += coeffs_.b2(x, y) * diff1(along_y, j, count, h);
      const double a12 = coeffs_.a12(x, y);
      if (a12 != 0.0) {
        auto dy_at = [&](std::size_t k) {
          auto col = [&, k](std::size_t l) { return closed[m.closed_index(k, l)]; };
          return diff1(col, j, count, h);
        };
        value += 2.0 * a12 * diff1(dy_at, i, count, h);
      }
    }
    out[b] = value;
  }
  return out;
}

// --- assembly ---------------------------------------------------------------

namespace {

void check_ellipticity(const Mesh& mesh, const DiffusionCoefficients& coeffs) {
  double worst = INFINITY;
  std::array<double, 2> where{};
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    const auto [x, y] = mesh.interior_coords(k);
    double smallest = 0.0;
    if (mesh.dim() == 1) {
      smallest = coeffs.a11(x, y);
    } else {
      const double a = coeffs.a11(x, y);
      const double b = coeffs.a12(x, y);
      const double d = coeffs.a22(x, y);
      smallest = 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b);
    }
    if (smallest < worst) {
      worst = smallest;
      where = {x, y};
    }
  }
  if (!(worst > 0.0)) {
    std::ostringstream msg;
    msg << "diffusion coefficients are not uniformly elliptic: smallest eigenvalue " << worst
        << " at (" << where[0] << ", " << where[1] << ")";
    throw ConfigError(msg.str());
  }
}

struct RowBuilder {
  std::map<std::size_t, double> interior;
  std::map<std::size_t, double> boundary;
};

CsrMatrix to_csr(const std::vector<std::map<std::size_t, double>>& rows, std::size_t cols) {
  CsrMatrix out;
  out.rows = rows.size();
  out.cols = cols;
  out.row_ptr.reserve(rows.size() + 1);
  out.row_ptr.push_back(0);
  for (const auto& row : rows) {
    for (const auto& [c, v] : row) {
      if (v != 0.0) {
        out.col_idx.push_back(static_cast<std::int64_t>(c));
        out.values.push_back(v);
      }
    }
    out.row_ptr.push_back(static_cast<std::int64_t>(out.values.size()));
  }
  return out;
}

}  // namespace

DiscreteOperator assemble_operator(std::shared_ptr<const Mesh> mesh,
                                   const DiffusionCoefficients& coeffs, const BoundarySpec& bc) {
  if (bc.kind != BoundaryKind::Dirichlet) {
    throw UnsupportedError("only Dirichlet boundary conditions are discretized");
  }
  check_ellipticity(*mesh, coeffs);

  const Mesh& m = *mesh;
  const double h = m.dx();
  const double h2 = h * h;
  std::vector<std::map<std::size_t, double>> interior_rows(m.size());
  std::vector<std::map<std::size_t, double>> boundary_rows(m.size());

  for (std::size_t k = 0; k < m.size(); ++k) {
    const auto [i, j] = m.interior_node(k);
    const auto [x, y] = m.interior_coords(k);
    auto add = [&](std::size_t ii, std::size_t jj, double w) {
      if (w == 0.0) return;
      if (m.is_interior(ii, jj)) {
        interior_rows[k][m.interior_index(ii, jj)] += w;
      } else {
        boundary_rows[k][m.boundary_index(ii, jj)] += w;
      }
    };
    const double a11 = coeffs.a11(x, y);
    const double b1 = coeffs.b1(x, y);
    add(i - 1, j, a11 / h2 - b1 / (2.0 * h));
    add(i + 1, j, a11 / h2 + b1 / (2.0 * h));
    double diag = -2.0 * a11 / h2 + coeffs.c(x, y);
    if (m.dim() == 2) {
      const double a22 = coeffs.a22(x, y);
      const double b2 = coeffs.b2(x, y);
      const double a12 = coeffs.a12(x, y);
      add(i, j - 1, a22 / h2 - b2 / (2.0 * h));
      add(i, j + 1, a22 / h2 + b2 / (2.0 * h));
      diag += -2.0 * a22 / h2;
      // 2 a12 d_xy with the centered four-corner stencil
      const double w = 2.0 * a12 / (4.0 * h2);
      add(i + 1, j + 1, w);
      add(i - 1, j - 1, w);
      add(i + 1, j - 1, -w);
      add(i - 1, j + 1, -w);
    }
    add(i, j, diag);
  }

  CsrMatrix interior = to_csr(interior_rows, m.size());
  interior.symmetric = interior.equals_transpose();
  CsrMatrix coupling = to_csr(boundary_rows, m.boundary_size());
  DiscreteOperator op(mesh, coeffs, std::move(interior), std::move(coupling), {});
  const std::vector<double> trace = boundary_trace(m, bc.value);
  std::vector<double> lift = op.fold(std::span<const double>(trace));
  return DiscreteOperator(mesh, coeffs, op.matrix(), op.boundary_coupling(), std::move(lift));
}

std::vector<double> boundary_trace(const Mesh& mesh, const ScalarFunction& g) {
  std::vector<double> out(mesh.boundary_size());
  for (std::size_t b = 0; b < out.size(); ++b) {
    const auto [x, y] = mesh.boundary_coords(b);
    out[b] = g(x, y);
  }
  return out;
}

std::vector<cplx> to_closed_grid(const Mesh& mesh, std::span<const cplx> interior,
                                 std::span<const cplx> boundary) {
  std::vector<cplx> out(mesh.closed_size());
  for (std::size_t k = 0; k < interior.size(); ++k) {
    const auto [i, j] = mesh.interior_node(k);
    out[mesh.closed_index(i, j)] = interior[k];
  }
  for (std::size_t b = 0; b < boundary.size(); ++b) {
    const auto [i, j] = mesh.boundary_node(b);
    out[mesh.closed_index(i, j)] = boundary[b];
  }
  return out;
}

}  // namespace csplit

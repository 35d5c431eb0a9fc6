#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "csplit/error.hpp"
#include "csplit/mesh.hpp"

using namespace csplit;

namespace {

std::shared_ptr<const Mesh> mesh_of(int dim, std::size_t n) {
  return std::make_shared<const Mesh>(dim, n);
}

DiscreteOperator laplacian(std::shared_ptr<const Mesh> mesh,
                           ScalarFunction b = [](double, double) { return 0.0; }) {
  return assemble_operator(mesh, DiffusionCoefficients::laplacian(),
                           BoundarySpec::dirichlet(std::move(b)));
}

}  // namespace

TEST(Mesh, FromSpacing) {
  const Mesh m = Mesh::from_spacing(1, 2e-3);
  EXPECT_EQ(m.n_per_axis(), 499u);
  EXPECT_DOUBLE_EQ(m.dx(), 1.0 / 500.0);
  const Mesh m2 = Mesh::from_spacing(2, 1e-2);
  EXPECT_EQ(m2.size(), 99u * 99u);
  EXPECT_EQ(m2.boundary_size(), 4u * 100u);
  EXPECT_THROW(Mesh::from_spacing(1, 0.3), ConfigError);
  EXPECT_THROW(Mesh(3, 10), ConfigError);
}

TEST(Mesh, IndexRoundTrip) {
  const Mesh m(2, 7);
  for (std::size_t k = 0; k < m.size(); ++k) {
    const auto [i, j] = m.interior_node(k);
    EXPECT_TRUE(m.is_interior(i, j));
    EXPECT_EQ(m.interior_index(i, j), k);
  }
  for (std::size_t b = 0; b < m.boundary_size(); ++b) {
    const auto [i, j] = m.boundary_node(b);
    EXPECT_FALSE(m.is_interior(i, j));
    EXPECT_EQ(m.boundary_index(i, j), b);
  }
  // documented ordering: bottom, top, left, right
  EXPECT_EQ(m.boundary_node(0), (std::array<std::size_t, 2>{0, 0}));
  EXPECT_EQ(m.boundary_node(9), (std::array<std::size_t, 2>{0, 8}));
  EXPECT_EQ(m.boundary_node(18), (std::array<std::size_t, 2>{0, 1}));
  EXPECT_EQ(m.boundary_node(25), (std::array<std::size_t, 2>{8, 1}));
}

TEST(Mesh, OneDimensionalBoundary) {
  const Mesh m(1, 5);
  EXPECT_EQ(m.boundary_size(), 2u);
  EXPECT_EQ(m.boundary_index(0), 0u);
  EXPECT_EQ(m.boundary_index(6), 1u);
  EXPECT_DOUBLE_EQ(m.boundary_coords(1)[0], 1.0);
}

TEST(Field, NormsAndArithmetic) {
  auto mesh = mesh_of(1, 3);
  Field u(mesh, {cplx(3, 4), 0.0, 0.0});
  EXPECT_DOUBLE_EQ(max_abs(u), 5.0);
  EXPECT_DOUBLE_EQ(l2_norm(u), std::sqrt(0.25 * 25.0));
  Field v = u + u;
  v.axpy(-2.0, u);
  EXPECT_DOUBLE_EQ(max_abs(v), 0.0);
  EXPECT_DOUBLE_EQ(max_abs(u - u), 0.0);
}

TEST(Operator, OneDimensionalStencil) {
  auto mesh = mesh_of(1, 4);
  const auto op = laplacian(mesh);
  const double h2 = 1.0 / (0.2 * 0.2);
  const auto& L = op.matrix();
  EXPECT_EQ(L.rows, 4u);
  EXPECT_EQ(L.nnz(), 10u);
  EXPECT_DOUBLE_EQ(L.at(0, 0), -2.0 * h2);
  EXPECT_DOUBLE_EQ(L.at(0, 1), h2);
  EXPECT_DOUBLE_EQ(L.at(2, 1), h2);
  EXPECT_DOUBLE_EQ(L.at(0, 3), 0.0);
  EXPECT_TRUE(L.symmetric);
}

TEST(Operator, LiftFoldsDirichletData) {
  auto mesh = mesh_of(1, 9);
  const auto op = laplacian(mesh, [](double x, double) { return 1.0 + 2.0 * x; });
  const double h2 = 1.0 / (mesh->dx() * mesh->dx());
  EXPECT_NEAR(op.lift()[0], 1.0 * h2, 1e-9);
  EXPECT_NEAR(op.lift()[8], 3.0 * h2, 1e-9);
  for (std::size_t k = 1; k < 8; ++k) EXPECT_EQ(op.lift()[k], 0.0);
  const std::vector<double> bv = boundary_trace(*mesh, [](double x, double) { return 1.0 + 2.0 * x; });
  const auto folded = op.fold(std::span<const double>(bv));
  for (std::size_t k = 0; k < 9; ++k) EXPECT_DOUBLE_EQ(folded[k], op.lift()[k]);
}

TEST(Operator, ExactOnQuadratics) {
  // the 5-point stencil is exact on polynomials of degree <= 3 per axis
  for (int dim : {1, 2}) {
    auto mesh = mesh_of(dim, 12);
    auto p = [](double x, double y) { return x * x * x - 2 * x * y + 3 * y * y; };
    const double lap_const = 6.0;  // d_yy part; d_xx part is 6x
    const auto op = laplacian(mesh, p);
    const Field u = Field::sample(mesh, p);
    Field lu = op.apply(u);
    for (std::size_t k = 0; k < mesh->size(); ++k) {
      const auto [x, y] = mesh->interior_coords(k);
      const double expected = 6.0 * x + (dim == 2 ? lap_const : 0.0);
      const double got = (lu[k] + op.lift()[k]).real();
      const double scale = 1.0 / (mesh->dx() * mesh->dx());
      EXPECT_NEAR(got, expected, 1e-10 * scale) << "dim " << dim << " k " << k;
    }
  }
}

TEST(Operator, DiscreteEigenvaluesMatchFormula) {
  const std::size_t n = 60;
  auto mesh = mesh_of(1, n);
  const auto op = laplacian(mesh);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) dense(r, c) = op.matrix().at(r, c);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  const double dx = mesh->dx();
  std::vector<double> formula;
  for (std::size_t k = 1; k <= n; ++k) {
    formula.push_back(-(2.0 / (dx * dx)) * (1.0 - std::cos(k * std::numbers::pi * dx)));
  }
  std::sort(formula.begin(), formula.end());
  for (std::size_t k = 0; k < n; ++k) {
    EXPECT_NEAR(es.eigenvalues()[k], formula[k], 1e-10 * std::abs(formula[k]));
  }
}

TEST(Operator, VariableCoefficientsAreNotSymmetric) {
  auto mesh = mesh_of(2, 8);
  DiffusionCoefficients c;
  c.b1 = [](double x, double) { return 1.0 + x; };
  c.is_laplacian = false;
  const auto op = assemble_operator(mesh, c, BoundarySpec::dirichlet([](double, double) {
                                      return 0.0;
                                    }));
  EXPECT_FALSE(op.matrix().symmetric);
  EXPECT_FALSE(op.matrix().equals_transpose());
}

TEST(Operator, RejectsNeumann) {
  auto mesh = mesh_of(1, 8);
  BoundarySpec bc;
  bc.kind = BoundaryKind::Neumann;
  EXPECT_THROW(assemble_operator(mesh, DiffusionCoefficients::laplacian(), bc), UnsupportedError);
}

TEST(Operator, BoundaryApplicationOfContinuousOperator) {
  auto mesh = mesh_of(2, 20);
  const auto op = laplacian(mesh);
  auto p = [](double x, double y) { return x * x + x * y * y; };  // Laplacian 2 + 2x
  std::vector<cplx> closed(mesh->closed_size());
  for (std::size_t j = 0; j < mesh->closed_per_axis(); ++j) {
    for (std::size_t i = 0; i < mesh->closed_per_axis(); ++i) {
      closed[mesh->closed_index(i, j)] = p(mesh->coord(i), mesh->coord(j));
    }
  }
  const auto d = op.apply_on_boundary(closed);
  ASSERT_EQ(d.size(), mesh->boundary_size());
  for (std::size_t b = 0; b < d.size(); ++b) {
    const auto [x, y] = mesh->boundary_coords(b);
    EXPECT_NEAR(d[b].real(), 2.0 + 2.0 * x, 1e-8) << "b " << b;
  }
}

TEST(Operator, ClosedGridAssembly) {
  const Mesh m(1, 2);
  const std::vector<cplx> in{1.0, 2.0}, bd{5.0, 7.0};
  const auto closed = to_closed_grid(m, in, bd);
  ASSERT_EQ(closed.size(), 4u);
  EXPECT_EQ(closed[0], cplx(5.0));
  EXPECT_EQ(closed[2], cplx(2.0));
  EXPECT_EQ(closed[3], cplx(7.0));
}

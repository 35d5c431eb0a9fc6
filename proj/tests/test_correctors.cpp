#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "csplit/correctors.hpp"
#include "csplit/error.hpp"

using namespace csplit;

namespace {

constexpr double pi = std::numbers::pi;

std::shared_ptr<const DiscreteOperator> laplacian(std::shared_ptr<const Mesh> mesh,
                                                  ScalarFunction b = [](double, double) {
                                                    return 0.0;
                                                  }) {
  return std::make_shared<const DiscreteOperator>(assemble_operator(
      mesh, DiffusionCoefficients::laplacian(), BoundarySpec::dirichlet(std::move(b))));
}

std::vector<cplx> trace(const Mesh& mesh, const ScalarFunction& g) {
  const auto t = boundary_trace(mesh, g);
  return {t.begin(), t.end()};
}

}  // namespace

TEST(EllipticSolver, SolvesDirichletProblem) {
  auto mesh = std::make_shared<const Mesh>(2, 25);
  const EllipticSolver solver(laplacian(mesh));
  // v = x^2 + x y^2 has D v = 2 + 2x and is reproduced exactly by the 5-point stencil
  auto v = [](double x, double y) { return x * x + x * y * y; };
  std::vector<cplx> rhs(mesh->size());
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    const auto [x, y] = mesh->interior_coords(k);
    rhs[k] = cplx(2.0 + 2.0 * x, -1.0);
  }
  const auto bv = trace(*mesh, v);
  const Field got = solver.solve(rhs, bv);
  // imaginary part solves D w = -1 with w = 0 on the boundary, so it is positive
  for (std::size_t k = 0; k < got.size(); ++k) {
    const auto [x, y] = mesh->interior_coords(k);
    EXPECT_NEAR(got[k].real(), v(x, y), 1e-11);
    EXPECT_GT(got[k].imag(), 0.0);
  }
}

TEST(EllipticSolver, RejectsWrongLength) {
  auto mesh = std::make_shared<const Mesh>(1, 10);
  const EllipticSolver solver(laplacian(mesh));
  const std::vector<cplx> rhs(9);
  EXPECT_THROW(solver.solve(rhs, {}), Error);
}

TEST(EllipticSolver, SingularOperatorIsReported) {
  // [[1, -1, 0], [-1, 1, 0], [0, 0, 1]] has a null vector (1, 1, 0)
  auto mesh = std::make_shared<const Mesh>(1, 3);
  CsrMatrix interior;
  interior.rows = interior.cols = 3;
  interior.row_ptr = {0, 2, 4, 5};
  interior.col_idx = {0, 1, 0, 1, 2};
  interior.values = {1.0, -1.0, -1.0, 1.0, 1.0};
  CsrMatrix coupling;
  coupling.rows = 3;
  coupling.cols = 2;
  coupling.row_ptr = {0, 0, 0, 0};
  auto op = std::make_shared<const DiscreteOperator>(mesh, DiffusionCoefficients::laplacian(),
                                                     interior, coupling,
                                                     std::vector<double>(3, 0.0));
  EXPECT_THROW(EllipticSolver{op}, SingularMatrixError);
}

TEST(Corrector, ClosedFormForCosine) {
  // f = cos(2 pi x): r = -4 pi^2, q = 1 + 2 pi^2 x (1 - x)
  auto mesh = std::make_shared<const Mesh>(1, 99);
  const EllipticSolver solver(laplacian(mesh));
  auto f = [](double x, double) { return std::cos(2 * pi * x); };
  auto df = [](double x, double) { return -4 * pi * pi * std::cos(2 * pi * x); };
  for (bool analytic : {true, false}) {
    const auto src = analytic ? SourceTerm::independent(mesh, f, df)
                              : SourceTerm::independent(mesh, f);
    const CorrectorPair pair = build_independent_corrector(src, solver, CorrectorKind::Chained);
    const double tol = analytic ? 1e-12 : 1e-2;
    for (std::size_t k = 0; k < mesh->size(); ++k) {
      const double x = mesh->interior_coords(k)[0];
      EXPECT_NEAR(std::abs(pair.q[k] - (1.0 + 2 * pi * pi * x * (1 - x))), 0.0,
                  tol * (1.0 + 2 * pi * pi))
          << (analytic ? "analytic" : "sampled") << " k " << k;
      EXPECT_NEAR(std::abs(pair.r[k] + 4 * pi * pi), 0.0, tol * 4 * pi * pi);
    }
  }
}

TEST(Corrector, ProjectionIsHarmonicWithTraceF) {
  auto mesh = std::make_shared<const Mesh>(1, 49);
  const EllipticSolver solver(laplacian(mesh));
  const auto src = SourceTerm::independent(mesh, [](double x, double) { return 2.0 + x * x; });
  const CorrectorPair pair = build_independent_corrector(src, solver, CorrectorKind::Projection);
  // D q = 0, q(0) = 2, q(1) = 3
  for (std::size_t k = 0; k < mesh->size(); ++k) {
    const double x = mesh->interior_coords(k)[0];
    EXPECT_NEAR(std::abs(pair.q[k] - (2.0 + x)), 0.0, 1e-12);
    EXPECT_EQ(pair.r[k], cplx(0.0));
  }
}

TEST(Corrector, VanishesForSourceInDomain) {
  // f = sin(2 pi x) vanishes on the boundary and so does D f
  auto mesh = std::make_shared<const Mesh>(1, 99);
  const EllipticSolver solver(laplacian(mesh));
  const auto src = SourceTerm::independent(mesh, [](double x, double) { return std::sin(2 * pi * x); },
                                           [](double x, double) {
                                             return -4 * pi * pi * std::sin(2 * pi * x);
                                           });
  const CorrectorPair pair = build_independent_corrector(src, solver, CorrectorKind::Chained);
  EXPECT_LE(max_abs(pair.q), 1e-12);
  EXPECT_LE(max_abs(pair.r), 1e-10);
}

TEST(Corrector, StateDependentReducesToIndependent) {
  // a custom flow u + t f(x) must give the same corrector as the independent form
  auto mesh = std::make_shared<const Mesh>(2, 20);
  const EllipticSolver solver(laplacian(mesh, [](double x, double) { return x; }));
  auto f = [](double x, double y) { return std::exp(x) * (1.0 + y); };
  const auto ind = SourceTerm::independent(mesh, f);
  const auto custom = SourceTerm::custom(
      [f](cplx t, cplx u, double x, double y) { return u + t * f(x, y); });
  const Field omega = Field::sample(mesh, [](double x, double y) { return x + y * y; });
  const auto bv = trace(*mesh, [](double x, double) { return x; });
  const cplx tau_j = ComplexCoeffs::a * 0.01;
  const CorrectorPair a = build_independent_corrector(ind, solver, CorrectorKind::Chained);
  const CorrectorPair b =
      build_corrector(custom, omega, bv, tau_j, solver, CorrectorKind::Chained, 2);
  EXPECT_LE(max_abs(a.q - b.q), 1e-10 * max_abs(a.q));
  EXPECT_LE(max_abs(a.r - b.r), 1e-10 * max_abs(a.r));
  EXPECT_EQ(b.block, 2);
  EXPECT_EQ(b.tau_j, tau_j);
}

TEST(Corrector, LogisticTracesUseTheFlowIncrement) {
  auto mesh = std::make_shared<const Mesh>(1, 30);
  const EllipticSolver solver(laplacian(mesh, [](double, double) { return 0.5; }));
  const auto src = SourceTerm::logistic(1.0);
  const Field omega = Field::sample(mesh, [](double, double) { return 0.5; });
  const auto bv = trace(*mesh, [](double, double) { return 0.5; });
  const cplx tau_j = ComplexCoeffs::a * 0.02;
  const CorrectorPair pair =
      build_corrector(src, omega, bv, tau_j, solver, CorrectorKind::Chained);
  // constant state: w is constant, so D w = 0 and q is the constant w
  const cplx w = src.increment(tau_j, 0.5, 0, 0) / tau_j;
  for (const cplx& t : pair.q_trace) EXPECT_NEAR(std::abs(t - w), 0.0, 1e-15);
  for (const cplx& t : pair.r_trace) EXPECT_NEAR(std::abs(t), 0.0, 1e-9);
  for (std::size_t k = 0; k < pair.q.size(); ++k) EXPECT_NEAR(std::abs(pair.q[k] - w), 0.0, 1e-12);
}

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "csplit/error.hpp"
#include "csplit/expm_krylov.hpp"
#include "csplit/flows.hpp"

using namespace csplit;

namespace {

std::shared_ptr<const Mesh> line(std::size_t n) { return std::make_shared<const Mesh>(1, n); }

DiscreteOperator laplacian(std::shared_ptr<const Mesh> mesh) {
  return assemble_operator(mesh, DiffusionCoefficients::laplacian(),
                           BoundarySpec::dirichlet([](double, double) { return 0.0; }));
}

Eigen::MatrixXcd dense(const CsrMatrix& m) {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(m.rows, m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (auto k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) d(r, m.col_idx[k]) = m.values[k];
  }
  return d;
}

Eigen::VectorXcd as_vector(const Field& f) {
  Eigen::VectorXcd v(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) v[k] = f[k];
  return v;
}

Field random_field(std::shared_ptr<const Mesh> mesh, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Field f(mesh);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = {d(rng), d(rng)};
  return f;
}

double rel_err(const Field& got, const Eigen::VectorXcd& want) {
  return (as_vector(got) - want).norm() / want.norm();
}

// dense e^{sL} v via the symmetric eigendecomposition
Eigen::VectorXcd dense_expmv(const CsrMatrix& m, cplx s, const Eigen::VectorXcd& v) {
  Eigen::MatrixXd re = dense(m).real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(re);
  const Eigen::MatrixXcd V = es.eigenvectors().cast<cplx>();
  Eigen::VectorXcd e(m.rows);
  for (Eigen::Index k = 0; k < e.size(); ++k) e[k] = std::exp(s * es.eigenvalues()[k]);
  return V * e.asDiagonal() * (V.adjoint() * v);
}

}  // namespace

TEST(Expmv, ConfigValidation) {
  ExpmvConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.tol = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_krylov_dim = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Expmv, SymmetricMatchesDenseOracle) {
  const ExpmvConfig cfg;
  for (std::size_t n : {50u, 200u}) {
    auto mesh = line(n);
    const auto op = laplacian(mesh);
    ASSERT_TRUE(op.matrix().symmetric);
    const Field v = random_field(mesh, static_cast<unsigned>(n));
    const double tau = 1e-2;
    for (cplx s : {cplx(tau), 2.0 * ComplexCoeffs::a * tau, 2.0 * ComplexCoeffs::abar * tau,
                   cplx(1e-5), cplx(0.1)}) {
      const Field w = expmv(s, op.matrix(), v, cfg);
      EXPECT_LE(rel_err(w, dense_expmv(op.matrix(), s, as_vector(v))), 1e-10)
          << "n " << n << " s " << s;
    }
  }
}

TEST(Expmv, GeneralPathMatchesMatrixExponential) {
  auto mesh = std::make_shared<const Mesh>(2, 9);
  DiffusionCoefficients c;
  c.b1 = [](double x, double) { return 3.0 * x; };
  c.a12 = [](double, double) { return 0.2; };
  c.is_laplacian = false;
  const auto op = assemble_operator(mesh, c, BoundarySpec::dirichlet([](double, double) {
                                      return 0.0;
                                    }));
  ASSERT_FALSE(op.matrix().symmetric);
  const Field v = random_field(mesh, 3);
  const Eigen::MatrixXcd A = dense(op.matrix());
  for (cplx s : {cplx(0.01), 2.0 * ComplexCoeffs::a * 0.01}) {
    const Eigen::MatrixXcd E = (s * A).exp();
    const Field w = expmv(s, op.matrix(), v, ExpmvConfig{});
    EXPECT_LE(rel_err(w, E * as_vector(v)), 1e-10);
  }
}

TEST(Expmv, ZeroVectorAndZeroStep) {
  auto mesh = line(30);
  const auto op = laplacian(mesh);
  const Field z(mesh);
  EXPECT_EQ(max_abs(expmv(0.3, op.matrix(), z, ExpmvConfig{})), 0.0);
  const Field v = random_field(mesh, 1);
  EXPECT_LE(max_abs(expmv(0.0, op.matrix(), v, ExpmvConfig{}) - v), 1e-15 * max_abs(v));
}

TEST(Expmv, HappyBreakdownOnSmallSpace) {
  // the Krylov space of a 3x3 matrix is exhausted after three vectors
  auto mesh = line(3);
  const auto op = laplacian(mesh);
  const Field v = random_field(mesh, 4);
  for (bool symmetric : {true, false}) {
    CsrMatrix m = op.matrix();
    m.symmetric = symmetric;
    ExpmvStats stats;
    const cplx s = 2.0 * ComplexCoeffs::a * 0.3;
    const Field w = expmv(s, m, v, ExpmvConfig{}, &stats);
    EXPECT_TRUE(stats.happy_breakdown) << "symmetric " << symmetric;
    EXPECT_LE(stats.max_dim_used, 3u);
    EXPECT_LE(rel_err(w, dense_expmv(m, s, as_vector(v))), 1e-13);
  }
}

TEST(Expmv, SemigroupAndConjugation) {
  auto mesh = line(120);
  const auto op = laplacian(mesh);
  const Field v = random_field(mesh, 11);
  const ExpmvConfig cfg;
  const cplx s1 = 2.0 * ComplexCoeffs::a * 0.01, s2 = cplx(0.004);
  const Field once = expmv(s1 + s2, op.matrix(), v, cfg);
  const Field twice = expmv(s2, op.matrix(), expmv(s1, op.matrix(), v, cfg), cfg);
  EXPECT_LE(l2_norm(once - twice), 1e-11 * l2_norm(v));

  // real L: e^{conj(s) L} conj(v) = conj(e^{s L} v)
  Field vc = v;
  for (std::size_t k = 0; k < vc.size(); ++k) vc[k] = std::conj(vc[k]);
  const Field a = expmv(s1, op.matrix(), v, cfg);
  const Field b = expmv(std::conj(s1), op.matrix(), vc, cfg);
  double diff = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(std::conj(a[k]) - b[k]));
  EXPECT_LE(diff, 1e-11 * max_abs(v));
}

TEST(Expmv, ContractiveForNonnegativeRealPartSteps) {
  auto mesh = line(100);
  const auto op = laplacian(mesh);
  const Field v = random_field(mesh, 5);
  for (cplx s : {cplx(0.01), 2.0 * ComplexCoeffs::a * 0.01, 2.0 * ComplexCoeffs::abar * 0.5}) {
    EXPECT_LE(l2_norm(expmv(s, op.matrix(), v, ExpmvConfig{})), l2_norm(v) * (1 + 1e-12));
  }
}

TEST(ExpmvAffine, ScalarExample) {
  // u' = -u + 1 from u(0) = 0: u(1) = 1 - e^{-1}, through the augmented 2x2 operator
  LinearOperator aug = [](std::span<const cplx> x, std::span<cplx> y) {
    y[0] = -x[0] + x[1];
    y[1] = 0.0;
  };
  const std::vector<cplx> start{0.0, 1.0};
  const auto w = expmv(1.0, aug, start, ExpmvConfig{});
  EXPECT_NEAR(w[0].real(), 1.0 - std::exp(-1.0), 1e-14);
  EXPECT_NEAR(w[1].real(), 1.0, 1e-14);
}

TEST(ExpmvAffine, DiagonalExample) {
  // L = diag(-1, -4), g = (1, 8), v = 0: w_k = g_k (1 - e^{l_k s}) / -l_k
  CsrMatrix m;
  m.rows = m.cols = 2;
  m.row_ptr = {0, 1, 2};
  m.col_idx = {0, 1};
  m.values = {-1.0, -4.0};
  m.symmetric = true;
  auto mesh = std::make_shared<const Mesh>(1, 2);
  const std::vector<cplx> g{1.0, 8.0};
  const Field w = expmv_affine(0.5, m, g, Field(mesh), ExpmvConfig{});
  EXPECT_NEAR(std::abs(w[0] - (1.0 - std::exp(-0.5))), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(w[1] - 2.0 * (1.0 - std::exp(-2.0))), 0.0, 1e-14);
}

TEST(ExpmvAffine, StationaryStateIsFixed) {
  // L u* + g = 0 is preserved by the affine flow
  for (std::size_t n : {40u, 300u}) {
    auto mesh = line(n);
    const auto op = laplacian(mesh);
    const Field ustar = Field::sample(mesh, [](double x, double) { return x * (1 - x); });
    std::vector<cplx> g(n, 2.0);  // -L (x(1-x)) = 2 exactly for the FD stencil
    for (cplx s : {cplx(0.1), 2.0 * ComplexCoeffs::a * 0.05, cplx(1e-4)}) {
      const Field w = expmv_affine(s, op.matrix(), g, ustar, ExpmvConfig{});
      EXPECT_LE(max_abs(w - ustar), 1e-11) << "n " << n << " s " << s;
    }
  }
}

TEST(ExpmvAffine, MatchesDenseAugmentedExponential) {
  auto mesh = line(60);
  const auto op = laplacian(mesh);
  const Field v = random_field(mesh, 9);
  std::vector<cplx> g(60);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = std::cos(0.1 * k) * 100.0;
  Eigen::MatrixXcd aug = Eigen::MatrixXcd::Zero(61, 61);
  aug.topLeftCorner(60, 60) = dense(op.matrix());
  for (std::size_t k = 0; k < 60; ++k) aug(k, 60) = g[k];
  Eigen::VectorXcd start(61);
  start.head(60) = as_vector(v);
  start[60] = 1.0;
  for (cplx s : {cplx(0.02), 2.0 * ComplexCoeffs::abar * 0.02}) {
    const Eigen::VectorXcd want = ((s * aug).exp() * start).head(60);
    const Field got = expmv_affine(s, op.matrix(), g, v, ExpmvConfig{});
    EXPECT_LE(rel_err(got, want), 1e-10);
  }
}

TEST(ExpmvAffine, SymmetricAndGeneralPathsAgree) {
  auto mesh = line(150);
  const auto op = laplacian(mesh);
  CsrMatrix general = op.matrix();
  general.symmetric = false;
  const Field v = random_field(mesh, 21);
  std::vector<cplx> g(150);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = cplx(std::sin(0.05 * k), 1.0);
  const cplx s = 2.0 * ComplexCoeffs::a * 0.01;
  const Field a = expmv_affine(s, op.matrix(), g, v, ExpmvConfig{});
  const Field b = expmv_affine(s, general, g, v, ExpmvConfig{});
  EXPECT_LE(l2_norm(a - b), 1e-10 * l2_norm(a));
}

TEST(ExpmvAffine, SizeMismatchThrows) {
  auto mesh = line(10);
  const auto op = laplacian(mesh);
  const std::vector<cplx> g(9);
  EXPECT_THROW(expmv_affine(0.1, op.matrix(), g, Field(mesh), ExpmvConfig{}), Error);
}

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "csplit/analysis.hpp"
#include "csplit/harness.hpp"

namespace csplit::harness {

namespace {

namespace mp = boost::multiprecision;
using big = mp::cpp_bin_float_50;
using big_complex = mp::cpp_complex_50;

constexpr double kPi = std::numbers::pi;

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

CheckResult make(std::string name, bool passed, std::string detail) {
  return CheckResult{std::move(name), passed, std::move(detail)};
}

// S evaluated from its defining formula in 50-digit arithmetic.
cplx S_high_precision(cplx z) {
  const big three(3);
  const big a_im = -big(1) / (4 * mp::sqrt(three));
  const big_complex a(big(0.25), a_im);
  const big_complex abar(big(0.25), -a_im);
  const big_complex zz(big(z.real()), big(z.imag()));
  const big_complex s = a * mp::exp(zz) + big_complex(big(0.5)) * mp::exp(big(2) * abar * zz) +
                        abar - (mp::exp(zz) - big_complex(big(1))) / zz;
  return {static_cast<double>(s.real()), static_cast<double>(s.imag())};
}

std::vector<CheckResult> check_S() {
  std::vector<CheckResult> out;
  const analysis::SBoundsReport rep = analysis::check_S_bounds(10000);
  {
    std::ostringstream d;
    d << rep.points << " points, " << rep.violations << " violations, max |S|/bound "
      << sci(rep.max_ratio_right) << " (z >= -1), " << sci(rep.max_ratio_left) << " (z <= -1)";
    if (!rep.violating_z.empty()) d << ", first at z = " << rep.violating_z.front();
    out.push_back(make("S bounds", rep.violations == 0, d.str()));
  }
  {
    std::ostringstream d;
    d << "sup |S(z) z^-3| over z <= -1 = " << rep.sup_left << " at z = " << rep.sup_left_at;
    out.push_back(
        make("S supremum", rep.sup_left >= 0.004 && rep.sup_left <= 0.006, d.str()));
  }
  {
    // series branch against the defining formula in high precision
    double worst = 0.0;
    const std::array<cplx, 5> dirs{cplx(-1, 0), cplx(1, 0), cplx(0, 1), cplx(-0.6, 0.8),
                                   cplx(0.8, -0.6)};
    for (cplx dir : dirs) {
      for (int k = 0; k <= 60; ++k) {
        const double r = std::pow(10.0, -3.0 + 3.0 * k / 60.0);
        const cplx z = r * dir;
        const cplx exact = S_high_precision(z);
        worst = std::max(worst, std::abs(analysis::S(z) - exact) / std::abs(exact));
      }
    }
    out.push_back(make("S series seam", worst <= 1e-12,
                       "max relative error on 1e-3 <= |z| <= 1: " + sci(worst)));
  }
  {
    double worst = 0.0;
    for (int k = 3; k <= 50; ++k) worst = std::max(worst, std::abs(analysis::alpha(k)));
    out.push_back(make("alpha_k bound", worst <= 1.0, "max |alpha_k|, 3 <= k <= 50: " + sci(worst)));
  }
  {
    double worst = 0.0;
    for (int k = 0; k <= 400; ++k) {
      const double z = -20.0 + 40.0 * k / 400.0;
      const cplx s = analysis::S(z);
      const double scale = std::max(1.0, std::abs(s));
      worst = std::max(worst, std::abs(s.real() - analysis::S_real_part(z)) / scale);
      worst = std::max(worst, std::abs(s.imag() - analysis::S_imag_part(z)) / scale);
    }
    out.push_back(make("S real/imaginary parts", worst <= 1e-13,
                       "max deviation on [-20, 20]: " + sci(worst)));
  }
  return out;
}

CheckResult check_defect_identity(bool mutate) {
  const auto p = analysis::SpectralProblem::continuous(200);
  const std::size_t J = p.modes();
  std::vector<cplx> u(J), f(J), q(J);
  for (std::size_t j = 0; j < J; ++j) {
    const double jj = static_cast<double>(j + 1);
    u[j] = 1.0 / jj;
    f[j] = cplx(1.0 / jj, 0.25 / (jj * jj));
    q[j] = 0.5 / (jj * jj);
  }
  const cplx a = mutate ? std::conj(ComplexCoeffs::a) : ComplexCoeffs::a;
  double worst = 0.0;
  for (int k = 0; k <= 6; ++k) {
    const double tau = std::ldexp(0.02, -k);
    const auto num = analysis::spectral_scheme_step(p, u, f, q, tau, a);
    const auto ex = analysis::spectral_exact_step(p, u, f, tau);
    for (std::size_t j = 0; j < J; ++j) {
      const cplx predicted = tau * analysis::S(tau * p.lambda[j]) * (f[j] - q[j]);
      const double dev = std::abs((num[j] - ex[j]) - predicted);
      worst = std::max(worst, dev / std::max(1.0, std::abs(predicted)));
    }
  }
  return make(mutate ? "defect identity (mutated a)" : "defect identity", worst <= 1e-14,
              "max scaled deviation, j <= 200, tau on the ladder: " + sci(worst));
}

CheckResult check_one_step_grid() {
  const std::size_t n = 100;
  auto mesh = std::make_shared<const Mesh>(1, n);
  const BoundarySpec bc = BoundarySpec::dirichlet([](double, double) { return 0.0; });
  auto op = std::make_shared<const DiscreteOperator>(
      assemble_operator(mesh, DiffusionCoefficients::laplacian(), bc));
  const SourceTerm source = SourceTerm::independent(
      mesh, [](double x, double) { return std::cos(2 * kPi * x); },
      [](double x, double) { return -4 * kPi * kPi * std::cos(2 * kPi * x); });
  ExpmvConfig cfg;
  cfg.tol = 1e-14;
  const SplittingContext ctx(op, source, bc, ContextOptions{cfg, false});
  const Field u = Field::sample(mesh, [](double x, double) {
    return std::sin(2 * kPi * x) + x * (1 - x);
  });
  const auto p = analysis::SpectralProblem::discrete(n);
  const auto uc = analysis::to_sine_coeffs(u.values());
  const auto fc = analysis::to_sine_coeffs(source.as_independent()->samples.values());
  const auto qc = analysis::to_sine_coeffs(ctx.cached_chained()->q.values());
  const auto pc = analysis::to_sine_coeffs(ctx.cached_projection()->q.values());
  double worst = 0.0;
  for (double tau : {0.02, 0.005}) {
    const auto closed = analysis::from_sine_coeffs(analysis::spectral_scheme_step(p, uc, fc, qc, tau));
    const Field grid = step_c3_new(u, tau, ctx);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      num += std::norm(grid[k] - closed[k]);
      den += std::norm(closed[k]);
    }
    worst = std::max(worst, std::sqrt(num / den));
    for (SchemeId id : all_schemes()) {
      const auto& q = id == SchemeId::StrangCorr ? pc : qc;
      const auto comp =
          analysis::from_sine_coeffs(analysis::spectral_composition_step(id, p, uc, fc, q, tau));
      const Field g = step(id, u, tau, ctx);
      num = den = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        num += std::norm(g[k] - comp[k]);
        den += std::norm(comp[k]);
      }
      worst = std::max(worst, std::sqrt(num / den));
    }
  }
  return make("one-step grid cross-check", worst <= 1e-10,
              "max relative deviation from the discrete eigenbasis closed forms (n = 100): " +
                  sci(worst));
}

Eigen::MatrixXd dense_laplacian(std::size_t n) {
  auto mesh = std::make_shared<const Mesh>(1, n);
  const auto op = assemble_operator(mesh, DiffusionCoefficients::laplacian(),
                                    BoundarySpec::dirichlet([](double, double) { return 0.0; }));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(n));
  const CsrMatrix& m = op.matrix();
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (auto k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
      a(static_cast<Eigen::Index>(i), m.col_idx[k]) = m.values[k];
    }
  }
  return a;
}

CheckResult check_fd_eigenvalues() {
  const std::size_t n = 200;
  const Eigen::MatrixXd a = dense_laplacian(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const auto p = analysis::SpectralProblem::discrete(n);
  std::vector<double> formula = p.lambda;
  std::sort(formula.begin(), formula.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = es.eigenvalues()(static_cast<Eigen::Index>(k));
    worst = std::max(worst, std::abs(e - formula[k]) / std::abs(formula[k]));
  }
  return make("FD eigenvalues", worst <= 1e-10,
              "max relative deviation from -(2/dx^2)(1 - cos(k pi dx)), n = 200: " + sci(worst));
}

CheckResult check_expmv_dense() {
  double worst = 0.0;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (std::size_t n : {50, 200}) {
    const Eigen::MatrixXd a = dense_laplacian(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    auto mesh = std::make_shared<const Mesh>(1, n);
    const auto op = assemble_operator(mesh, DiffusionCoefficients::laplacian(),
                                      BoundarySpec::dirichlet([](double, double) { return 0.0; }));
    Field v(mesh);
    Eigen::VectorXcd ve(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      v[k] = cplx(normal(rng), normal(rng));
      ve(static_cast<Eigen::Index>(k)) = v[k];
    }
    const double tau = 0.02;
    for (cplx s : {cplx(tau, 0.0), 2.0 * ComplexCoeffs::a * tau, 2.0 * ComplexCoeffs::abar * tau}) {
      const Eigen::VectorXcd d =
          (s * es.eigenvalues().cast<cplx>().array()).exp().matrix();
      const Eigen::VectorXcd ref = es.eigenvectors().cast<cplx>() *
                                   (d.asDiagonal() * (es.eigenvectors().transpose().cast<cplx>() * ve));
      const Field w = expmv(s, op.matrix(), v, ExpmvConfig{});
      double num = 0.0;
      for (std::size_t k = 0; k < n; ++k) num += std::norm(w[k] - ref(static_cast<Eigen::Index>(k)));
      worst = std::max(worst, std::sqrt(num) / ref.norm());
    }
  }
  return make("expmv dense oracle", worst <= 1e-10,
              "max relative error, n in {50, 200}, steps {tau, 2a tau, 2abar tau}: " + sci(worst));
}

CheckResult check_corrector_closed_form() {
  const std::size_t n = 99;
  auto mesh = std::make_shared<const Mesh>(1, n);
  const BoundarySpec bc = BoundarySpec::dirichlet([](double, double) { return 0.0; });
  auto op = std::make_shared<const DiscreteOperator>(
      assemble_operator(mesh, DiffusionCoefficients::laplacian(), bc));
  const SourceTerm source = SourceTerm::independent(
      mesh, [](double x, double) { return std::cos(2 * kPi * x); },
      [](double x, double) { return -4 * kPi * kPi * std::cos(2 * kPi * x); });
  const EllipticSolver solver(op);
  const CorrectorPair pair = build_independent_corrector(source, solver, CorrectorKind::Chained);
  double worst_q = 0.0, worst_r = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = mesh->interior_coords(k)[0];
    const double q = 1.0 + 2.0 * kPi * kPi * x * (1.0 - x);
    worst_q = std::max(worst_q, std::abs(pair.q[k] - q) / q);
    worst_r = std::max(worst_r, std::abs(pair.r[k] + 4.0 * kPi * kPi) / (4.0 * kPi * kPi));
  }
  const double worst = std::max(worst_q, worst_r);
  return make("corrector closed form", worst <= 1e-12,
              "f = cos(2 pi x): max relative deviation of q from 1 + 2 pi^2 x(1-x) " +
                  sci(worst_q) + ", of r from -4 pi^2 " + sci(worst_r));
}

}  // namespace

std::vector<CheckResult> verify(const VerifyOptions& options) {
  std::vector<CheckResult> out = check_S();
  out.push_back(check_defect_identity(false));
  if (options.mutate) out.push_back(check_defect_identity(true));
  out.push_back(check_one_step_grid());
  out.push_back(check_fd_eigenvalues());
  out.push_back(check_expmv_dense());
  out.push_back(check_corrector_closed_form());
  return out;
}

}  // namespace csplit::harness

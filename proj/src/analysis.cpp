#include "csplit/analysis.hpp"

#include <cmath>
#include <numbers>

#include "csplit/error.hpp"

namespace csplit::analysis {

namespace {

constexpr cplx kA = ComplexCoeffs::a;
constexpr cplx kAbar = ComplexCoeffs::abar;
constexpr double kPi = std::numbers::pi;

cplx expm1c(cplx z) {
  const double s = std::sin(0.5 * z.imag());
  return {std::expm1(z.real()) * std::cos(z.imag()) - 2.0 * s * s,
          std::exp(z.real()) * std::sin(z.imag())};
}

// t phi1(t l) = (e^{t l} - 1) / l, with the l -> 0 limit t
cplx integrated_exp(cplx t, double l) {
  if (l == 0.0) return t;
  return expm1c(t * l) / l;
}

// scalar affine flow x' = l x + g over complex time t
cplx affine_flow(cplx t, double l, cplx x, cplx g) {
  return std::exp(t * l) * x + integrated_exp(t, l) * g;
}

void check_sizes(const SpectralProblem& p, std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != p.modes() || b.size() != p.modes()) {
    throw ConfigError("spectral coefficient count does not match the mode count");
  }
}

}  // namespace

cplx alpha(int k) {
  return kA + std::ldexp(1.0, k - 1) * std::pow(kAbar, k) - 1.0 / (k + 1.0);
}

cplx S_direct(cplx z) {
  if (z == cplx(0.0, 0.0)) return {0.0, 0.0};
  return kA * std::exp(z) + 0.5 * std::exp(2.0 * kAbar * z) + kAbar - expm1c(z) / z;
}

cplx S_series(cplx z) {
  // alpha_k grows no faster than 2^{k-1}|abar|^k = 0.577^k / 2, so 40 terms
  // reach round-off for |z| <= 1
  cplx sum(0.0, 0.0);
  cplx power(1.0, 0.0);
  double factorial = 6.0;
  for (int k = 3; k < 43; ++k) {
    sum += alpha(k) * power / factorial;
    power *= z;
    factorial *= (k + 1);
  }
  return z * z * z * sum;
}

cplx S(cplx z) { return std::abs(z) < kSeriesRadius ? S_series(z) : S_direct(z); }

double S_real_part(double z) {
  const double phi1 = z == 0.0 ? 1.0 : std::expm1(z) / z;
  return 0.25 * (std::exp(z) + 1.0) + 0.5 * std::exp(0.5 * z) * std::cos(z / std::sqrt(12.0)) -
         phi1;
}

double S_imag_part(double z) {
  return kA.imag() * std::expm1(z) + 0.5 * std::exp(0.5 * z) * std::sin(z / std::sqrt(12.0));
}

SBoundsReport check_S_bounds(std::size_t points_per_branch) {
  SBoundsReport rep;
  const double sqrt32 = std::sqrt(1.5);
  auto record_violation = [&rep](double z) {
    ++rep.violations;
    if (rep.violating_z.size() < 32) rep.violating_z.push_back(z);
  };
  auto check_right = [&](double z) {
    ++rep.points;
    const double bound = std::abs(z * z * z) * std::exp(z);
    const double s = std::abs(S(z));
    if (bound > 0.0) rep.max_ratio_right = std::max(rep.max_ratio_right, s / bound);
    if (s > bound) record_violation(z);
  };
  auto check_left = [&](double z) {
    ++rep.points;
    const double cube = std::abs(z * z * z);
    const double s = std::abs(S(z));
    rep.max_ratio_left = std::max(rep.max_ratio_left, s / (sqrt32 * cube));
    if (s > sqrt32 * cube) record_violation(z);
    if (s / cube > rep.sup_left) {
      rep.sup_left = s / cube;
      rep.sup_left_at = z;
    }
  };

  const std::size_t m = std::max<std::size_t>(points_per_branch, 4);
  // left branch: z = -10^t, t in [0, 6]
  for (std::size_t k = 0; k < m; ++k) {
    const double t = 6.0 * static_cast<double>(k) / static_cast<double>(m - 1);
    check_left(-std::pow(10.0, t));
  }
  // right branch: 0, log-spaced magnitudes on [-1, 0) and (0, 50]
  check_right(0.0);
  const std::size_t half = (m - 1) / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const double t = -8.0 + 8.0 * static_cast<double>(k) / static_cast<double>(half - 1);
    check_right(-std::pow(10.0, t));
  }
  const std::size_t rest = m - 1 - half;
  for (std::size_t k = 0; k < rest; ++k) {
    const double t =
        -8.0 + (8.0 + std::log10(50.0)) * static_cast<double>(k) / static_cast<double>(rest - 1);
    check_right(std::pow(10.0, t));
  }
  return rep;
}

SpectralProblem SpectralProblem::continuous(std::size_t modes) {
  SpectralProblem p;
  p.lambda.resize(modes);
  for (std::size_t j = 0; j < modes; ++j) {
    const double jp = static_cast<double>(j + 1) * kPi;
    p.lambda[j] = -jp * jp;
  }
  return p;
}

SpectralProblem SpectralProblem::discrete(std::size_t n) {
  SpectralProblem p;
  p.lambda.resize(n);
  const double dx = 1.0 / static_cast<double>(n + 1);
  for (std::size_t k = 0; k < n; ++k) {
    // 1 - cos(theta) = 2 sin^2(theta/2)
    const double s = std::sin(0.5 * static_cast<double>(k + 1) * kPi * dx);
    p.lambda[k] = -(4.0 / (dx * dx)) * s * s;
  }
  return p;
}

namespace {

std::vector<cplx> sine_transform(std::span<const cplx> in, double scale) {
  const std::size_t n = in.size();
  const double h = 1.0 / static_cast<double>(n + 1);
  // sin(j i pi h) depends on (j i) mod 2(n+1); tabulate once
  const std::size_t period = 2 * (n + 1);
  std::vector<double> table(period);
  for (std::size_t m = 0; m < period; ++m) {
    table[m] = std::sin(static_cast<double>(m) * kPi * h);
  }
  std::vector<cplx> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      acc += table[((j + 1) * (i + 1)) % period] * in[i];
    }
    out[j] = scale * acc;
  }
  return out;
}

}  // namespace

std::vector<cplx> to_sine_coeffs(std::span<const cplx> values) {
  const double h = 1.0 / static_cast<double>(values.size() + 1);
  return sine_transform(values, h * std::numbers::sqrt2);
}

std::vector<cplx> from_sine_coeffs(std::span<const cplx> coeffs) {
  return sine_transform(coeffs, std::numbers::sqrt2);
}

std::vector<cplx> spectral_exact_step(const SpectralProblem& p, std::span<const cplx> u,
                                      std::span<const cplx> f, double tau) {
  check_sizes(p, u, f);
  std::vector<cplx> out(p.modes());
  for (std::size_t j = 0; j < p.modes(); ++j) {
    out[j] = affine_flow(tau, p.lambda[j], u[j], f[j]);
  }
  return out;
}

std::vector<cplx> spectral_scheme_step(const SpectralProblem& p, std::span<const cplx> u,
                                       std::span<const cplx> f, std::span<const cplx> q,
                                       double tau, cplx a) {
  check_sizes(p, u, f);
  check_sizes(p, q, q);
  const cplx abar = std::conj(a);
  std::vector<cplx> out(p.modes());
  for (std::size_t j = 0; j < p.modes(); ++j) {
    const double l = p.lambda[j];
    const cplx e = std::exp(tau * l);
    const cplx weight = a * e + 0.5 * std::exp(2.0 * abar * tau * l) + abar;
    out[j] = e * u[j] + tau * weight * (f[j] - q[j]) + integrated_exp(tau, l) * q[j];
  }
  return out;
}

std::vector<cplx> spectral_composition_step(SchemeId id, const SpectralProblem& p,
                                            std::span<const cplx> u, std::span<const cplx> f,
                                            std::span<const cplx> q, double tau) {
  check_sizes(p, u, f);
  check_sizes(p, q, q);
  const double c = ComplexCoeffs::c;
  std::vector<cplx> out(p.modes());
  for (std::size_t j = 0; j < p.modes(); ++j) {
    const double l = p.lambda[j];
    const cplx fj = f[j];
    const cplx qj = q[j];
    cplx x = u[j];
    switch (id) {
      case SchemeId::StrangNaiv:
        x += 0.5 * tau * fj;
        x = affine_flow(tau, l, x, 0.0);
        x += 0.5 * tau * fj;
        break;
      case SchemeId::StrangCorr:
        x += 0.5 * tau * fj;
        x -= 0.5 * tau * qj;
        x = affine_flow(tau, l, x, qj);
        x -= 0.5 * tau * qj;
        x += 0.5 * tau * fj;
        break;
      case SchemeId::C3Naiv:
        x += kA * tau * fj;
        x = affine_flow(2.0 * kA * tau, l, x, 0.0);
        x += c * tau * fj;
        x = affine_flow(2.0 * kAbar * tau, l, x, 0.0);
        x += kAbar * tau * fj;
        break;
      case SchemeId::C3New:
        x += kA * tau * fj;
        x -= kA * tau * qj;
        x = affine_flow(2.0 * kA * tau, l, x, qj);
        x -= kA * tau * qj;
        x += c * tau * fj;
        x -= kAbar * tau * qj;
        x = affine_flow(2.0 * kAbar * tau, l, x, qj);
        x -= kAbar * tau * qj;
        x += kAbar * tau * fj;
        break;
    }
    out[j] = x;
  }
  return out;
}

ConvergenceReport estimate_order(std::span<const double> tau, std::span<const double> error) {
  if (tau.size() != error.size()) {
    throw ConfigError("tau and error ladders differ in length");
  }
  if (tau.size() < 3) {
    throw ConfigError("order estimation needs at least 3 ladder points");
  }
  ConvergenceReport rep;
  rep.tau.assign(tau.begin(), tau.end());
  rep.error.assign(error.begin(), error.end());
  for (std::size_t k = 0; k < tau.size(); ++k) {
    if (!(error[k] > 0.0) || !std::isfinite(error[k])) {
      throw ConfigError("order estimation needs positive finite errors");
    }
    if (!(tau[k] > 0.0) || (k > 0 && !(tau[k] < tau[k - 1]))) {
      throw ConfigError("tau ladder must be positive and strictly decreasing");
    }
  }
  for (std::size_t k = 0; k + 1 < tau.size(); ++k) {
    rep.pairwise.push_back(std::log(error[k] / error[k + 1]) / std::log(tau[k] / tau[k + 1]));
  }
  rep.slope = filtered_slope(tau, error, 0.0);
  return rep;
}

double filtered_slope(std::span<const double> tau, std::span<const double> error, double floor,
                      std::size_t* used) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < tau.size() && k < error.size(); ++k) {
    if (!(error[k] > 10.0 * floor) || !(error[k] > 0.0)) continue;
    const double x = std::log(tau[k]);
    const double y = std::log(error[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (used != nullptr) *used = n;
  if (n < 2) return std::nan("");
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace csplit::analysis

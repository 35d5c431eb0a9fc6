#pragma once
// Scalar and spectral oracles for the third-order complex splitting, and
// convergence-order estimation.

#include <cstddef>
#include <span>
#include <vector>

#include "csplit/mesh.hpp"
#include "csplit/schemes.hpp"

namespace csplit::analysis {

/// alpha_k = a + 2^{k-1} abar^k - 1/(k+1), the Taylor coefficients of S.
cplx alpha(int k);

/// S(z) = a e^z + e^{2 abar z}/2 + abar - (e^z - 1)/z: the local defect of the
/// corrected third-order step, delta = tau S(tau A)(f - q).
cplx S(cplx z);
cplx S_direct(cplx z);
/// z^3 sum_{k>=0} alpha_{k+3} z^k / (k+3)!; accurate for |z| <= 1.
cplx S_series(cplx z);
/// |z| below which S() uses the series.
inline constexpr double kSeriesRadius = 1.0;

/// Real and imaginary parts of S on the real axis, written with
/// e^{2 abar z} = e^{z/2} (cos(z/sqrt 12) + i sin(z/sqrt 12)).
double S_real_part(double z);
double S_imag_part(double z);

struct SBoundsReport {
  std::size_t points = 0;
  std::size_t violations = 0;
  std::vector<double> violating_z;
  /// max of |S(z)| / bound over each branch (<= 1 means no violation).
  double max_ratio_right = 0.0;  // z >= -1, bound |z|^3 e^z
  double max_ratio_left = 0.0;   // z <= -1, bound sqrt(3/2) |z|^3
  /// sup over the sampled z <= -1 of |S(z) z^-3| and where it is attained.
  double sup_left = 0.0;
  double sup_left_at = 0.0;
};

/// Checks |S(z)| <= |z|^3 e^z on [-1, 50] and |S(z)| <= sqrt(3/2)|z|^3 on
/// [-1e6, -1], each on `points_per_branch` log-spaced points.
SBoundsReport check_S_bounds(std::size_t points_per_branch = 10000);

/// Eigenpairs of the 1D Dirichlet Laplacian on (0,1) in the basis
/// e_j = sqrt 2 sin(j pi x), j = 1..J.
struct SpectralProblem {
  std::vector<double> lambda;

  /// lambda_j = -(j pi)^2
  static SpectralProblem continuous(std::size_t modes);
  /// lambda_k = -(2/dx^2)(1 - cos(k pi dx)), k = 1..n, dx = 1/(n+1)
  static SpectralProblem discrete(std::size_t n);

  std::size_t modes() const noexcept { return lambda.size(); }
};

/// Coefficients of interior grid values in the discrete sine basis, orthonormal
/// for the inner product dx sum u_i conj(v_i). Inverse of from_sine_coeffs.
std::vector<cplx> to_sine_coeffs(std::span<const cplx> values);
std::vector<cplx> from_sine_coeffs(std::span<const cplx> coeffs);

/// e^{tau l} u + (e^{tau l} - 1) l^-1 f per mode.
std::vector<cplx> spectral_exact_step(const SpectralProblem& p, std::span<const cplx> u,
                                      std::span<const cplx> f, double tau);

/// Closed form of one corrected third-order step:
/// e^{tau l} u + tau (a e^{tau l} + e^{2 abar tau l}/2 + abar)(f - q) + (e^{tau l} - 1) l^-1 q.
/// `a` may be overridden (abar is taken as its conjugate) for mutation checks.
std::vector<cplx> spectral_scheme_step(const SpectralProblem& p, std::span<const cplx> u,
                                       std::span<const cplx> f, std::span<const cplx> q,
                                       double tau, cplx a = ComplexCoeffs::a);

/// Per-mode evaluation of one step of any scheme, composing the scalar flows
/// with closed-form exponentials. q is ignored by the uncorrected schemes.
std::vector<cplx> spectral_composition_step(SchemeId id, const SpectralProblem& p,
                                            std::span<const cplx> u, std::span<const cplx> f,
                                            std::span<const cplx> q, double tau);

struct ConvergenceReport {
  std::vector<double> tau;
  std::vector<double> error;
  /// log2(err_k / err_{k+1}) scaled by the actual tau ratio; size tau.size() - 1.
  std::vector<double> pairwise;
  /// Least-squares slope of log(error) against log(tau).
  double slope = 0.0;
};

/// Needs at least 3 points, strictly decreasing tau and positive errors.
ConvergenceReport estimate_order(std::span<const double> tau, std::span<const double> error);

/// Least-squares slope over the points whose error exceeds 10 * floor. Returns
/// NaN when fewer than two points survive.
double filtered_slope(std::span<const double> tau, std::span<const double> error, double floor,
                      std::size_t* used = nullptr);

}  // namespace csplit::analysis

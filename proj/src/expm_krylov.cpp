#include "csplit/expm_krylov.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "csplit/error.hpp"
#include "csplit/kernels.hpp"

namespace csplit {

void ExpmvConfig::validate() const {
  if (!(tol > 0.0)) {
    throw ConfigError("expmv tolerance must be positive");
  }
  if (max_krylov_dim < 2) {
    throw ConfigError("expmv needs max_krylov_dim >= 2");
  }
  if (max_substeps < 1) {
    throw ConfigError("expmv needs max_substeps >= 1");
  }
}

namespace {

// Krylov dimensions at which convergence is tested.
bool is_checkpoint(std::size_t m) {
  static constexpr std::size_t kChecks[] = {2,  3,  4,  5,  6,  8,  10, 12, 14, 17, 20, 24, 28,
                                            32, 37, 42, 48, 54, 61, 68, 76, 85, 95, 100};
  return std::find(std::begin(kChecks), std::end(kChecks), m) != std::end(kChecks);
}

struct Workspace {
  std::vector<cplx> basis;  // column-major, n x (m_max + 1)
  void ensure(std::size_t n, std::size_t cols) {
    if (basis.size() < n * cols) {
      basis.resize(n * cols);
    }
  }
};

Workspace& workspace() {
  thread_local Workspace ws;
  return ws;
}

struct Projection {
  Eigen::VectorXcd expo;  // e^{hsH} e1
  double error = 0.0;
};

// Small-matrix exponential of the step h s H_m together with phi1, via
// exp([[hsH, e1], [0, 0]]) = [[e^{hsH}, phi1(hsH) e1], [0, 1]].
Projection project(const Eigen::MatrixXcd& hess, std::size_t m, cplx hs, double beta,
                   double subdiag, bool breakdown) {
  Eigen::MatrixXcd aug = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m + 1),
                                                static_cast<Eigen::Index>(m + 1));
  aug.topLeftCorner(m, m) = hs * hess.topLeftCorner(m, m);
  aug(0, static_cast<Eigen::Index>(m)) = 1.0;
  const Eigen::MatrixXcd e = aug.exp();
  Projection out;
  out.expo = e.col(0).head(m);
  if (breakdown) {
    out.error = 0.0;
  } else {
    // integrated residual: beta h_{m+1,m} |hs| |e_m^T phi1(hsH) e1|
    const double phi_tail =
        std::abs(e(static_cast<Eigen::Index>(m - 1), static_cast<Eigen::Index>(m)));
    out.error = beta * subdiag * std::abs(hs) * phi_tail;
  }
  return out;
}

}  // namespace

std::vector<cplx> expmv(cplx s, const LinearOperator& op, std::span<const cplx> v,
                        const ExpmvConfig& cfg, ExpmvStats* stats) {
  cfg.validate();
  if (s.real() < 0.0) {
    throw ConfigError("expmv: step with negative real part (backward diffusion) rejected");
  }
  ExpmvStats local;
  std::vector<cplx> w(v.begin(), v.end());
  const std::size_t n = w.size();
  double beta = std::sqrt(kernels::norm2_sq(w));
  if (s == cplx(0.0, 0.0) || beta == 0.0 || n == 0) {
    if (stats != nullptr) *stats = local;
    return w;
  }
  for (const cplx& z : w) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw ConfigError("expmv: input vector is not finite");
    }
  }

  const std::size_t m_max = std::min(cfg.max_krylov_dim, n);
  Workspace& ws = workspace();
  ws.ensure(n, m_max + 1);
  auto col = [&](std::size_t k) { return std::span<cplx>(ws.basis.data() + k * n, n); };

  Eigen::MatrixXcd hess = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m_max + 1),
                                                 static_cast<Eigen::Index>(m_max));
  double remaining = 1.0;

  while (remaining > 0.0) {
    if (local.substeps >= cfg.max_substeps) {
      throw AccuracyError("expmv: substep budget exhausted", local.error_estimate);
    }
    hess.setZero();
    std::copy(w.begin(), w.end(), col(0).begin());
    kernels::scale(1.0 / beta, col(0));

    double op_scale = 0.0;
    std::size_t m = 0;
    bool breakdown = false;
    bool accepted = false;
    double h = remaining;
    Projection proj;

    for (std::size_t j = 0; j < m_max; ++j) {
      std::span<cplx> next = col(j + 1);
      op(col(j), next);
      ++local.matvecs;
      // modified Gram-Schmidt, one pass plus a selective second pass
      const double norm_before = std::sqrt(kernels::norm2_sq(next));
      for (std::size_t i = 0; i <= j; ++i) {
        const cplx c = kernels::dotc(col(i), next);
        hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += c;
        kernels::axpy(-c, col(i), next);
      }
      double subdiag = std::sqrt(kernels::norm2_sq(next));
      if (subdiag < 0.5 * norm_before) {
        for (std::size_t i = 0; i <= j; ++i) {
          const cplx c = kernels::dotc(col(i), next);
          hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += c;
          kernels::axpy(-c, col(i), next);
        }
        subdiag = std::sqrt(kernels::norm2_sq(next));
      }
      for (std::size_t i = 0; i <= j; ++i) {
        op_scale = std::max(op_scale, std::abs(hess(static_cast<Eigen::Index>(i),
                                                    static_cast<Eigen::Index>(j))));
      }
      op_scale = std::max(op_scale, subdiag);
      hess(static_cast<Eigen::Index>(j + 1), static_cast<Eigen::Index>(j)) = subdiag;
      m = j + 1;
      if (subdiag <= 1e-14 * op_scale || subdiag == 0.0) {
        breakdown = true;
        local.happy_breakdown = true;
      } else {
        kernels::scale(1.0 / subdiag, next);
      }
      if (breakdown || m == m_max || is_checkpoint(m)) {
        proj = project(hess, m, h * s, beta, subdiag, breakdown);
        if (proj.error <= cfg.tol * beta) {
          accepted = true;
          break;
        }
      }
      if (breakdown) break;
    }

    if (!accepted) {
      // basis exhausted: shrink the substep on the same Krylov space
      const double subdiag = std::abs(hess(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m - 1)));
      for (int attempt = 0; attempt < 200 && !accepted; ++attempt) {
        const double ratio = cfg.tol * beta / std::max(proj.error, 1e-300);
        const double factor = std::clamp(0.9 * std::pow(ratio, 1.0 / static_cast<double>(m + 1)),
                                         0.05, 0.9);
        h *= factor;
        proj = project(hess, m, h * s, beta, subdiag, false);
        accepted = proj.error <= cfg.tol * beta;
      }
      if (!accepted) {
        std::ostringstream msg;
        msg << "expmv: no substep meets tol " << cfg.tol << " with Krylov dimension " << m;
        throw AccuracyError(msg.str(), proj.error / beta);
      }
    }

    // w = beta V_m e^{hsH} e1
    std::fill(w.begin(), w.end(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      kernels::axpy(beta * proj.expo(static_cast<Eigen::Index>(i)), col(i), w);
    }
    local.error_estimate = std::max(local.error_estimate, proj.error / beta);
    local.max_dim_used = std::max(local.max_dim_used, m);
    ++local.substeps;
    remaining = (h >= remaining) ? 0.0 : remaining - h;
    beta = std::sqrt(kernels::norm2_sq(w));
    if (beta == 0.0) break;
  }
  if (stats != nullptr) *stats = local;
  return w;
}

namespace {

// phi_0 = exp, phi_1(z) = (e^z - 1)/z, phi_2(z) = (e^z - 1 - z)/z^2
cplx phi(int k, cplx z) {
  if (std::abs(z) < 0.5) {
    // sum_j z^j / (j + k)!
    cplx sum(0.0, 0.0), term(1.0, 0.0);
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    term /= fact;
    for (int j = 0; j < 30; ++j) {
      sum += term;
      term *= z / static_cast<double>(j + k + 1);
    }
    return sum;
  }
  const cplx e = std::exp(z);
  if (k == 0) return e;
  if (k == 1) return (e - 1.0) / z;
  return (e - 1.0 - z) / (z * z);
}

// Lanczos basis of a real symmetric matrix and the eigendecomposition of its
// tridiagonal projection T = Q diag(theta) Q^T.
struct Lanczos {
  std::vector<cplx> basis;  // column-major, n x (m + 1)
  std::size_t n = 0;
  std::size_t m = 0;
  double beta = 0.0;       // norm of the start vector
  double last_beta = 0.0;  // T(m, m-1) of the extended matrix
  bool breakdown = false;
  Eigen::VectorXd theta;
  Eigen::MatrixXd q;

  std::span<cplx> col(std::size_t k) { return {basis.data() + k * n, n}; }

  // First and last components of f(hs T) e1 in the eigenbasis.
  template <class F>
  cplx last_component(F&& f) const {
    cplx acc(0.0, 0.0);
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      acc += q(static_cast<Eigen::Index>(m - 1), k) * f(theta(k)) * q(0, k);
    }
    return acc;
  }

  // beta V f(T) e1
  template <class F>
  void combine(F&& f, std::span<cplx> out) {
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m));
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const cplx c = f(theta(k)) * q(0, k);
      for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) y(i) += q(i, k) * c;
    }
    std::fill(out.begin(), out.end(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      kernels::axpy(beta * y(static_cast<Eigen::Index>(i)), col(i), out);
    }
  }

  // Runs the recurrence from `start`, testing accept() at checkpoints.
  template <class Accept>
  void run(const CsrView& a, std::span<const cplx> start, std::size_t m_max, ExpmvStats& st,
           Accept&& accept) {
    n = start.size();
    if (basis.size() < n * (m_max + 1)) basis.resize(n * (m_max + 1));
    beta = std::sqrt(kernels::norm2_sq(start));
    std::copy(start.begin(), start.end(), col(0).begin());
    kernels::scale(1.0 / beta, col(0));
    std::vector<double> diag, sub;
    double op_scale = 0.0;
    breakdown = false;
    for (std::size_t j = 0; j < m_max; ++j) {
      std::span<cplx> next = col(j + 1);
      kernels::csr_matvec(a, col(j), next);
      ++st.matvecs;
      if (j > 0) kernels::axpy(-sub[j - 1], col(j - 1), next);
      const double alpha = kernels::dotc(col(j), next).real();
      kernels::axpy(-alpha, col(j), next);
      // one local reorthogonalization against the two latest vectors
      const cplx c0 = kernels::dotc(col(j), next);
      kernels::axpy(-c0, col(j), next);
      if (j > 0) {
        const cplx c1 = kernels::dotc(col(j - 1), next);
        kernels::axpy(-c1, col(j - 1), next);
      }
      const double b = std::sqrt(kernels::norm2_sq(next));
      diag.push_back(alpha + c0.real());
      op_scale = std::max({op_scale, std::abs(diag.back()), b});
      m = j + 1;
      last_beta = b;
      if (b <= 1e-14 * op_scale) {
        breakdown = true;
      } else {
        kernels::scale(1.0 / b, next);
        sub.push_back(b);
      }
      if (breakdown || m == m_max || is_checkpoint(m)) {
        decompose(diag, sub);
        if (breakdown || accept()) return;
      }
    }
  }

  void decompose(const std::vector<double>& diag, const std::vector<double>& sub) {
    const auto mm = static_cast<Eigen::Index>(m);
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), mm);
    Eigen::VectorXd e(std::max<Eigen::Index>(mm - 1, 0));
    for (Eigen::Index i = 0; i + 1 < mm; ++i) e(i) = sub[static_cast<std::size_t>(i)];
    if (mm == 1) {
      theta = d;
      q = Eigen::MatrixXd::Ones(1, 1);
      return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    theta = es.eigenvalues();
    q = es.eigenvectors();
  }
};

thread_local Lanczos tl_state;
thread_local Lanczos tl_source;

// Estimated error of beta V phi_k(hs T) e1 scaled as in the exact flow
// (k = 0: e^{hsA} v, k = 1: hs phi1(hsA) g).
double lanczos_error(const Lanczos& l, int k, cplx hs) {
  if (l.breakdown) return 0.0;
  const cplx tail = l.last_component([&](double th) { return phi(k + 1, hs * th); });
  const double scale = k == 0 ? std::abs(hs) : std::abs(hs) * std::abs(hs);
  return l.beta * l.last_beta * scale * std::abs(tail);
}

// Largest h in (0, upper] with err(h) <= target, or 0.
template <class Err>
double largest_step(Err&& err, double upper, double target) {
  double ok = upper;
  int halvings = 0;
  while (err(ok) > target) {
    ok *= 0.5;
    if (++halvings > 1000 || ok == 0.0) return 0.0;
  }
  if (halvings == 0) return ok;
  double bad = 2.0 * ok;
  for (int it = 0; it < 40; ++it) {
    const double mid = std::sqrt(ok * bad);
    (err(mid) <= target ? ok : bad) = mid;
  }
  return ok;
}

void expmv_symmetric_inplace(cplx s, const CsrView& a, std::vector<cplx>& w,
                             const ExpmvConfig& cfg, ExpmvStats& st) {
  const std::size_t m_max = std::min(cfg.max_krylov_dim, w.size());
  Lanczos& l = tl_state;
  double remaining = 1.0;
  while (remaining > 0.0) {
    const double beta = std::sqrt(kernels::norm2_sq(w));
    if (beta == 0.0) return;
    if (st.substeps >= cfg.max_substeps) {
      throw AccuracyError("expmv: substep budget exhausted", st.error_estimate);
    }
    const double target = cfg.tol * beta;
    l.run(a, w, m_max, st,
          [&] { return lanczos_error(l, 0, remaining * s) <= target; });
    double h = remaining;
    if (lanczos_error(l, 0, h * s) > target) {
      h = largest_step([&](double x) { return lanczos_error(l, 0, x * s); }, remaining, target);
      if (h == 0.0) {
        throw AccuracyError("expmv: no substep meets the tolerance", 1.0);
      }
    }
    const cplx hs = h * s;
    st.error_estimate = std::max(st.error_estimate, lanczos_error(l, 0, hs) / beta);
    st.max_dim_used = std::max(st.max_dim_used, l.m);
    st.happy_breakdown = st.happy_breakdown || l.breakdown;
    ++st.substeps;
    l.combine([&](double th) { return std::exp(hs * th); }, w);
    remaining = h >= remaining ? 0.0 : remaining - h;
  }
}

}  // namespace

Field expmv(cplx s, const CsrMatrix& matrix, const Field& v, const ExpmvConfig& cfg,
            ExpmvStats* stats) {
  const CsrView view = matrix.view();
  if (matrix.symmetric) {
    cfg.validate();
    if (s.real() < 0.0) {
      throw ConfigError("expmv: step with negative real part (backward diffusion) rejected");
    }
    ExpmvStats local;
    std::vector<cplx> w(v.values().begin(), v.values().end());
    if (s != cplx(0.0, 0.0)) expmv_symmetric_inplace(s, view, w, cfg, local);
    if (stats != nullptr) *stats = local;
    return Field(v.mesh_ptr(), std::move(w));
  }
  LinearOperator op = [&view](std::span<const cplx> x, std::span<cplx> y) {
    kernels::csr_matvec(view, x, y);
  };
  return Field(v.mesh_ptr(), expmv(s, op, v.values(), cfg, stats));
}

Field expmv_affine(cplx s, const CsrMatrix& matrix, std::span<const cplx> g, const Field& v,
                   const ExpmvConfig& cfg, ExpmvStats* stats) {
  const std::size_t n = v.size();
  if (g.size() != n) {
    throw ConfigError("expmv_affine: inhomogeneity length does not match the state");
  }
  const double g_norm = std::sqrt(kernels::norm2_sq(g));
  if (g_norm == 0.0 || s == cplx(0.0, 0.0)) {
    return expmv(s, matrix, v, cfg, stats);
  }
  if (matrix.symmetric) {
    cfg.validate();
    if (s.real() < 0.0) {
      throw ConfigError("expmv: step with negative real part (backward diffusion) rejected");
    }
    // K equal substeps w <- e^{hsL} w + p with p = hs phi1(hsL) g from one
    // Lanczos basis of g.
    ExpmvStats local;
    const CsrView view = matrix.view();
    Lanczos& lg = tl_source;
    const std::size_t m_max = std::min(cfg.max_krylov_dim, n);
    auto err = [&](double h) { return lanczos_error(lg, 1, h * s) / (h * std::abs(s)); };
    const double target = cfg.tol * g_norm;
    lg.run(view, g, m_max, local, [&] { return err(1.0) <= target; });
    std::size_t parts = 1;
    if (err(1.0) > target) {
      const double h = largest_step(err, 1.0, target);
      if (h == 0.0 || 1.0 / h > static_cast<double>(cfg.max_substeps)) {
        throw AccuracyError("expmv_affine: substep budget exhausted", 1.0);
      }
      parts = static_cast<std::size_t>(std::ceil(1.0 / h));
      while (err(1.0 / static_cast<double>(parts)) > target) ++parts;
    }
    const cplx hs = s / static_cast<double>(parts);
    std::vector<cplx> p(n);
    lg.combine([&](double th) { return hs * phi(1, hs * th); }, p);
    local.error_estimate = err(1.0 / static_cast<double>(parts)) / g_norm;
    local.max_dim_used = lg.m;

    std::vector<cplx> w(v.values().begin(), v.values().end());
    for (std::size_t k = 0; k < parts; ++k) {
      expmv_symmetric_inplace(hs, view, w, cfg, local);
      kernels::axpy(1.0, p, w);
    }
    if (stats != nullptr) *stats = local;
    return Field(v.mesh_ptr(), std::move(w));
  }

  const double v_norm = std::sqrt(kernels::norm2_sq(v.values()));
  // Scale of the appended coordinate; the operator carries g / eta so the
  // product is independent of eta.
  double eta = v_norm > 0.0 ? v_norm : std::abs(s) * g_norm;
  if (!(eta > 0.0)) eta = 1.0;
  const double inv_eta = 1.0 / eta;

  const CsrView view = matrix.view();
  LinearOperator op = [&](std::span<const cplx> x, std::span<cplx> y) {
    kernels::csr_matvec(view, x.first(n), y.first(n));
    kernels::axpy(x[n] * inv_eta, g, y.first(n));
    y[n] = 0.0;
  };
  std::vector<cplx> start(n + 1);
  std::copy(v.values().begin(), v.values().end(), start.begin());
  start[n] = eta;
  std::vector<cplx> out = expmv(s, op, start, cfg, stats);
  out.resize(n);
  return Field(v.mesh_ptr(), std::move(out));
}

}  // namespace csplit

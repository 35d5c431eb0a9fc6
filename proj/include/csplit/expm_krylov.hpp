#pragma once
// Action of e^{sL} and of the affine flow e^{sL} v + s phi1(sL) g for real sparse
// L and complex scalar steps s, by Arnoldi projection with substepping.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "csplit/mesh.hpp"

namespace csplit {

struct ExpmvConfig {
  /// Relative accuracy target per substep, measured against the Krylov start vector.
  double tol = 1e-12;
  std::size_t max_krylov_dim = 100;
  std::size_t max_substeps = 100000;

  void validate() const;
};

/// Optional diagnostics of one call.
struct ExpmvStats {
  std::size_t substeps = 0;
  std::size_t matvecs = 0;
  std::size_t max_dim_used = 0;
  bool happy_breakdown = false;
  double error_estimate = 0.0;
};

/// Square linear operator acting on complex vectors: y = A x.
using LinearOperator = std::function<void(std::span<const cplx> x, std::span<cplx> y)>;

/// w = e^{s A} v for a generic operator of dimension v.size().
std::vector<cplx> expmv(cplx s, const LinearOperator& op, std::span<const cplx> v,
                        const ExpmvConfig& cfg, ExpmvStats* stats = nullptr);

/// w = e^{s L} v
Field expmv(cplx s, const CsrMatrix& matrix, const Field& v, const ExpmvConfig& cfg,
            ExpmvStats* stats = nullptr);

/// w = e^{s L} v + s phi1(s L) g, phi1(z) = (e^z - 1)/z: the exact solution of
/// u' = L u + g over the complex time s. Computed through the augmented matrix
/// [[L, g], [0, 0]] acting on [v; 1].
Field expmv_affine(cplx s, const CsrMatrix& matrix, std::span<const cplx> g, const Field& v,
                   const ExpmvConfig& cfg, ExpmvStats* stats = nullptr);

}  // namespace csplit

#pragma once
// Data-parallel inner loops used by the Krylov exponential and the flows.
//
// Every kernel has a scalar reference implementation; an AVX2/FMA variant is
// compiled when the toolchain supports it and selected at runtime when the CPU
// does. Set CSPLIT_KERNELS=scalar (or avx2) in the environment to force a table.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace csplit {

using cplx = std::complex<double>;

/// Read-only view of a real CSR matrix.
struct CsrView {
  std::size_t rows = 0;
  const std::int64_t* row_ptr = nullptr;  // rows + 1 entries
  const std::int64_t* col_idx = nullptr;
  const double* values = nullptr;
};

namespace kernels {

struct KernelTable {
  std::string_view name;
  /// y = A x
  void (*csr_matvec)(const CsrView& a, const cplx* x, cplx* y);
  /// y += alpha x
  void (*axpy)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
  /// y += alpha x, x real
  void (*axpy_real)(cplx alpha, const double* x, cplx* y, std::size_t n);
  /// x *= alpha
  void (*scale)(cplx alpha, cplx* x, std::size_t n);
  /// sum conj(x_i) y_i
  cplx (*dotc)(const cplx* x, const cplx* y, std::size_t n);
  /// sum |x_i|^2
  double (*norm2_sq)(const cplx* x, std::size_t n);
};

const KernelTable& scalar_table();

/// nullptr when the variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// The table every library routine dispatches through; chosen once per process.
const KernelTable& active();

// Span wrappers over active(). Sizes must agree; this is not checked in release builds.
void csr_matvec(const CsrView& a, std::span<const cplx> x, std::span<cplx> y);
void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
void axpy_real(cplx alpha, std::span<const double> x, std::span<cplx> y);
void scale(cplx alpha, std::span<cplx> x);
cplx dotc(std::span<const cplx> x, std::span<const cplx> y);
double norm2_sq(std::span<const cplx> x);

}  // namespace kernels
}  // namespace csplit

#include "csplit/kernels.hpp"

namespace csplit::kernels {
namespace {

void csr_matvec_scalar(const CsrView& a, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    double re = 0.0;
    double im = 0.0;
    for (std::int64_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const double v = a.values[k];
      const cplx xv = x[a.col_idx[k]];
      re += v * xv.real();
      im += v * xv.imag();
    }
    y[i] = cplx(re, im);
  }
}

void axpy_scalar(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const double ar = alpha.real();
  const double ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real();
    const double xi = x[i].imag();
    y[i] = cplx(y[i].real() + (ar * xr - ai * xi), y[i].imag() + (ar * xi + ai * xr));
  }
}

void axpy_real_scalar(cplx alpha, const double* x, cplx* y, std::size_t n) {
  const double ar = alpha.real();
  const double ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = cplx(y[i].real() + ar * x[i], y[i].imag() + ai * x[i]);
  }
}

void scale_scalar(cplx alpha, cplx* x, std::size_t n) {
  const double ar = alpha.real();
  const double ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real();
    const double xi = x[i].imag();
    x[i] = cplx(ar * xr - ai * xi, ar * xi + ai * xr);
  }
}

cplx dotc_scalar(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double norm2_sq_scalar(const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  }
  return s;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",         csr_matvec_scalar, axpy_scalar,       axpy_real_scalar,
      scale_scalar,     dotc_scalar,       norm2_sq_scalar,
  };
  return table;
}

}  // namespace csplit::kernels

// AVX2/FMA kernel variants. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing here may run before the dispatcher has checked the CPU.

#include <immintrin.h>

#include "csplit/kernels.hpp"

namespace csplit::kernels {
namespace {

// Two complex numbers per register, interleaved [re0, im0, re1, im1].
inline __m256d load2(const cplx* p) {
  return _mm256_loadu_pd(reinterpret_cast<const double*>(p));
}
inline void store2(cplx* p, __m256d v) {
  _mm256_storeu_pd(reinterpret_cast<double*>(p), v);
}
inline __m128d load1(const cplx* p) {
  return _mm_loadu_pd(reinterpret_cast<const double*>(p));
}
inline void store1(cplx* p, __m128d v) {
  _mm_storeu_pd(reinterpret_cast<double*>(p), v);
}

// alpha * x for a broadcast complex alpha.
inline __m256d cmul(__m256d ar, __m256d ai, __m256d x) {
  const __m256d swapped = _mm256_permute_pd(x, 0b0101);
  return _mm256_fmaddsub_pd(ar, x, _mm256_mul_pd(ai, swapped));
}
inline __m128d cmul(__m128d ar, __m128d ai, __m128d x) {
  const __m128d swapped = _mm_permute_pd(x, 0b01);
  return _mm_fmaddsub_pd(ar, x, _mm_mul_pd(ai, swapped));
}

void csr_matvec_avx2(const CsrView& a, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    const std::int64_t begin = a.row_ptr[i];
    const std::int64_t end = a.row_ptr[i + 1];
    __m256d acc = _mm256_setzero_pd();
    std::int64_t k = begin;
    for (; k + 1 < end; k += 2) {
      const __m128d x0 = load1(x + a.col_idx[k]);
      const __m128d x1 = load1(x + a.col_idx[k + 1]);
      const __m256d xv = _mm256_insertf128_pd(_mm256_castpd128_pd256(x0), x1, 1);
      const __m256d vv = _mm256_set_pd(a.values[k + 1], a.values[k + 1], a.values[k], a.values[k]);
      acc = _mm256_fmadd_pd(vv, xv, acc);
    }
    __m128d sum = _mm_add_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
    if (k < end) {
      sum = _mm_fmadd_pd(_mm_set1_pd(a.values[k]), load1(x + a.col_idx[k]), sum);
    }
    store1(y + i, sum);
  }
}

void axpy_avx2(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    store2(y + i, _mm256_add_pd(load2(y + i), cmul(ar, ai, load2(x + i))));
  }
  if (i < n) {
    const __m128d r = cmul(_mm_set1_pd(alpha.real()), _mm_set1_pd(alpha.imag()), load1(x + i));
    store1(y + i, _mm_add_pd(load1(y + i), r));
  }
}

void axpy_real_avx2(cplx alpha, const double* x, cplx* y, std::size_t n) {
  // [ar, ai, ar, ai] * [x0, x0, x1, x1]
  const __m256d a = _mm256_set_pd(alpha.imag(), alpha.real(), alpha.imag(), alpha.real());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_set_pd(x[i + 1], x[i + 1], x[i], x[i]);
    store2(y + i, _mm256_fmadd_pd(a, xv, load2(y + i)));
  }
  if (i < n) {
    y[i] = cplx(y[i].real() + alpha.real() * x[i], y[i].imag() + alpha.imag() * x[i]);
  }
}

void scale_avx2(cplx alpha, cplx* x, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    store2(x + i, cmul(ar, ai, load2(x + i)));
  }
  if (i < n) {
    store1(x + i, cmul(_mm_set1_pd(alpha.real()), _mm_set1_pd(alpha.imag()), load1(x + i)));
  }
}

inline double hsum(__m256d v) {
  const __m128d s = _mm_add_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

cplx dotc_avx2(const cplx* x, const cplx* y, std::size_t n) {
  // re: sum x*y over all lanes; im: sum of (xr*yi - xi*yr) from x * swap(y)
  __m256d re0 = _mm256_setzero_pd();
  __m256d re1 = _mm256_setzero_pd();
  __m256d im0 = _mm256_setzero_pd();
  __m256d im1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xa = load2(x + i);
    const __m256d ya = load2(y + i);
    const __m256d xb = load2(x + i + 2);
    const __m256d yb = load2(y + i + 2);
    re0 = _mm256_fmadd_pd(xa, ya, re0);
    re1 = _mm256_fmadd_pd(xb, yb, re1);
    im0 = _mm256_fmadd_pd(xa, _mm256_permute_pd(ya, 0b0101), im0);
    im1 = _mm256_fmadd_pd(xb, _mm256_permute_pd(yb, 0b0101), im1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d xa = load2(x + i);
    const __m256d ya = load2(y + i);
    re0 = _mm256_fmadd_pd(xa, ya, re0);
    im0 = _mm256_fmadd_pd(xa, _mm256_permute_pd(ya, 0b0101), im0);
  }
  const __m256d re = _mm256_add_pd(re0, re1);
  const __m256d im = _mm256_add_pd(im0, im1);
  alignas(32) double imv[4];
  _mm256_store_pd(imv, im);
  double sre = hsum(re);
  double sim = (imv[0] - imv[1]) + (imv[2] - imv[3]);
  if (i < n) {
    sre += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    sim += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {sre, sim};
}

double norm2_sq_avx2(const cplx* x, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = load2(x + i);
    const __m256d b = load2(x + i + 2);
    s0 = _mm256_fmadd_pd(a, a, s0);
    s1 = _mm256_fmadd_pd(b, b, s1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d a = load2(x + i);
    s0 = _mm256_fmadd_pd(a, a, s0);
  }
  double s = hsum(_mm256_add_pd(s0, s1));
  if (i < n) {
    s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  }
  return s;
}

}  // namespace

const KernelTable& avx2_table_unchecked() {
  static const KernelTable table{
      "avx2",     csr_matvec_avx2, axpy_avx2,     axpy_real_avx2,
      scale_avx2, dotc_avx2,       norm2_sq_avx2,
  };
  return table;
}

}  // namespace csplit::kernels

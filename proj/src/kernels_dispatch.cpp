#include <cstdlib>
#include <string_view>

#include "csplit/kernels.hpp"

namespace csplit::kernels {

#if defined(CSPLIT_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif

const KernelTable* avx2_table() {
#if defined(CSPLIT_HAVE_AVX2)
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = []() -> const KernelTable& {
    const char* env = std::getenv("CSPLIT_KERNELS");
    const std::string_view want = env != nullptr ? env : "";
    if (want == "scalar") {
      return scalar_table();
    }
    if (const KernelTable* simd = avx2_table(); simd != nullptr) {
      return *simd;
    }
    return scalar_table();
  }();
  return table;
}

void csr_matvec(const CsrView& a, std::span<const cplx> x, std::span<cplx> y) {
  active().csr_matvec(a, x.data(), y.data());
}

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void axpy_real(cplx alpha, std::span<const double> x, std::span<cplx> y) {
  active().axpy_real(alpha, x.data(), y.data(), x.size());
}

void scale(cplx alpha, std::span<cplx> x) { active().scale(alpha, x.data(), x.size()); }

cplx dotc(std::span<const cplx> x, std::span<const cplx> y) {
  return active().dotc(x.data(), y.data(), x.size());
}

double norm2_sq(std::span<const cplx> x) { return active().norm2_sq(x.data(), x.size()); }

}  // namespace csplit::kernels

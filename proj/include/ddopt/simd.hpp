#pragma once

// Inner-loop kernels used by the dense linear algebra layer.
//
// Every kernel has a portable scalar reference implementation. Vector variants
// (AVX2+FMA on x86-64, NEON on AArch64) are compiled into separate translation
// units and chosen once at startup from the CPU feature bits. The selection can
// be forced with DDOPT_SIMD=scalar|avx2|neon, which the equivalence tests use.

#include <cstddef>
#include <string_view>

namespace ddopt::simd {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // sum_i x[i]^2
  double (*sum_sq)(const double* x, std::size_t n);
  // max_i |x[i]|
  double (*max_abs)(const double* x, std::size_t n);
  // y[i] = a[i] - b[i]
  void (*sub)(const double* a, const double* b, double* y, std::size_t n);
};

/// Kernels selected for this process (resolved on first call).
const KernelTable& active();

/// Kernels for a specific ISA; throws std::runtime_error when the CPU or the
/// build does not provide it.
const KernelTable& table_for(Isa isa);

bool is_supported(Isa isa);
std::string_view name(Isa isa);

namespace detail {
extern const KernelTable kScalarTable;
#if defined(DDOPT_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
#if defined(DDOPT_HAVE_NEON)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace ddopt::simd

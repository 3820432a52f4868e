#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ddopt/simd.hpp"

namespace ddopt::simd {
namespace {

bool cpu_has_avx2() {
#if defined(DDOPT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& resolve() {
  if (const char* forced = std::getenv("DDOPT_SIMD")) {
    const std::string want(forced);
    if (want == "scalar") return table_for(Isa::Scalar);
    if (want == "avx2") return table_for(Isa::Avx2);
    if (want == "neon") return table_for(Isa::Neon);
    if (want != "auto") throw std::runtime_error("DDOPT_SIMD: unknown value '" + want + "'");
  }
  if (is_supported(Isa::Avx2)) return table_for(Isa::Avx2);
  if (is_supported(Isa::Neon)) return table_for(Isa::Neon);
  return detail::kScalarTable;
}

}  // namespace

bool is_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
      return cpu_has_avx2();
    case Isa::Neon:
#if defined(DDOPT_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& table_for(Isa isa) {
  if (!is_supported(isa)) {
    throw std::runtime_error("SIMD variant '" + std::string(name(isa)) + "' not available");
  }
  switch (isa) {
    case Isa::Avx2:
#if defined(DDOPT_HAVE_AVX2)
      return detail::kAvx2Table;
#else
      break;
#endif
    case Isa::Neon:
#if defined(DDOPT_HAVE_NEON)
      return detail::kNeonTable;
#else
      break;
#endif
    case Isa::Scalar:
      break;
  }
  return detail::kScalarTable;
}

const KernelTable& active() {
  static const KernelTable& table = resolve();
  return table;
}

}  // namespace ddopt::simd

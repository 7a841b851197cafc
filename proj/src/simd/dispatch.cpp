#include <cstdlib>
#include <string_view>

#include "kernels.hpp"

namespace livediff::simd {

namespace {

const KernelTable kScalar{"scalar", scalar::edge_flux, scalar::dot, scalar::squared_distance,
                          scalar::neg_scaled_exp};

#if LIVEDIFF_HAVE_AVX2_KERNELS
const KernelTable kAvx2{"avx2", avx2::edge_flux, avx2::dot, avx2::squared_distance,
                        avx2::neg_scaled_exp};
#endif

const KernelTable& select() noexcept {
  const char* forced = std::getenv("LIVEDIFF_SIMD");
  if (forced != nullptr && std::string_view(forced) == "scalar") return kScalar;
  if (const auto* t = avx2_kernels()) return *t;
  return kScalar;
}

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

const KernelTable* avx2_kernels() noexcept {
#if LIVEDIFF_HAVE_AVX2_KERNELS
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() noexcept {
  static const KernelTable& table = select();
  return table;
}

}  // namespace livediff::simd

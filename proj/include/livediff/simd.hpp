#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference version and,
// on x86-64 hosts with AVX2+FMA, a vectorized version. The active table is
// chosen once at first use; LIVEDIFF_SIMD=scalar forces the reference path.

#include <cstddef>
#include <string_view>

namespace livediff::simd {

enum class ConductanceKind { Exponential, Rational };

struct KernelTable {
  std::string_view name;

  /// out[k] = g(|b[k] - a[k]|) * (b[k] - a[k]) where g is the conductance
  /// with scale 1/inv_k2 = K^2.
  void (*edge_flux)(const double* a, const double* b, double* out, std::size_t n, double inv_k2,
                    ConductanceKind kind);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);

  /// out[k] = exp(-gamma * in[k]); in and out may alias.
  void (*neg_scaled_exp)(const double* in, double* out, std::size_t n, double gamma);
};

const KernelTable& scalar_kernels() noexcept;

/// Null when the host CPU (or the build target) lacks AVX2+FMA.
const KernelTable* avx2_kernels() noexcept;

const KernelTable& active_kernels() noexcept;

}  // namespace livediff::simd

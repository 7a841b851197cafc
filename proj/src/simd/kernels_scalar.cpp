#include <cmath>

#include "kernels.hpp"

namespace livediff::simd::scalar {

void edge_flux(const double* a, const double* b, double* out, std::size_t n, double inv_k2,
               ConductanceKind kind) {
  if (kind == ConductanceKind::Exponential) {
    for (std::size_t k = 0; k < n; ++k) {
      const double d = b[k] - a[k];
      out[k] = std::exp(-(d * d * inv_k2)) * d;
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const double d = b[k] - a[k];
      out[k] = d / (1.0 + d * d * inv_k2);
    }
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

void neg_scaled_exp(const double* in, double* out, std::size_t n, double gamma) {
  for (std::size_t k = 0; k < n; ++k) out[k] = std::exp(-gamma * in[k]);
}

}  // namespace livediff::simd::scalar

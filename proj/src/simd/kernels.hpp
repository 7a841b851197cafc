#pragma once

#include <cstddef>

#include "livediff/simd.hpp"

namespace livediff::simd {

namespace scalar {
void edge_flux(const double* a, const double* b, double* out, std::size_t n, double inv_k2,
               ConductanceKind kind);
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void neg_scaled_exp(const double* in, double* out, std::size_t n, double gamma);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define LIVEDIFF_HAVE_AVX2_KERNELS 1
namespace avx2 {
void edge_flux(const double* a, const double* b, double* out, std::size_t n, double inv_k2,
               ConductanceKind kind);
double dot(const double* a, const double* b, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void neg_scaled_exp(const double* in, double* out, std::size_t n, double gamma);
}  // namespace avx2
#else
#define LIVEDIFF_HAVE_AVX2_KERNELS 0
#endif

}  // namespace livediff::simd

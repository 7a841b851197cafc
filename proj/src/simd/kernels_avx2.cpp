// AVX2 + FMA variants. Functions carry target attributes instead of the
// translation unit being built with -mavx2, so nothing here leaks into code
// that runs on hosts without AVX2.

#include "kernels.hpp"

#if LIVEDIFF_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <cmath>

#define LIVEDIFF_AVX2 __attribute__((target("avx2,fma")))

namespace livediff::simd::avx2 {

namespace {

// Cephes-style exp: reduce by ln2, rational approximation on [-ln2/2, ln2/2],
// rebuild 2^n in the exponent field. Inputs below the normal range give 0.
LIVEDIFF_AVX2 inline __m256d exp_pd(__m256d x) {
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d lo = _mm256_set1_pd(-708.39);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d fx = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                     _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125E-1), x);
  x = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212E-6), x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, x);
  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.00000000000000000009E0));
  __m256d r = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  r = _mm256_fmadd_pd(r, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  __m256i e = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(fx));
  e = _mm256_slli_epi64(_mm256_add_epi64(e, _mm256_set1_epi64x(1023)), 52);
  r = _mm256_mul_pd(r, _mm256_castsi256_pd(e));
  return _mm256_andnot_pd(underflow, r);
}

LIVEDIFF_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

LIVEDIFF_AVX2 void edge_flux(const double* a, const double* b, double* out, std::size_t n,
                             double inv_k2, ConductanceKind kind) {
  const __m256d scale = _mm256_set1_pd(inv_k2);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t k = 0;
  if (kind == ConductanceKind::Exponential) {
    for (; k + 4 <= n; k += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(b + k), _mm256_loadu_pd(a + k));
      const __m256d t = _mm256_mul_pd(_mm256_mul_pd(d, d), scale);
      _mm256_storeu_pd(out + k, _mm256_mul_pd(exp_pd(_mm256_xor_pd(t, sign)), d));
    }
  } else {
    for (; k + 4 <= n; k += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(b + k), _mm256_loadu_pd(a + k));
      const __m256d t = _mm256_mul_pd(_mm256_mul_pd(d, d), scale);
      _mm256_storeu_pd(out + k, _mm256_div_pd(d, _mm256_add_pd(one, t)));
    }
  }
  if (k < n) scalar::edge_flux(a + k, b + k, out + k, n - k, inv_k2, kind);
}

LIVEDIFF_AVX2 double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4), acc1);
  }
  for (; k + 4 <= n; k += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

LIVEDIFF_AVX2 double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; k + 4 <= n; k += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
    acc0 = _mm256_fmadd_pd(d, d, acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; k < n; ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

LIVEDIFF_AVX2 void neg_scaled_exp(const double* in, double* out, std::size_t n, double gamma) {
  const __m256d g = _mm256_set1_pd(-gamma);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    _mm256_storeu_pd(out + k, exp_pd(_mm256_mul_pd(g, _mm256_loadu_pd(in + k))));
  }
  if (k < n) scalar::neg_scaled_exp(in + k, out + k, n - k, gamma);
}

}  // namespace livediff::simd::avx2

#endif

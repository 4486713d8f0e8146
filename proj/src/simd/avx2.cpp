// Compiled with -mavx2 -mfma. Only reached after a CPUID check in dispatch.cpp.
// Keep this translation unit free of standard-library templates so that no
// AVX-encoded inline function can leak into generic code through the linker.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace nskrr::simd::avx2 {
namespace {

// exp(t) for t <= 709. Range reduction t = n ln2 + r with |r| <= ln2/2, then a
// degree-13 Taylor polynomial (truncation error < 1e-17) and an exponent-field
// scale. Arguments below -708 flush to zero instead of producing subnormals.
inline __m256d exp_pd(__m256d t) {
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(t, lo, _CMP_LT_OQ);
  t = _mm256_min_pd(_mm256_max_pd(t, lo), hi);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(t, _mm256_set1_pd(1.4426950408889634)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93147180369123816490e-01), t);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.90821492927058770002e-10), r);

  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);                // 1/13!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));  // 1/12!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(n32);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  const __m256d scale = _mm256_castsi256_pd(bits);

  return _mm256_andnot_pd(underflow, _mm256_mul_pd(p, scale));
}

inline __m256d neg_sq_scaled(__m256d x, __m256d c, __m256d iw) {
  const __m256d z = _mm256_mul_pd(_mm256_sub_pd(x, c), iw);
  return _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(z, z));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void exp_inplace(double* v, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(v + i, exp_pd(_mm256_loadu_pd(v + i)));
  for (; i < n; ++i) v[i] = std::exp(v[i]);
}

void gaussian_row(double x, const double* centers, double inv_width, double* out, std::size_t n) {
  const __m256d xv = _mm256_set1_pd(x);
  const __m256d iw = _mm256_set1_pd(inv_width);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, exp_pd(neg_sq_scaled(xv, _mm256_loadu_pd(centers + i), iw)));
  }
  for (; i < n; ++i) {
    const double z = (x - centers[i]) * inv_width;
    out[i] = std::exp(-(z * z));
  }
}

double gaussian_weighted_sum(double x, const double* centers, const double* weights,
                             double inv_width, std::size_t n) {
  const __m256d xv = _mm256_set1_pd(x);
  const __m256d iw = _mm256_set1_pd(inv_width);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d e0 = exp_pd(neg_sq_scaled(xv, _mm256_loadu_pd(centers + i), iw));
    const __m256d e1 = exp_pd(neg_sq_scaled(xv, _mm256_loadu_pd(centers + i + 4), iw));
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(weights + i), e0, acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(weights + i + 4), e1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d e0 = exp_pd(neg_sq_scaled(xv, _mm256_loadu_pd(centers + i), iw));
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(weights + i), e0, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double z = (x - centers[i]) * inv_width;
    s += weights[i] * std::exp(-(z * z));
  }
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(a, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace nskrr::simd::avx2

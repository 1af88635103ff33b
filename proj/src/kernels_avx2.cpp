// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; callers must gate on the runtime dispatch in kernels.cpp.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "stopgame/kernels.hpp"

namespace stopgame::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

inline __m256d abs_pd(__m256d v) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  return _mm256_andnot_pd(sign_mask, v);
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                           _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                           acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sup_abs_ratio(const double* f, const double* w, std::size_t n) {
  __m256d best = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ratio =
        _mm256_div_pd(abs_pd(_mm256_loadu_pd(f + i)), _mm256_loadu_pd(w + i));
    best = _mm256_max_pd(best, ratio);
  }
  double acc = hmax(best);
  for (; i < n; ++i) acc = std::max(acc, std::fabs(f[i]) / w[i]);
  return acc;
}

double sup_abs_ratio_diff(const double* x, const double* y, const double* w,
                          std::size_t n) {
  __m256d best = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    best = _mm256_max_pd(best,
                         _mm256_div_pd(abs_pd(d), _mm256_loadu_pd(w + i)));
  }
  double acc = hmax(best);
  for (; i < n; ++i) acc = std::max(acc, std::fabs(x[i] - y[i]) / w[i]);
  return acc;
}

double max_abs_diff(const double* x, const double* y, std::size_t n) {
  __m256d best = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    best = _mm256_max_pd(best, abs_pd(d));
  }
  double acc = hmax(best);
  for (; i < n; ++i) acc = std::max(acc, std::fabs(x[i] - y[i]));
  return acc;
}

void clamp(double* x, const double* lo, const double* hi, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    v = _mm256_max_pd(v, _mm256_loadu_pd(lo + i));
    v = _mm256_min_pd(v, _mm256_loadu_pd(hi + i));
    _mm256_storeu_pd(x + i, v);
  }
  for (; i < n; ++i) {
    x[i] = std::min(std::max(x[i], lo[i]), hi[i]);
  }
}

}  // namespace stopgame::kernels::avx2

#endif  // x86_64

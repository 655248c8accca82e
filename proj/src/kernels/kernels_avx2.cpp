#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "dasim/kernels.hpp"

namespace dasim::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

inline __m256d abs_pd(__m256d v) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  return _mm256_andnot_pd(sign, v);
}

}  // namespace

double sum(std::span<const double> x) {
  const std::size_t n = x.size();
  const double* p = x.data();
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(p + i + 4));
  }
  for (; i + 4 <= n; i += 4) a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += p[i];
  return s;
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  const double* px = x.data();
  const double* py = y.data();
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i + 4), _mm256_loadu_pd(py + i + 4), a1);
  }
  for (; i + 4 <= n; i += 4)
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), a0);
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += px[i] * py[i];
  return s;
}

double abs_diff_sum(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  const double* px = x.data();
  const double* py = y.data();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i));
    acc = _mm256_add_pd(acc, abs_pd(d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(px[i] - py[i]);
  return s;
}

double pinball_sum(std::span<const double> q, std::span<const double> tau, double y) {
  const std::size_t n = std::min(q.size(), tau.size());
  const __m256d vy = _mm256_set1_pd(y);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d u = _mm256_sub_pd(vy, _mm256_loadu_pd(q.data() + j));
    __m256d neg = _mm256_and_pd(_mm256_cmp_pd(u, zero, _CMP_LT_OQ), one);
    __m256d w = _mm256_sub_pd(_mm256_loadu_pd(tau.data() + j), neg);
    acc = _mm256_fmadd_pd(u, w, acc);
  }
  double s = hsum(acc);
  for (; j < n; ++j) {
    double u = y - q[j];
    s += u * (tau[j] - (u < 0.0 ? 1.0 : 0.0));
  }
  return s;
}

double centered_sq_sum(std::span<const double> x, double c) {
  const std::size_t n = x.size();
  const __m256d vc = _mm256_set1_pd(c);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), vc);
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += (x[i] - c) * (x[i] - c);
  return s;
}

}  // namespace dasim::kernels::avx2

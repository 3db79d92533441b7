// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma;
// nothing here runs unless the dispatcher saw those CPU bits at startup.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "specsim/kernels.hpp"

namespace specsim::kernels::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

double dot_avx2(const double* a, const double* b, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc);
  }
  double tail = 0.0;
  for (; k < len; ++k) tail += a[k] * b[k];
  return hsum(acc) + tail;
}

void axpy_avx2(double* y, double c, const double* x, std::size_t len) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    __m256d vy = _mm256_loadu_pd(y + k);
    vy = _mm256_fmadd_pd(vc, _mm256_loadu_pd(x + k), vy);
    _mm256_storeu_pd(y + k, vy);
  }
  for (; k < len; ++k) y[k] += c * x[k];
}

double gather_dot_avx2(const double* table, const double* x,
                       std::uint32_t mask, std::size_t len) {
  const __m256i vmask = _mm256_set1_epi64x(static_cast<long long>(mask));
  const __m256i ramp = _mm256_set_epi64x(3, 2, 1, 0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    __m256i idx = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(k)), ramp);
    idx = _mm256_and_si256(idx, vmask);
    __m256d gathered = _mm256_i64gather_pd(table, idx, 8);
    acc = _mm256_fmadd_pd(gathered, _mm256_loadu_pd(x + k), acc);
  }
  double tail = 0.0;
  for (; k < len; ++k) tail += table[k & mask] * x[k];
  return hsum(acc) + tail;
}

double ratio_weighted_sum_avx2(const double* w, const double* r, double shift,
                               std::size_t len) {
  const __m256d vshift = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    __m256d vr = _mm256_loadu_pd(r + k);
    __m256d num = _mm256_mul_pd(_mm256_loadu_pd(w + k), vr);
    acc = _mm256_add_pd(acc, _mm256_div_pd(num, _mm256_sub_pd(vr, vshift)));
  }
  double tail = 0.0;
  for (; k < len; ++k) tail += w[k] * r[k] / (r[k] - shift);
  return hsum(acc) + tail;
}

double inv_weighted_sum_avx2(const double* w, const double* r, double shift,
                             std::size_t len) {
  const __m256d vshift = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= len; k += 4) {
    __m256d vr = _mm256_loadu_pd(r + k);
    __m256d vw = _mm256_loadu_pd(w + k);
    acc = _mm256_add_pd(acc, _mm256_div_pd(vw, _mm256_sub_pd(vr, vshift)));
  }
  double tail = 0.0;
  for (; k < len; ++k) tail += w[k] / (r[k] - shift);
  return hsum(acc) + tail;
}

}  // namespace specsim::kernels::detail

#endif

#include "synth/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

#include <cmath>

namespace synth::kernels::avx2 {

namespace {
// Lane order matches the scalar reference: (l0 + l1) + (l2 + l3).
inline double reduce(__m256d v) {
  alignas(32) double l[4];
  _mm256_store_pd(l, v);
  return (l[0] + l[1]) + (l[2] + l[3]);
}
}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double s = reduce(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double abs_sum(const double* a, std::size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(a + i)));
  double s = reduce(acc);
  for (; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

}  // namespace synth::kernels::avx2

#else

// Non-x86 builds: the avx2 entry points forward to the reference so the
// dispatch table stays total; isa_available(avx2) reports false.
namespace synth::kernels::avx2 {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
double abs_sum(const double* a, std::size_t n) { return scalar::abs_sum(a, n); }
}  // namespace synth::kernels::avx2

#endif

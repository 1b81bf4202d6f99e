#include "synth/kernels.hpp"

#include <cmath>

namespace synth::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    l0 += a[i] * b[i];
    l1 += a[i + 1] * b[i + 1];
    l2 += a[i + 2] * b[i + 2];
    l3 += a[i + 3] * b[i + 3];
  }
  double s = (l0 + l1) + (l2 + l3);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double abs_sum(const double* a, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    l0 += std::fabs(a[i]);
    l1 += std::fabs(a[i + 1]);
    l2 += std::fabs(a[i + 2]);
    l3 += std::fabs(a[i + 3]);
  }
  double s = (l0 + l1) + (l2 + l3);
  for (; i < n; ++i) s += std::fabs(a[i]);
  return s;
}

}  // namespace synth::kernels::scalar

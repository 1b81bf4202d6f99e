#include "synth/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

using namespace synth;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  // Mixed magnitudes so lane reassociation would show up in the low bits.
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> ex(-20, 20);
  std::vector<double> v(n);
  for (auto& x : v) x = std::ldexp(mant(rng), ex(rng));
  return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("scalar and avx2 kernels agree bit for bit") {
  if (!kernels::isa_available(kernels::Isa::avx2)) {
    MESSAGE("avx2 unavailable; equivalence not exercised");
    return;
  }
  std::mt19937_64 rng(0xd07);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(trial % 67) + (trial % 5 == 0 ? 900 : 0);
    const auto a = random_vec(rng, n), b = random_vec(rng, n);
    CHECK(same_bits(kernels::scalar::dot(a.data(), b.data(), n), kernels::avx2::dot(a.data(), b.data(), n)));
    CHECK(same_bits(kernels::scalar::abs_sum(a.data(), n), kernels::avx2::abs_sum(a.data(), n)));
    auto y1 = b, y2 = b;
    const double alpha = std::ldexp(1.0, trial % 7) * 0.37;
    kernels::scalar::axpy(alpha, a.data(), y1.data(), n);
    kernels::avx2::axpy(alpha, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) REQUIRE(same_bits(y1[i], y2[i]));
  }
}

TEST_CASE("dot and abs_sum match an extended precision sum") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = static_cast<std::size_t>(trial) * 3;
    const auto a = random_vec(rng, n), b = random_vec(rng, n);
    long double ref = 0.0L, mag = 0.0L, abs_ref = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      ref += static_cast<long double>(a[i]) * b[i];
      mag += std::fabs(static_cast<long double>(a[i]) * b[i]);
      abs_ref += std::fabs(static_cast<long double>(a[i]));
    }
    const double tol = 1e-14 * static_cast<double>(mag) + 1e-300;
    CHECK(std::fabs(kernels::dot(a, b) - static_cast<double>(ref)) <= tol);
    CHECK(std::fabs(kernels::abs_sum(a) - static_cast<double>(abs_ref)) <= 1e-14 * static_cast<double>(abs_ref) + 1e-300);
  }
}

TEST_CASE("dispatch follows select_isa") {
  const kernels::Isa prev = kernels::select_isa(kernels::Isa::scalar);
  CHECK(kernels::active_isa() == kernels::Isa::scalar);
  CHECK(kernels::isa_name(kernels::Isa::scalar) == "scalar");
  const std::vector<double> a{1, 2, 3, 4, 5}, b{5, 4, 3, 2, 1};
  CHECK(kernels::dot(a, b) == 35.0);
  kernels::select_isa(prev);
  CHECK(kernels::dot(a, b) == 35.0);
}

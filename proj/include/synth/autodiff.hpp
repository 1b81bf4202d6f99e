#pragma once

#include "synth/interval.hpp"

#include <array>
#include <cstddef>
#include <type_traits>

// Forward-mode differentiation over polynomial expressions: Dual carries a
// gradient, Jet2 carries gradient and packed upper-triangular Hessian over
// any scalar ring S (double or Interval).
namespace synth::ad {

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const Interval& x) { return x.lo() == 0.0 && x.hi() == 0.0; }

template <std::size_t N>
struct Dual {
  double v = 0.0;
  std::array<double, N> g{};

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: constants promote
  static Dual variable(double value, std::size_t i) {
    Dual d(value);
    d.g[i] = 1.0;
    return d;
  }
};

template <std::size_t N>
Dual<N> operator+(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v + b.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = a.g[i] + b.g[i];
  return r;
}
template <std::size_t N>
Dual<N> operator-(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v - b.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = a.g[i] - b.g[i];
  return r;
}
template <std::size_t N>
Dual<N> operator-(const Dual<N>& a) {
  Dual<N> r(-a.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = -a.g[i];
  return r;
}
template <std::size_t N>
Dual<N> operator*(const Dual<N>& a, const Dual<N>& b) {
  Dual<N> r(a.v * b.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = a.v * b.g[i] + b.v * a.g[i];
  return r;
}
template <std::size_t N>
Dual<N> operator*(double c, const Dual<N>& a) {
  Dual<N> r(c * a.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = c * a.g[i];
  return r;
}
template <std::size_t N>
Dual<N> operator*(const Dual<N>& a, double c) {
  return c * a;
}
template <std::size_t N>
Dual<N> operator/(const Dual<N>& a, double c) {
  Dual<N> r(a.v / c);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = a.g[i] / c;
  return r;
}
template <std::size_t N>
Dual<N> operator+(const Dual<N>& a, double c) {
  Dual<N> r = a;
  r.v += c;
  return r;
}
template <std::size_t N>
Dual<N> operator+(double c, const Dual<N>& a) {
  return a + c;
}
template <std::size_t N>
Dual<N> operator-(const Dual<N>& a, double c) {
  Dual<N> r = a;
  r.v -= c;
  return r;
}
template <std::size_t N>
Dual<N> operator-(double c, const Dual<N>& a) {
  Dual<N> r = -a;
  r.v += c;
  return r;
}

template <class S, std::size_t N>
struct Jet2 {
  static constexpr std::size_t kPacked = N * (N + 1) / 2;
  static constexpr std::size_t index(std::size_t j, std::size_t k) {
    return j <= k ? j * N - j * (j - 1) / 2 + (k - j) : index(k, j);
  }

  S v{};
  std::array<S, N> g{};
  std::array<S, kPacked> h{};

  Jet2() = default;
  Jet2(const S& value) : v(value) {}  // NOLINT: constants promote
  Jet2(double value) requires(!std::is_same_v<S, double>) : v(value) {}  // NOLINT
  static Jet2 variable(const S& value, std::size_t i) {
    Jet2 d(value);
    d.g[i] = S(1.0);
    return d;
  }
  const S& hess(std::size_t j, std::size_t k) const { return h[index(j, k)]; }
};

template <class S, std::size_t N>
Jet2<S, N> operator+(const Jet2<S, N>& a, const Jet2<S, N>& b) {
  Jet2<S, N> r(a.v + b.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = a.g[i] + b.g[i];
  for (std::size_t i = 0; i < Jet2<S, N>::kPacked; ++i) r.h[i] = a.h[i] + b.h[i];
  return r;
}
template <class S, std::size_t N>
Jet2<S, N> operator-(const Jet2<S, N>& a) {
  Jet2<S, N> r(-a.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = -a.g[i];
  for (std::size_t i = 0; i < Jet2<S, N>::kPacked; ++i) r.h[i] = -a.h[i];
  return r;
}
template <class S, std::size_t N>
Jet2<S, N> operator-(const Jet2<S, N>& a, const Jet2<S, N>& b) {
  Jet2<S, N> r(a.v - b.v);
  for (std::size_t i = 0; i < N; ++i) r.g[i] = a.g[i] - b.g[i];
  for (std::size_t i = 0; i < Jet2<S, N>::kPacked; ++i) r.h[i] = a.h[i] - b.h[i];
  return r;
}
template <class S, std::size_t N>
Jet2<S, N> operator*(const Jet2<S, N>& a, const Jet2<S, N>& b) {
  Jet2<S, N> r(a.v * b.v);
  std::array<std::size_t, N> na{}, nb{};
  std::size_t ka = 0, kb = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const bool za = is_zero(a.g[i]), zb = is_zero(b.g[i]);
    if (!za) na[ka++] = i;
    if (!zb) nb[kb++] = i;
    if (za && zb) continue;
    r.g[i] = a.v * b.g[i] + b.v * a.g[i];
  }
  for (std::size_t i = 0; i < Jet2<S, N>::kPacked; ++i) {
    const bool za = is_zero(a.h[i]), zb = is_zero(b.h[i]);
    if (za && zb) continue;
    r.h[i] = za ? a.v * b.h[i] : (zb ? b.v * a.h[i] : a.v * b.h[i] + b.v * a.h[i]);
  }
  // Cross terms a_j b_k + a_k b_j, accumulated into the packed upper triangle.
  for (std::size_t s = 0; s < ka; ++s) {
    for (std::size_t t = 0; t < kb; ++t) {
      const std::size_t j = na[s], k = nb[t];
      const S p = a.g[j] * b.g[k];
      r.h[Jet2<S, N>::index(j, k)] += (j == k) ? p + p : p;
    }
  }
  return r;
}
template <class S, std::size_t N>
Jet2<S, N> operator*(double c, const Jet2<S, N>& a) {
  Jet2<S, N> r(c * a.v);
  for (std::size_t i = 0; i < N; ++i)
    if (!is_zero(a.g[i])) r.g[i] = c * a.g[i];
  for (std::size_t i = 0; i < Jet2<S, N>::kPacked; ++i)
    if (!is_zero(a.h[i])) r.h[i] = c * a.h[i];
  return r;
}
template <class S, std::size_t N>
Jet2<S, N> operator*(const Jet2<S, N>& a, double c) {
  return c * a;
}
template <class S, std::size_t N>
Jet2<S, N> operator/(const Jet2<S, N>& a, double c) {
  Jet2<S, N> r(a.v / c);
  for (std::size_t i = 0; i < N; ++i)
    if (!is_zero(a.g[i])) r.g[i] = a.g[i] / c;
  for (std::size_t i = 0; i < Jet2<S, N>::kPacked; ++i)
    if (!is_zero(a.h[i])) r.h[i] = a.h[i] / c;
  return r;
}
template <class S, std::size_t N>
Jet2<S, N> operator+(const Jet2<S, N>& a, double c) {
  Jet2<S, N> r = a;
  r.v = r.v + S(c);
  return r;
}
template <class S, std::size_t N>
Jet2<S, N> operator+(double c, const Jet2<S, N>& a) {
  return a + c;
}
template <class S, std::size_t N>
Jet2<S, N> operator-(const Jet2<S, N>& a, double c) {
  Jet2<S, N> r = a;
  r.v = r.v - S(c);
  return r;
}
template <class S, std::size_t N>
Jet2<S, N> operator-(double c, const Jet2<S, N>& a) {
  Jet2<S, N> r = -a;
  r.v = r.v + S(c);
  return r;
}

}  // namespace synth::ad

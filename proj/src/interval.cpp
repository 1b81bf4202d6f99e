#include "synth/interval.hpp"

#include "synth/kernels.hpp"
#include "synth/zonotope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace synth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this magnitude fma residuals may underflow; widen unconditionally.
constexpr double kTiny = 0x1p-960;

double down(double x) { return std::nextafter(x, -kInf); }
double up(double x) { return std::nextafter(x, kInf); }

// Knuth TwoSum; err = exact - s.
inline void two_sum(double a, double b, double& s, double& err) {
  s = a + b;
  const double bp = s - a;
  const double ap = s - bp;
  err = (a - ap) + (b - bp);
}

inline double sum_down(double a, double b) {
  double s, e;
  two_sum(a, b, s, e);
  return e < 0.0 ? down(s) : s;
}

inline double sum_up(double a, double b) {
  double s, e;
  two_sum(a, b, s, e);
  return e > 0.0 ? up(s) : s;
}

// True when the serial sum of |a_j| has no rounding error and equals s.
bool exact_abs_sum(const double* a, std::size_t m, double s) {
  double acc = 0.0, err = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    two_sum(acc, std::fabs(a[j]), acc, err);
    if (err != 0.0) return false;
  }
  return acc == s;
}

inline bool product_underflow(double a, double b, double p) {
  return std::fabs(p) < kTiny && a != 0.0 && b != 0.0;
}

inline double prod_down(double a, double b) {
  const double p = a * b;
  if (product_underflow(a, b, p)) return down(p);
  return std::fma(a, b, -p) < 0.0 ? down(p) : p;
}

inline double prod_up(double a, double b) {
  const double p = a * b;
  if (product_underflow(a, b, p)) return up(p);
  return std::fma(a, b, -p) > 0.0 ? up(p) : p;
}

// Sign of (a/c - q) equals sign(r)*sign(c) with r = a - q*c computed exactly.
inline double quot_down(double a, double c) {
  const double q = a / c;
  if (std::fabs(q) < kTiny && a != 0.0) return down(q);
  const double r = std::fma(-q, c, a);
  return (c > 0.0 ? r < 0.0 : r > 0.0) ? down(q) : q;
}

inline double quot_up(double a, double c) {
  const double q = a / c;
  if (std::fabs(q) < kTiny && a != 0.0) return up(q);
  const double r = std::fma(-q, c, a);
  return (c > 0.0 ? r > 0.0 : r < 0.0) ? up(q) : q;
}

}  // namespace

Interval::Interval(double v) : lo_(v), hi_(v) {
  if (std::isnan(v)) throw std::invalid_argument("Interval: NaN bound");
}

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (std::isnan(lo) || std::isnan(hi)) throw std::invalid_argument("Interval: NaN bound");
  if (lo > hi) throw std::invalid_argument("Interval: lo > hi");
}

double Interval::rad() const { return up(0.5 * hi_ - 0.5 * lo_); }

double Interval::mag() const { return std::max(std::fabs(lo_), std::fabs(hi_)); }

bool Interval::is_finite() const { return std::isfinite(lo_) && std::isfinite(hi_); }

Interval Interval::hull(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_));
}

Interval& Interval::operator+=(const Interval& o) { return *this = *this + o; }
Interval& Interval::operator-=(const Interval& o) { return *this = *this - o; }
Interval& Interval::operator*=(const Interval& o) { return *this = *this * o; }

Interval operator+(const Interval& a, const Interval& b) {
  return Interval(sum_down(a.lo(), b.lo()), sum_up(a.hi(), b.hi()));
}

Interval operator-(const Interval& a, const Interval& b) {
  return Interval(sum_down(a.lo(), -b.hi()), sum_up(a.hi(), -b.lo()));
}

Interval operator-(const Interval& a) { return Interval(-a.hi(), -a.lo()); }

Interval operator*(const Interval& a, const Interval& b) {
  const double al = a.lo(), ah = a.hi(), bl = b.lo(), bh = b.hi();
  const double lo = std::min({prod_down(al, bl), prod_down(al, bh), prod_down(ah, bl), prod_down(ah, bh)});
  const double hi = std::max({prod_up(al, bl), prod_up(al, bh), prod_up(ah, bl), prod_up(ah, bh)});
  return Interval(lo, hi);
}

Interval operator*(double c, const Interval& a) {
  if (c >= 0.0) return Interval(prod_down(c, a.lo()), prod_up(c, a.hi()));
  return Interval(prod_down(c, a.hi()), prod_up(c, a.lo()));
}

Interval operator*(const Interval& a, double c) { return c * a; }

Interval operator/(const Interval& a, double c) {
  if (c == 0.0 || std::isnan(c)) throw std::invalid_argument("Interval: division by zero");
  if (c > 0.0) return Interval(quot_down(a.lo(), c), quot_up(a.hi(), c));
  return Interval(quot_down(a.hi(), c), quot_up(a.lo(), c));
}

Interval sqr(const Interval& a) {
  const double l = a.lo(), h = a.hi();
  if (l >= 0.0) return Interval(prod_down(l, l), prod_up(h, h));
  if (h <= 0.0) return Interval(prod_down(h, h), prod_up(l, l));
  return Interval(0.0, std::max(prod_up(l, l), prod_up(h, h)));
}

std::ostream& operator<<(std::ostream& os, const Interval& a) {
  return os << '[' << a.lo() << ", " << a.hi() << ']';
}

IntervalVector IntervalVector::point(const Eigen::VectorXd& x) {
  IntervalVector v(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) v[i] = Interval(x[i]);
  return v;
}

IntervalVector IntervalVector::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("IntervalVector::box: shape mismatch");
  IntervalVector v(static_cast<std::size_t>(lo.size()));
  for (Eigen::Index i = 0; i < lo.size(); ++i) v[i] = Interval(lo[i], hi[i]);
  return v;
}

Eigen::VectorXd IntervalVector::lower() const {
  Eigen::VectorXd r(size());
  for (std::size_t i = 0; i < size(); ++i) r[i] = v_[i].lo();
  return r;
}

Eigen::VectorXd IntervalVector::upper() const {
  Eigen::VectorXd r(size());
  for (std::size_t i = 0; i < size(); ++i) r[i] = v_[i].hi();
  return r;
}

Eigen::VectorXd IntervalVector::mid() const {
  Eigen::VectorXd r(size());
  for (std::size_t i = 0; i < size(); ++i) r[i] = v_[i].mid();
  return r;
}

Eigen::VectorXd IntervalVector::rad() const {
  Eigen::VectorXd r(size());
  for (std::size_t i = 0; i < size(); ++i) r[i] = v_[i].rad();
  return r;
}

bool IntervalVector::contains(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != size()) throw std::invalid_argument("IntervalVector: shape mismatch");
  for (std::size_t i = 0; i < size(); ++i) {
    if (!v_[i].contains(x[i])) return false;
  }
  return true;
}

bool IntervalVector::contains(const IntervalVector& o) const {
  if (o.size() != size()) throw std::invalid_argument("IntervalVector: shape mismatch");
  for (std::size_t i = 0; i < size(); ++i) {
    if (!v_[i].contains(o[i])) return false;
  }
  return true;
}

bool IntervalVector::contains_zero() const {
  return std::all_of(v_.begin(), v_.end(), [](const Interval& a) { return a.contains(0.0); });
}

IntervalVector operator+(const IntervalVector& a, const IntervalVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("IntervalVector: shape mismatch");
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

IntervalVector operator-(const IntervalVector& a, const IntervalVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("IntervalVector: shape mismatch");
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

IntervalVector hull(const IntervalVector& a, const IntervalVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("IntervalVector: shape mismatch");
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = Interval::hull(a[i], b[i]);
  return r;
}

IntervalMatrix IntervalMatrix::point(const Eigen::MatrixXd& m) {
  IntervalMatrix r(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = Interval(m(i, j));
  return r;
}

bool IntervalMatrix::is_symmetric() const {
  if (rows_ != cols_) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      if (!((*this)(i, j) == (*this)(j, i))) return false;
  return true;
}

bool IntervalMatrix::contains(const Eigen::MatrixXd& m) const {
  if (static_cast<std::size_t>(m.rows()) != rows_ || static_cast<std::size_t>(m.cols()) != cols_)
    throw std::invalid_argument("IntervalMatrix: shape mismatch");
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if (!(*this)(i, j).contains(m(i, j))) return false;
  return true;
}

bool IntervalMatrix::is_zero() const {
  return std::all_of(m_.begin(), m_.end(), [](const Interval& a) { return a.lo() == 0.0 && a.hi() == 0.0; });
}

IntervalVector mat_vec(const IntervalMatrix& m, const IntervalVector& v) {
  if (m.cols() != v.size()) throw std::invalid_argument("mat_vec: shape mismatch");
  IntervalVector r(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Interval acc;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * v[j];
    r[i] = acc;
  }
  return r;
}

IntervalVector mat_vec(const Eigen::MatrixXd& m, const IntervalVector& v) {
  if (static_cast<std::size_t>(m.cols()) != v.size()) throw std::invalid_argument("mat_vec: shape mismatch");
  IntervalVector r(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Interval acc;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) acc += m(i, j) * v[j];
    }
    r[i] = acc;
  }
  return r;
}

Interval quad_form(const IntervalVector& d, const IntervalMatrix& h) {
  const std::size_t n = d.size();
  if (h.rows() != n || h.cols() != n) throw std::invalid_argument("quad_form: shape mismatch");
  Interval acc;
  for (std::size_t j = 0; j < n; ++j) {
    const Interval& hjj = h(j, j);
    if (!(hjj.lo() == 0.0 && hjj.hi() == 0.0)) acc += hjj * sqr(d[j]);
    for (std::size_t k = j + 1; k < n; ++k) {
      const Interval hs = h(j, k) + h(k, j);
      if (hs.lo() == 0.0 && hs.hi() == 0.0) continue;
      acc += hs * (d[j] * d[k]);
    }
  }
  return 0.5 * acc;
}

IntervalVector hull(const Zonotope& z) {
  const auto n = static_cast<std::size_t>(z.dim());
  const auto m = static_cast<std::size_t>(z.generators().cols());
  // Recursive summation of m nonnegative terms errs by at most gamma_m * sum.
  const double eps = std::numeric_limits<double>::epsilon();
  const double gamma = static_cast<double>(m) * eps / (1.0 - static_cast<double>(m) * eps);
  IntervalVector r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = z.generators().data() + i * m;
    const double s = kernels::abs_sum(std::span<const double>(row, m));
    const double rad = s == 0.0 || exact_abs_sum(row, m, s) ? s : up(s + s * gamma);
    const double c = z.center()[static_cast<Eigen::Index>(i)];
    r[i] = Interval(sum_down(c, -rad), sum_up(c, rad));
  }
  return r;
}

}  // namespace synth

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <vector>

namespace synth {

class Zonotope;

// Closed interval [lo, hi]. Every arithmetic result is rounded outward: a
// bound computed inexactly is moved one ULP away from the interior, a bound
// computed exactly is kept (exactness is detected with error-free
// transformations), so point inputs with exact results stay points.
class Interval {
 public:
  constexpr Interval() = default;
  Interval(double v);  // NOLINT(google-explicit-constructor): points promote freely
  Interval(double lo, double hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double mid() const { return 0.5 * lo_ + 0.5 * hi_; }
  double rad() const;
  double width() const { return hi_ - lo_; }
  double mag() const;  // max |x| over the interval
  bool is_point() const { return lo_ == hi_; }
  bool is_finite() const;

  bool contains(double x) const { return lo_ <= x && x <= hi_; }
  bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }

  static Interval hull(const Interval& a, const Interval& b);

  Interval& operator+=(const Interval& o);
  Interval& operator-=(const Interval& o);
  Interval& operator*=(const Interval& o);

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
Interval operator*(double c, const Interval& a);
Interval operator*(const Interval& a, double c);
// Division by a nonzero real constant only; interval divisors are not supported.
Interval operator/(const Interval& a, double c);

inline Interval add(const Interval& a, const Interval& b) { return a + b; }
inline Interval mul(const Interval& a, const Interval& b) { return a * b; }
inline Interval neg(const Interval& a) { return -a; }
inline Interval scale(double c, const Interval& a) { return c * a; }
// Tighter than a*a when a straddles zero.
Interval sqr(const Interval& a);

std::ostream& operator<<(std::ostream& os, const Interval& a);

class IntervalVector {
 public:
  IntervalVector() = default;
  explicit IntervalVector(std::size_t n) : v_(n) {}
  IntervalVector(std::initializer_list<Interval> il) : v_(il) {}
  static IntervalVector point(const Eigen::VectorXd& x);
  static IntervalVector box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

  std::size_t size() const { return v_.size(); }
  Interval& operator[](std::size_t i) { return v_[i]; }
  const Interval& operator[](std::size_t i) const { return v_[i]; }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;
  Eigen::VectorXd mid() const;
  Eigen::VectorXd rad() const;

  bool contains(const Eigen::VectorXd& x) const;
  bool contains(const IntervalVector& o) const;
  bool contains_zero() const;

  friend bool operator==(const IntervalVector&, const IntervalVector&) = default;

 private:
  std::vector<Interval> v_;
};

IntervalVector operator+(const IntervalVector& a, const IntervalVector& b);
IntervalVector operator-(const IntervalVector& a, const IntervalVector& b);
IntervalVector hull(const IntervalVector& a, const IntervalVector& b);

// Row-major r x c.
class IntervalMatrix {
 public:
  IntervalMatrix() = default;
  IntervalMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), m_(rows * cols) {}
  static IntervalMatrix point(const Eigen::MatrixXd& m);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Interval& operator()(std::size_t i, std::size_t j) { return m_[i * cols_ + j]; }
  const Interval& operator()(std::size_t i, std::size_t j) const { return m_[i * cols_ + j]; }

  bool is_symmetric() const;
  bool contains(const Eigen::MatrixXd& m) const;
  bool is_zero() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Interval> m_;
};

IntervalVector mat_vec(const IntervalMatrix& m, const IntervalVector& v);
IntervalVector mat_vec(const Eigen::MatrixXd& m, const IntervalVector& v);
// 1/2 d' H d.
Interval quad_form(const IntervalVector& d, const IntervalMatrix& h);
// Interval hull: c_i -/+ sum_j |G_ij|, widened outward.
IntervalVector hull(const Zonotope& z);

}  // namespace synth

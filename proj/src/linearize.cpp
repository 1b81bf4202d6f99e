#include "synth/linearize.hpp"

#include "synth/autodiff.hpp"
#include "synth/error.hpp"

#include <algorithm>
#include <cmath>

namespace synth {

namespace {

constexpr int kRows = kStateDim + kAlgDim + 1;

template <class T>
std::array<T, kRows> rows_of(const std::array<T, kSDim>& s, const WtgContext& c) {
  const auto r = wtg_residuals<T>(std::span<const T, kStateDim>(s.data(), kStateDim), s[kUIndex],
                                  std::span<const T, kAlgDim>(s.data() + kUIndex + 1, kAlgDim), c);
  std::array<T, kRows> out;
  for (int i = 0; i < kStateDim; ++i) out[i] = r.f[i];
  for (int i = 0; i < kAlgDim; ++i) out[kStateDim + i] = r.g[i];
  out[kRows - 1] = r.h;
  return out;
}

void check_dim(const Eigen::VectorXd& s) {
  if (s.size() != kSDim) throw SynthError(ErrorKind::invalid_argument, "linearize: s must have 19 entries");
}

}  // namespace

Eigen::MatrixXd SystemJacobians::full() const {
  Eigen::MatrixXd j(kRows, kSDim);
  j << a, b, c, d, e, f, l, m, n;
  return j;
}

Eigen::VectorXd full_residual(const Eigen::VectorXd& s, const WtgContext& c) {
  check_dim(s);
  std::array<double, kSDim> v;
  for (int i = 0; i < kSDim; ++i) v[i] = s[i];
  const auto r = rows_of<double>(v, c);
  return Eigen::Map<const Eigen::VectorXd>(r.data(), kRows);
}

SystemJacobians jacobians_at(const Eigen::VectorXd& s, const WtgContext& c) {
  using D = ad::Dual<kSDim>;
  check_dim(s);
  if (!s.allFinite()) throw SynthError(ErrorKind::non_finite, "non-finite state");
  std::array<D, kSDim> v;
  for (int i = 0; i < kSDim; ++i) v[i] = D::variable(s[i], static_cast<std::size_t>(i));
  const auto r = rows_of<D>(v, c);
  Eigen::MatrixXd full(kRows, kSDim);
  for (int i = 0; i < kRows; ++i)
    for (int j = 0; j < kSDim; ++j) full(i, j) = r[i].g[j];
  constexpr int nx = kStateDim, ny = kAlgDim, y0 = kUIndex + 1;
  SystemJacobians j;
  j.a = full.block(0, 0, nx, nx);
  j.b = full.block(0, kUIndex, nx, 1);
  j.c = full.block(0, y0, nx, ny);
  j.d = full.block(nx, 0, ny, nx);
  j.e = full.block(nx, kUIndex, ny, 1);
  j.f = full.block(nx, y0, ny, ny);
  j.l = full.block(kRows - 1, 0, 1, nx);
  j.m = full.block(kRows - 1, kUIndex, 1, 1);
  j.n = full.block(kRows - 1, y0, 1, ny);
  return j;
}

SystemJacobians jacobians(const OperatingPoint& eq, const DfigParams& params) {
  SystemJacobians j = jacobians_at(eq.s(), eq.context(params));
  const double rc = Eigen::PartialPivLU<Eigen::MatrixXd>(j.f).rcond();
  if (!(rc > 1e-10)) throw SynthError(ErrorKind::singular, "singular F_sys");
  return j;
}

double jacobian_fd_error(const SystemJacobians& j, const Eigen::VectorXd& s, const WtgContext& c, double step) {
  check_dim(s);
  const Eigen::MatrixXd ja = j.full();
  double worst = 0.0;
  for (int col = 0; col < kSDim; ++col) {
    Eigen::VectorXd sp = s, sm = s;
    sp[col] += step;
    sm[col] -= step;
    const Eigen::VectorXd fd = (full_residual(sp, c) - full_residual(sm, c)) / (2.0 * step);
    for (int row = 0; row < kRows; ++row) {
      worst = std::max(worst, std::fabs(ja(row, col) - fd[row]) / std::max(1.0, std::fabs(ja(row, col))));
    }
  }
  return worst;
}

LinearWtg reduce_index1(const SystemJacobians& j) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(j.f);
  if (!(lu.rcond() > 1e-10)) throw SynthError(ErrorKind::singular, "singular F_sys");
  const Eigen::MatrixXd fd = lu.solve(j.d);
  const Eigen::MatrixXd fe = lu.solve(j.e);
  return LinearWtg{j.a - j.c * fd, j.b - j.c * fe, j.l - j.n * fd, j.m - j.n * fe};
}

HessianIntervals hessian_intervals(const IntervalVector& theta, const WtgContext& c) {
  using J = ad::Jet2<Interval, kSDim>;
  if (theta.size() != kSDim) throw SynthError(ErrorKind::invalid_argument, "hessian_intervals: theta must have 19 entries");
  std::array<J, kSDim> v;
  for (int i = 0; i < kSDim; ++i) v[i] = J::variable(theta[i], static_cast<std::size_t>(i));
  const auto r = rows_of<J>(v, c);
  auto unpack = [](const J& jet) {
    IntervalMatrix m(kSDim, kSDim);
    for (int a = 0; a < kSDim; ++a)
      for (int b = 0; b < kSDim; ++b) m(a, b) = jet.hess(a, b);
    return m;
  };
  HessianIntervals h;
  for (int i = 0; i < kStateDim; ++i) h.hd.push_back(unpack(r[i]));
  for (int i = 0; i < kAlgDim; ++i) h.ha.push_back(unpack(r[kStateDim + i]));
  h.ho.push_back(unpack(r[kRows - 1]));
  return h;
}

Remainders remainder_intervals(const IntervalVector& theta, const Eigen::VectorXd& s_center, const HessianIntervals& h) {
  check_dim(s_center);
  if (theta.size() != kSDim) throw SynthError(ErrorKind::invalid_argument, "remainder_intervals: theta must have 19 entries");
  IntervalVector delta(kSDim);
  for (int i = 0; i < kSDim; ++i) delta[i] = theta[i] - Interval(s_center[i]);
  auto apply = [&](const std::vector<IntervalMatrix>& hs) {
    IntervalVector out(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) out[i] = quad_form(delta, hs[i]);
    return out;
  };
  return Remainders{apply(h.hd), apply(h.ha), apply(h.ho)};
}

ErrorIntervals error_intervals(const Remainders& r, const SystemJacobians& j) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(j.f);
  const Eigen::MatrixXd finv = lu.inverse();
  const Eigen::MatrixXd cf = -j.c * finv;
  const Eigen::MatrixXd nf = -j.n * finv;
  return ErrorIntervals{r.i + mat_vec(cf, r.j), r.k + mat_vec(nf, r.j)};
}

WtgLinearModel linearize_wtg(const OperatingPoint& eq, const DfigParams& params, const IntervalVector& theta) {
  const SystemJacobians j = jacobians(eq, params);
  const Eigen::VectorXd s_eq = eq.s();
  if (!theta.contains(s_eq)) throw SynthError(ErrorKind::invalid_argument, "linearize: theta must contain s_eq");
  const HessianIntervals h = hessian_intervals(theta, eq.context(params));
  const Remainders rem = remainder_intervals(theta, s_eq, h);
  const ErrorIntervals err = error_intervals(rem, j);
  return WtgLinearModel{reduce_index1(j), err.s, err.o, eq, params, theta};
}

}  // namespace synth

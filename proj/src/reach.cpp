#include "synth/reach.hpp"

#include "synth/error.hpp"
#include "synth/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace synth {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

int step_count(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw SynthError(ErrorKind::invalid_argument, "reach: horizon and dt must be positive");
  const double k = horizon / dt;
  const long r = std::lround(k);
  if (std::fabs(k - static_cast<double>(r)) > 1e-9 * k) {
    throw SynthError(ErrorKind::invalid_argument, "reach: horizon must be a multiple of dt");
  }
  return static_cast<int>(r);
}

IntervalVector widen(const IntervalVector& a, double rel, double abs) {
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = rel * a[i].width() + abs;
    r[i] = Interval(a[i].lo() - w, a[i].hi() + w);
  }
  return r;
}

IntervalVector add_point(const IntervalVector& a, const Vec& p) {
  IntervalVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + Interval(p[static_cast<Eigen::Index>(i)]);
  return r;
}

// x hull corners mapped through the algebraic closure at both input ends.
IntervalVector sampled_algebraic_hull(const IntervalVector& xbox, const Interval& u, const WtgContext& c,
                                      const WtgAlgebraic& guess) {
  IntervalVector out(kAlgDim);
  bool first = true;
  for (int mask = 0; mask < (1 << kStateDim); ++mask) {
    WtgState x;
    for (int i = 0; i < kStateDim; ++i) x[i] = (mask >> i) & 1 ? xbox[i].hi() : xbox[i].lo();
    for (double uv : {u.lo(), u.hi()}) {
      const WtgAlgebraic y = solve_algebraic(x, uv, c, guess).y;
      for (int i = 0; i < kAlgDim; ++i) out[i] = first ? Interval(y[i]) : Interval::hull(out[i], Interval(y[i]));
    }
    first = false;
  }
  return out;
}

}  // namespace

ReachResult reach_nonlinear(const DfigParams& params, const OperatingPoint& eq, const Interval& u, double horizon,
                            const ReachOptions& opt) {
  const int steps = step_count(horizon, opt.dt);
  const double hold = opt.input_hold > 0.0 ? opt.input_hold : horizon;
  const int hold_steps = std::max(1, static_cast<int>(std::lround(hold / opt.dt)));
  const WtgContext ctx = eq.context(params);
  constexpr int na = kStateDim + 1;  // x_w augmented with the held input
  const double ubar = u.mid();
  const double urad = u.rad();

  ReachResult res;
  res.horizon = horizon;
  res.dt = opt.dt;
  Vec x0(na);
  for (int i = 0; i < kStateDim; ++i) x0[i] = eq.x[i];
  x0[kStateDim] = ubar;
  auto fresh_input = [&](const Zonotope& z) {
    RowMatrix g(na, z.num_generators() + 1);
    g << z.generators(), RowMatrix::Zero(na, 1);
    g.row(kStateDim).setZero();
    g(kStateDim, z.num_generators()) = urad;
    Vec c = z.center();
    c[kStateDim] = ubar;
    return zono_reduce(Zonotope(c, std::move(g)), opt.order_cap);
  };
  auto project = [&](const Zonotope& z) {
    return Zonotope(z.center().head(kStateDim), RowMatrix(z.generators().topRows(kStateDim)));
  };
  Zonotope r = fresh_input(Zonotope(x0));
  res.step_sets.push_back(project(r));

  WtgAlgebraic yguess = eq.y;
  IntervalVector s_prev(na);
  IntervalVector j_prev(kAlgDim);

  for (int k = 0; k < steps; ++k) {
    const Vec c = r.center();
    WtgState cx;
    for (int i = 0; i < kStateDim; ++i) cx[i] = c[i];
    const double uc = c[kStateDim];
    const WtgAlgebraic yc = solve_algebraic(cx, uc, ctx, yguess).y;
    yguess = yc;
    const Vec ycv = Eigen::Map<const Vec>(yc.data(), kAlgDim);
    Vec sc(kSDim);
    sc << c, ycv;

    const SystemJacobians jac = jacobians_at(sc, ctx);
    const LinearWtg lin = reduce_index1(jac);
    const Mat finv = Eigen::PartialPivLU<Mat>(jac.f).inverse();
    const Mat cf = -jac.c * finv;
    Mat kbar(kAlgDim, na);
    kbar << -finv * jac.d, -finv * jac.e;
    Mat abar = Mat::Zero(na, na);
    abar.topLeftCorner(kStateDim, kStateDim) = lin.a_w;
    abar.topRightCorner(kStateDim, 1) = lin.b_w;
    Vec ftilde = Vec::Zero(na);
    ftilde.head(kStateDim) = full_residual(sc, ctx).head(kStateDim);
    const Zoh z = zoh(abar, Mat::Identity(na, na), opt.dt);
    const Mat vbound = abs_exp_integral_bound(abar, opt.dt, opt.integral_pieces);

    const Zonotope rlin(c + z.gamma * ftilde, RowMatrix(z.phi * r.generators()));
    const IntervalVector box_now = hull(r);
    auto ymap = [&](const Zonotope& zx) {
      return hull(Zonotope(ycv + kbar * (zx.center() - c), RowMatrix(kbar * zx.generators())));
    };
    const IntervalVector y_now = ymap(r);

    IntervalVector s_guess = s_prev;
    IntervalVector j_guess = j_prev;
    IntervalVector omega;
    IntervalVector s_new;
    IntervalVector j_new;
    Zonotope rnext;
    bool converged = false;
    for (int it = 0; it < opt.max_fixpoint_iterations; ++it) {
      rnext = zono_minkowski(zono_translate(rlin, z.gamma * s_guess.mid()),
                             Zonotope::box(Vec::Zero(na), vbound * s_guess.rad()));

      IntervalVector xbox = hull(box_now, hull(rnext));
      // Within-step deviation from the chord: |x''| <= |A| |x'| bounds it by dt^2/8.
      IntervalVector dx(na);
      for (int i = 0; i < na; ++i) dx[i] = xbox[i] - Interval(c[i]);
      const IntervalVector xdot = add_point(mat_vec(abar, dx) + s_guess, ftilde);
      Vec xdot_mag(na);
      for (int i = 0; i < na; ++i) xdot_mag[i] = xdot[i].mag();
      const Vec curv = opt.curvature_factor * opt.dt * opt.dt / 8.0 * (abar.cwiseAbs() * xdot_mag);
      IntervalVector cbox(na);
      for (int i = 0; i < na; ++i) {
        xbox[i] = Interval(xbox[i].lo() - curv[i], xbox[i].hi() + curv[i]);
        cbox[i] = Interval(-curv[i], curv[i]);
      }

      // y from the exact algebraic relation 0 = D dx + E du + F dy + J: the
      // point gain acts on the zonotopes before boxing.
      const IntervalVector ybox = hull(y_now, ymap(rnext)) + mat_vec(kbar, cbox) + mat_vec(Mat(-finv), j_guess);

      omega = IntervalVector(kSDim);
      for (int i = 0; i < na; ++i) omega[i] = xbox[i];
      for (int i = 0; i < kAlgDim; ++i) omega[na + i] = ybox[i];

      const HessianIntervals h = hessian_intervals(omega, ctx);
      const Remainders rem = remainder_intervals(omega, sc, h);
      const IntervalVector s6 = rem.i + mat_vec(cf, rem.j);
      s_new = IntervalVector(na);
      for (int i = 0; i < kStateDim; ++i) s_new[i] = s6[i];
      j_new = rem.j;
      res.max_fixpoint_iterations_used = std::max(res.max_fixpoint_iterations_used, it + 1);
      if (s_guess.contains(s_new) && j_guess.contains(rem.j)) {
        converged = true;
        break;
      }
      s_guess = widen(hull(s_guess, s_new), 0.1, 1e-15);
      j_guess = widen(hull(j_guess, rem.j), 0.1, 1e-15);
    }
    if (!converged) throw SynthError(ErrorKind::no_convergence, "remainder fixed point diverged");
    // Seed the next step from the attained remainder, not the accepted guess,
    // so the guess cannot ratchet upward across steps.
    s_prev = widen(s_new, 0.05, 1e-15);
    j_prev = widen(j_new, 0.05, 1e-15);
    res.step_boxes.push_back(omega);
    r = zono_reduce(rnext, opt.order_cap);
    res.step_sets.push_back(project(r));
    if ((k + 1) % hold_steps == 0) r = fresh_input(r);
  }

  IntervalVector theta = res.step_boxes.front();
  for (const auto& b : res.step_boxes) theta = hull(theta, b);
  IntervalVector xbox(kStateDim);
  for (int i = 0; i < kStateDim; ++i) xbox[i] = theta[i];
  // The held input never leaves U; its propagated coordinate only adds rounding.
  theta[kUIndex] = u;
  IntervalVector ys = sampled_algebraic_hull(xbox, u, ctx, eq.y);
  auto inflate = [&](const IntervalVector& y) {
    for (int i = 0; i < kAlgDim; ++i) {
      const double w = opt.y_margin * y[i].width();
      theta[kUIndex + 1 + i] = Interval(y[i].lo() - w, y[i].hi() + w);
    }
  };
  inflate(ys);
  // Corners need not bound the algebraic image; dense sampling re-checks the
  // margin and folds in any escaping point.
  std::mt19937_64 rng(opt.verify_seed);
  for (int round = 0; round < 8; ++round) {
    bool escaped = false;
    for (int n = 0; n < opt.verify_samples; ++n) {
      WtgState x;
      for (int i = 0; i < kStateDim; ++i) x[i] = std::uniform_real_distribution<double>(xbox[i].lo(), xbox[i].hi())(rng);
      const double uv = std::uniform_real_distribution<double>(u.lo(), u.hi())(rng);
      const WtgAlgebraic y = solve_algebraic(x, uv, ctx, eq.y).y;
      for (int i = 0; i < kAlgDim; ++i) {
        ys[i] = Interval::hull(ys[i], Interval(y[i]));
        if (!theta[kUIndex + 1 + i].contains(y[i])) escaped = true;
      }
    }
    if (!escaped) break;
    inflate(ys);
  }
  res.theta = theta;
  return res;
}

std::vector<Zonotope> reach_linear_with_error(const WtgLinearModel& lin, double u_sp, double horizon, double dt,
                                              double order_cap) {
  const int steps = step_count(horizon, dt);
  const Mat& a = lin.lin.a_w;
  const Zoh z = zoh(a, Mat::Identity(a.rows(), a.cols()), dt);
  const Vec drift = z.gamma * (lin.lin.b_w * u_sp) + z.gamma * lin.s.mid();
  const Vec err = abs_exp_integral_bound(a, dt) * lin.s.rad();
  const Zonotope err_box = Zonotope::box(Vec::Zero(a.rows()), err);
  std::vector<Zonotope> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(Zonotope(Vec::Zero(a.rows())));
  for (int k = 0; k < steps; ++k) {
    Zonotope next = zono_minkowski(zono_translate(zono_linear_map(z.phi, out.back()), drift), err_box);
    out.push_back(zono_reduce(next, order_cap));
  }
  return out;
}

}  // namespace synth

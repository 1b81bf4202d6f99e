#include "synth/models.hpp"

#include "synth/autodiff.hpp"
#include "synth/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace synth {

namespace {

bool finite_all(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw SynthError(ErrorKind::invalid_argument, std::string(name) + " must be positive and finite");
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw SynthError(ErrorKind::invalid_argument, std::string(name) + " must be non-negative and finite");
  }
}

}  // namespace

void DieselParams::validate() const {
  require_positive(inertia_s, "H_D");
  require_positive(engine_tau_s, "tau_d");
  require_positive(governor_tau_s, "tau_g");
  require_positive(droop_pu, "R_D");
  require_positive(freq_base_hz, "f_bar");
  require_positive(power_base_mva, "S_d");
}

void DfigParams::validate() const {
  require_positive(inertia_s, "H_T");
  require_nonnegative(r_s, "R_s");
  require_nonnegative(r_r, "R_r");
  require_positive(l_m, "L_m");
  require_positive(l_ls, "L_ls");
  require_positive(l_lr, "L_lr");
  require_positive(omega_base, "omega_bar");
  require_positive(omega_sync, "omega_s");
  require_positive(filter_cutoff, "omega_c");
  require_positive(stator_flux, "Psi_s");
  require_nonnegative(kp_torque, "K_P^T");
  require_nonnegative(ki_torque, "K_I^T");
  require_nonnegative(kp_reactive, "K_P^Q");
  require_nonnegative(ki_reactive, "K_I^Q");
  require_nonnegative(kp_current, "K_P^C");
  require_nonnegative(ki_current, "K_I^C");
  require_positive(power_base_mva, "S_w");
  const double s = sigma();
  if (!(s > 0.0 && s < 1.0)) throw SynthError(ErrorKind::invalid_argument, "sigma must lie in (0, 1)");
}

Eigen::VectorXd OperatingPoint::s() const {
  Eigen::VectorXd v(kSDim);
  for (int i = 0; i < kStateDim; ++i) v[i] = x[i];
  v[kUIndex] = 0.0;
  for (int i = 0; i < kAlgDim; ++i) v[kUIndex + 1 + i] = y[i];
  return v;
}

std::array<double, 3> diesel_rhs(const std::array<double, 3>& state, double dp_e, const DieselParams& p) {
  if (!finite_all(state) || !std::isfinite(dp_e)) throw SynthError(ErrorKind::non_finite, "non-finite state");
  const double dw = state[0], dpm = state[1], dpv = state[2];
  return {p.freq_base_hz * (dpm - dp_e) / (2.0 * p.inertia_s), (-dpm + dpv) / p.engine_tau_s,
          (-dpv - dw / (p.freq_base_hz * p.droop_pu)) / p.governor_tau_s};
}

double tracking_speed(double p_g) { return std::clamp(-0.67 * p_g * p_g + 1.42 * p_g + 0.51, 0.7, 1.2); }

WtgResidual<double> wtg_residuals(const WtgState& x, double u, const WtgAlgebraic& y, const WtgContext& c) {
  if (!finite_all(x) || !finite_all(y) || !std::isfinite(u)) throw SynthError(ErrorKind::non_finite, "non-finite state");
  return wtg_residuals<double>(std::span<const double, kStateDim>(x), u, std::span<const double, kAlgDim>(y), c);
}

double electrical_torque(const WtgAlgebraic& y) {
  return y[yw::psi_qs] * y[yw::i_ds] - y[yw::psi_ds] * y[yw::i_qs];
}

double copper_losses(const WtgAlgebraic& y, const DfigParams& p) {
  return p.r_s * (y[yw::i_qs] * y[yw::i_qs] + y[yw::i_ds] * y[yw::i_ds]) +
         p.r_r * (y[yw::i_qr] * y[yw::i_qr] + y[yw::i_dr] * y[yw::i_dr]);
}

double residual_norm(const WtgState& x, double u, const WtgAlgebraic& y, const WtgContext& c) {
  const auto r = wtg_residuals(x, u, y, c);
  double m = 0.0;
  for (double v : r.f) m = std::max(m, std::fabs(v));
  for (double v : r.g) m = std::max(m, std::fabs(v));
  return m;
}

AlgebraicSolution solve_algebraic(const WtgState& x, double u, const WtgContext& c, const WtgAlgebraic& guess) {
  using D = ad::Dual<kAlgDim>;
  if (!finite_all(x) || !finite_all(guess) || !std::isfinite(u)) {
    throw SynthError(ErrorKind::non_finite, "non-finite state");
  }
  std::array<D, kStateDim> xd;
  for (int i = 0; i < kStateDim; ++i) xd[i] = D(x[i]);
  const D ud(u);
  AlgebraicSolution sol;
  sol.y = guess;
  constexpr int kMaxIter = 50;
  constexpr double kTol = 1e-10;
  for (int it = 0; it <= kMaxIter; ++it) {
    std::array<D, kAlgDim> yd;
    for (int i = 0; i < kAlgDim; ++i) yd[i] = D::variable(sol.y[i], static_cast<std::size_t>(i));
    const auto r = wtg_residuals<D>(xd, ud, yd, c);
    Eigen::Matrix<double, kAlgDim, kAlgDim> jac;
    Eigen::Matrix<double, kAlgDim, 1> g;
    for (int i = 0; i < kAlgDim; ++i) {
      g[i] = r.g[i].v;
      for (int j = 0; j < kAlgDim; ++j) jac(i, j) = r.g[i].g[j];
    }
    if (!g.allFinite()) throw SynthError(ErrorKind::non_finite, "non-finite state");
    sol.residual = g.cwiseAbs().maxCoeff();
    Eigen::PartialPivLU<Eigen::Matrix<double, kAlgDim, kAlgDim>> lu(jac);
    const double rc = lu.rcond();
    sol.condition = rc > 0.0 ? 1.0 / rc : INFINITY;
    if (sol.condition > 1e12) throw SynthError(ErrorKind::singular, "singular algebraic Jacobian");
    if (sol.residual <= kTol) return sol;
    if (it == kMaxIter) break;
    const Eigen::Matrix<double, kAlgDim, 1> step = lu.solve(-g);
    for (int i = 0; i < kAlgDim; ++i) sol.y[i] += step[i];
    sol.iterations = it + 1;
  }
  throw SynthError(ErrorKind::no_convergence, "no convergence");
}

namespace {

constexpr int kEqDim = 4 + kAlgDim + 1;  // x1..x4, y, T_m
using EqVec = Eigen::Matrix<double, kEqDim, 1>;

// Residual rows [f_swing, f_reactive, f_current_q, f_current_d, g, h - P].
template <class T>
std::array<T, kEqDim> equilibrium_rows(const std::array<T, kEqDim>& z, const WtgContext& c) {
  std::array<T, kStateDim> x{T(c.speed_ref), T(c.speed_ref), z[0], z[1], z[2], z[3]};
  std::array<T, kAlgDim> y;
  for (int i = 0; i < kAlgDim; ++i) y[i] = z[4 + i];
  WtgContext c0 = c;
  c0.mech_torque = 0.0;
  const auto r = wtg_residuals<T>(x, T(0.0), y, c0);
  std::array<T, kEqDim> out;
  out[0] = r.f[0] + z[kEqDim - 1] / (2.0 * c.params.inertia_s);
  out[1] = r.f[3];
  out[2] = r.f[4];
  out[3] = r.f[5];
  for (int i = 0; i < kAlgDim; ++i) out[4 + i] = r.g[i];
  out[kEqDim - 1] = r.h - c.dispatch.p_g;
  return out;
}

// Flux-oriented steady state: psi_s on the d axis, torque from P / omega_r.
EqVec stator_flux_guess(const WtgContext& c) {
  const DfigParams& p = c.params;
  const double ls = p.l_s(), lm = p.l_m, psi = p.stator_flux;
  const double tm = c.dispatch.p_g / c.speed_ref;
  const double iqr = tm * ls / (lm * psi);
  const double idr = (c.dispatch.q_ref + psi / ls) * ls / lm;
  EqVec z = EqVec::Zero();
  z[0] = -tm;
  z[1] = idr;
  const double y[kAlgDim] = {0.0, psi, 0.0, 0.0, -lm * iqr / ls, (psi - lm * idr) / ls, iqr, idr, 0.0, 0.0,
                             c.dispatch.p_g, c.dispatch.q_ref};
  for (int i = 0; i < kAlgDim; ++i) z[4 + i] = y[i];
  z[kEqDim - 1] = tm;
  return z;
}

bool newton_equilibrium(EqVec& z, const WtgContext& c) {
  using D = ad::Dual<kEqDim>;
  for (int it = 0; it < 60; ++it) {
    std::array<D, kEqDim> zd;
    for (int i = 0; i < kEqDim; ++i) zd[i] = D::variable(z[i], static_cast<std::size_t>(i));
    const auto r = equilibrium_rows<D>(zd, c);
    Eigen::Matrix<double, kEqDim, kEqDim> jac;
    EqVec g;
    for (int i = 0; i < kEqDim; ++i) {
      g[i] = r[i].v;
      for (int j = 0; j < kEqDim; ++j) jac(i, j) = r[i].g[j];
    }
    if (!g.allFinite()) return false;
    if (g.cwiseAbs().maxCoeff() <= 1e-12) return true;
    Eigen::PartialPivLU<Eigen::Matrix<double, kEqDim, kEqDim>> lu(jac);
    if (!(lu.rcond() > 1e-14)) return false;
    z += lu.solve(-g);
    if (!z.allFinite()) return false;
  }
  return false;
}

}  // namespace

OperatingPoint solve_equilibrium(const DfigParams& params, const Dispatch& dispatch) {
  params.validate();
  if (!(dispatch.p_g > 0.0 && dispatch.p_g <= 1.1) || !std::isfinite(dispatch.q_ref) ||
      std::hypot(dispatch.v_ds, dispatch.v_qs) < 0.5) {
    throw SynthError(ErrorKind::infeasible, "infeasible dispatch");
  }
  WtgContext c{params, dispatch, tracking_speed(dispatch.p_g), 0.0};
  EqVec z = stator_flux_guess(c);
  bool ok = newton_equilibrium(z, c);
  // Homotopy in the power setpoint from a lightly loaded machine.
  if (!ok) {
    constexpr int kSteps = 10;
    WtgContext ch = c;
    ch.dispatch.p_g = dispatch.p_g / kSteps;
    z = stator_flux_guess(ch);
    ok = newton_equilibrium(z, ch);
    for (int k = 2; ok && k <= kSteps; ++k) {
      ch.dispatch.p_g = dispatch.p_g * k / kSteps;
      ok = newton_equilibrium(z, ch);
    }
  }
  if (!ok) throw SynthError(ErrorKind::infeasible, "infeasible dispatch");

  OperatingPoint op;
  op.dispatch = dispatch;
  op.speed_ref = c.speed_ref;
  op.mech_torque = z[kEqDim - 1];
  op.x = {c.speed_ref, c.speed_ref, z[0], z[1], z[2], z[3]};
  for (int i = 0; i < kAlgDim; ++i) op.y[i] = z[4 + i];
  if (residual_norm(op.x, 0.0, op.y, op.context(params)) > 1e-9) {
    throw SynthError(ErrorKind::infeasible, "infeasible dispatch");
  }
  return op;
}

}  // namespace synth

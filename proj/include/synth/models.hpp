#pragma once

#include <Eigen/Dense>

#include <array>
#include <span>

namespace synth {

// Aggregated diesel generator frequency response (governor, engine, swing).
struct DieselParams {
  double inertia_s = 2.0;             // H_D
  double engine_tau_s = 0.5;          // tau_d
  double governor_tau_s = 0.2;        // tau_g
  double droop_pu = 0.05;             // R_D
  double freq_base_hz = 60.0;         // f_bar
  double power_base_mva = 7.0;        // S_d

  void validate() const;
};

struct DfigParams {
  double inertia_s = 4.5;             // H_T
  double r_s = 0.00706;
  double r_r = 0.005;
  double l_ls = 0.171;
  double l_lr = 0.156;
  double l_m = 2.9;
  double omega_base = 376.99111843077515;  // rad/s
  double omega_sync = 1.0;            // pu
  double filter_cutoff = 2.0;         // omega_c
  double stator_flux = 1.0;           // Psi_s
  double kp_torque = 3.0;
  double ki_torque = 0.6;
  double kp_reactive = 0.5;
  double ki_reactive = 5.0;
  double kp_current = 0.3;
  double ki_current = 8.0;
  double power_base_mva = 1.5;        // S_w

  double l_s() const { return l_ls + l_m; }
  double l_r() const { return l_lr + l_m; }
  double sigma() const { return 1.0 - l_m * l_m / (l_s() * l_r()); }
  void validate() const;
};

// Index maps into x_w and y_w.
namespace xw {
enum : int { omega_r, omega_f, x1, x2, x3, x4, size };
}
namespace yw {
enum : int { psi_qs, psi_ds, psi_qr, psi_dr, i_qs, i_ds, i_qr, i_dr, v_qr, v_dr, p_g, q_g, size };
}
// s = [x_w, u_sp, y_w].
inline constexpr int kStateDim = xw::size;
inline constexpr int kAlgDim = yw::size;
inline constexpr int kSDim = kStateDim + 1 + kAlgDim;
inline constexpr int kUIndex = kStateDim;

using WtgState = std::array<double, kStateDim>;
using WtgAlgebraic = std::array<double, kAlgDim>;

struct Dispatch {
  double p_g = 0.8;     // pu on S_w
  double q_ref = 0.0;   // Q_g*
  double v_ds = 0.0;
  double v_qs = 1.0;
};

// Everything the residuals need besides (x_w, u_sp, y_w).
struct WtgContext {
  DfigParams params;
  Dispatch dispatch;
  double speed_ref = 1.0;     // omega_r* held constant
  double mech_torque = 0.0;   // T_m held constant
};

struct OperatingPoint {
  Dispatch dispatch;
  double speed_ref = 1.0;
  double mech_torque = 0.0;
  WtgState x{};
  WtgAlgebraic y{};

  WtgContext context(const DfigParams& p) const { return WtgContext{p, dispatch, speed_ref, mech_torque}; }
  Eigen::VectorXd s() const;  // [x, 0, y]
};

template <class T>
struct WtgResidual {
  std::array<T, kStateDim> f;
  std::array<T, kAlgDim> g;
  T h;
};

std::array<double, 3> diesel_rhs(const std::array<double, 3>& state, double dp_e, const DieselParams& p);

// Maximum-power-tracking speed for an electrical power dispatch, clamped to
// the machine's speed band.
double tracking_speed(double p_g);

// Differential rows: swing, speed filter, torque PI, reactive PI, two current
// PIs. Algebraic rows: stator/rotor voltage (scaled by omega_base), flux
// linkages, terminal powers, rotor-side converter voltage laws. The speed
// error is omega_f* - omega_r - u_sp, so u_sp >= 0 releases rotor energy.
template <class T>
WtgResidual<T> wtg_residuals(std::span<const T, kStateDim> x, const T& u, std::span<const T, kAlgDim> y,
                             const WtgContext& c) {
  const DfigParams& p = c.params;
  const double ls = p.l_s(), lr = p.l_r(), lm = p.l_m, ws = p.omega_sync, wb = p.omega_base;
  const double psi = p.stator_flux, sigma = p.sigma();
  const double vqs = c.dispatch.v_qs, vds = c.dispatch.v_ds, qstar = c.dispatch.q_ref;

  const T& wr = x[xw::omega_r];
  const T& wf = x[xw::omega_f];
  const T& psi_qs = y[yw::psi_qs];
  const T& psi_ds = y[yw::psi_ds];
  const T& psi_qr = y[yw::psi_qr];
  const T& psi_dr = y[yw::psi_dr];
  const T& iqs = y[yw::i_qs];
  const T& ids = y[yw::i_ds];
  const T& iqr = y[yw::i_qr];
  const T& idr = y[yw::i_dr];
  const T& vqr = y[yw::v_qr];
  const T& vdr = y[yw::v_dr];
  const T& pg = y[yw::p_g];
  const T& qg = y[yw::q_g];

  const T err = wf - wr - u;
  const T q_err = qstar - qg;
  const T te = psi_qs * ids - psi_ds * iqs;
  const T iqr_ref = (-ls / (lm * psi)) * (x[xw::x1] + p.kp_torque * err);
  const T idr_ref = x[xw::x2] + p.kp_reactive * q_err;
  const T slip = ws - wr;

  WtgResidual<T> r;
  r.f[0] = (c.mech_torque - te) / (2.0 * p.inertia_s);
  r.f[1] = p.filter_cutoff * (c.speed_ref - wf);
  r.f[2] = p.ki_torque * err;
  r.f[3] = p.ki_reactive * q_err;
  r.f[4] = p.ki_current * (iqr_ref - iqr);
  r.f[5] = p.ki_current * (idr_ref - idr);

  r.g[0] = wb * (vqs - p.r_s * iqs - ws * psi_ds);
  r.g[1] = wb * (vds - p.r_s * ids + ws * psi_qs);
  r.g[2] = wb * (vqr - p.r_r * iqr - slip * psi_dr);
  r.g[3] = wb * (vdr - p.r_r * idr + slip * psi_qr);
  r.g[4] = ls * iqs + lm * iqr - psi_qs;
  r.g[5] = ls * ids + lm * idr - psi_ds;
  r.g[6] = lr * iqr + lm * iqs - psi_qr;
  r.g[7] = lr * idr + lm * ids - psi_dr;
  r.g[8] = pg + (vqs * iqs + vds * ids) + (vqr * iqr + vdr * idr);
  r.g[9] = qg + (vqs * ids - vds * iqs) + (vqr * idr - vdr * iqr);
  r.g[10] = x[xw::x3] + p.kp_current * (iqr_ref - iqr) + slip * (sigma * lr * idr + psi * lm / ls) - vqr;
  r.g[11] = x[xw::x4] + p.kp_current * (idr_ref - idr) - slip * (sigma * lr * iqr) - vdr;
  r.h = pg;
  return r;
}

WtgResidual<double> wtg_residuals(const WtgState& x, double u, const WtgAlgebraic& y, const WtgContext& c);

// Electrical torque psi_qs i_ds - psi_ds i_qs.
double electrical_torque(const WtgAlgebraic& y);
// Stator plus rotor copper losses.
double copper_losses(const WtgAlgebraic& y, const DfigParams& p);

struct AlgebraicSolution {
  WtgAlgebraic y{};
  int iterations = 0;
  double residual = 0.0;   // ||g||_inf
  double condition = 0.0;  // estimate of cond(dg/dy)
};

AlgebraicSolution solve_algebraic(const WtgState& x, double u, const WtgContext& c, const WtgAlgebraic& guess);

OperatingPoint solve_equilibrium(const DfigParams& params, const Dispatch& dispatch);

// max |f|, |g| over all rows at (x, u, y).
double residual_norm(const WtgState& x, double u, const WtgAlgebraic& y, const WtgContext& c);

}  // namespace synth

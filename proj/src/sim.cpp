#include "synth/sim.hpp"

#include "synth/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace synth {

namespace {

int ratio_steps(double a, double step, const char* what) {
  const double r = a / step;
  const long n = std::lround(r);
  if (n < 1 || std::fabs(r - static_cast<double>(n)) > 1e-9 * std::max(1.0, r)) {
    throw SynthError(ErrorKind::invalid_argument, std::string("sim: ") + what + " must be a multiple of the integrator step");
  }
  return static_cast<int>(n);
}

std::string stamp(double t) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << t;
  return os.str();
}

struct WtgStage {
  WtgState f{};
  double dp_g = 0.0;
};

// x is absolute; y is updated in place as the warm start of the next solve.
WtgStage wtg_stage(const WtgState& x, double u, const WtgContext& c, WtgAlgebraic& y, double p_g_eq, double t) {
  AlgebraicSolution sol;
  try {
    sol = solve_algebraic(x, u, c, y);
  } catch (const SynthError& e) {
    throw SynthError(e.kind(), "sim: algebraic solve failed at t = " + stamp(t) + " s: " + e.what());
  }
  y = sol.y;
  const WtgResidual<double> r = wtg_residuals(x, u, y, c);
  WtgStage s;
  s.f = r.f;
  s.dp_g = y[yw::p_g] - p_g_eq;
  return s;
}

WtgState axpy(const WtgState& x, double a, const WtgState& d) {
  WtgState r;
  for (int i = 0; i < kStateDim; ++i) r[i] = x[i] + a * d[i];
  return r;
}

}  // namespace

void Scenario::validate() const {
  std::vector<std::string> errs;
  if (!(disturbance.onset_s >= 0.0)) errs.push_back("disturbance onset must be >= 0");
  if (!(disturbance.magnitude_mw >= 0.0)) errs.push_back("disturbance magnitude must be >= 0");
  if (!(step_s > 0.0)) errs.push_back("integrator step must be positive");
  if (!(t_s > 0.0)) errs.push_back("t_s must be positive");
  if (!(horizon_s >= schedule.z() * t_s)) errs.push_back("horizon shorter than the schedule");
  if (!(trigger_hz < 0.0)) errs.push_back("trigger threshold must be negative");
  if (record_stride < 1) errs.push_back("record stride must be >= 1");
  if (!errs.empty()) {
    std::string msg = "sim: invalid scenario:";
    for (const auto& e : errs) msg += " " + e + ";";
    throw SynthError(ErrorKind::invalid_argument, msg);
  }
}

bool Metrics::violation() const {
  return dg_violation || std::any_of(wtg_violation.begin(), wtg_violation.end(), [](bool b) { return b; });
}

Trajectories simulate_closed_loop(const Scenario& scn, const DieselParams& diesel, const std::vector<WtgUnit>& wtgs) {
  scn.validate();
  diesel.validate();
  const int nw = static_cast<int>(wtgs.size());
  if (scn.schedule.z() > 0 && scn.schedule.num_wtgs() != nw) {
    throw SynthError(ErrorKind::invalid_argument, "sim: schedule WTG count mismatch");
  }
  const double h = scn.step_s;
  const int per_ts = ratio_steps(scn.t_s, h, "t_s");
  const long n_steps = std::lround(scn.horizon_s / h);
  const long n_onset = std::lround(scn.disturbance.onset_s / h);
  const double k_d = 1.0 / diesel.power_base_mva;

  std::vector<WtgContext> ctx;
  std::vector<double> k_dw;
  for (const auto& w : wtgs) {
    w.params.validate();
    ctx.push_back(w.eq.context(w.params));
    k_dw.push_back(w.params.power_base_mva / diesel.power_base_mva);
  }

  Trajectories tr;
  tr.x.resize(nw);
  tr.dp_g.resize(nw);
  tr.u_sp.resize(nw);
  for (const auto& w : wtgs) {
    tr.omega_eq.push_back(w.eq.x[xw::omega_r]);
    tr.inertia.push_back(w.params.inertia_s);
    tr.mech_torque.push_back(w.eq.mech_torque);
  }

  std::array<double, 3> dg{0.0, 0.0, 0.0};
  std::vector<WtgState> xs(nw);
  std::vector<WtgAlgebraic> ys(nw);
  for (int i = 0; i < nw; ++i) {
    xs[i] = wtgs[i].eq.x;
    ys[i] = wtgs[i].eq.y;
  }
  long n_trigger = -1;

  // Schedule level during step n; constant over the step.
  auto u_at = [&](int i, long n) {
    if (n_trigger < 0 || scn.schedule.z() == 0) return 0.0;
    const long k = (n - n_trigger) / per_ts;
    if (k < 0 || k >= scn.schedule.z()) return 0.0;
    return scn.schedule.u(static_cast<int>(k), i) * scn.u_l;
  };

  std::vector<double> dp_g(nw, 0.0);
  auto record = [&](long n, const std::vector<double>& u) {
    tr.t.push_back(static_cast<double>(n) * h);
    tr.dw_d.push_back(dg[0]);
    tr.dp_m.push_back(dg[1]);
    tr.dp_v.push_back(dg[2]);
    for (int i = 0; i < nw; ++i) {
      tr.x[i].push_back(xs[i]);
      tr.dp_g[i].push_back(dp_g[i]);
      tr.u_sp[i].push_back(u[i]);
    }
  };

  struct Deriv {
    std::array<double, 3> dg;
    std::vector<WtgState> w;
  };
  auto eval = [&](const std::array<double, 3>& d, const std::vector<WtgState>& x, const std::vector<double>& u,
                  double p_mw, double t, std::vector<double>* dp_out) {
    Deriv out;
    out.w.resize(nw);
    double support = 0.0;
    for (int i = 0; i < nw; ++i) {
      const WtgStage s = wtg_stage(x[i], u[i], ctx[i], ys[i], wtgs[i].eq.y[yw::p_g], t);
      out.w[i] = s.f;
      support += k_dw[i] * s.dp_g;
      if (dp_out) (*dp_out)[i] = s.dp_g;
    }
    out.dg = diesel_rhs(d, k_d * p_mw - support, diesel);
    return out;
  };

  std::vector<double> u(nw, 0.0);
  eval(dg, xs, u, 0.0, 0.0, &dp_g);
  record(0, u);
  for (long n = 0; n < n_steps; ++n) {
    const double t = static_cast<double>(n) * h;
    for (int i = 0; i < nw; ++i) u[i] = u_at(i, n);
    const double p = n >= n_onset ? scn.disturbance.magnitude_mw : 0.0;

    const Deriv k1 = eval(dg, xs, u, p, t, nullptr);
    auto stage = [&](const Deriv& k, double a, std::array<double, 3>& d2, std::vector<WtgState>& x2) {
      for (int j = 0; j < 3; ++j) d2[j] = dg[j] + a * k.dg[j];
      for (int i = 0; i < nw; ++i) x2[i] = axpy(xs[i], a, k.w[i]);
    };
    std::array<double, 3> d2;
    std::vector<WtgState> x2(nw);
    stage(k1, 0.5 * h, d2, x2);
    const Deriv k2 = eval(d2, x2, u, p, t + 0.5 * h, nullptr);
    stage(k2, 0.5 * h, d2, x2);
    const Deriv k3 = eval(d2, x2, u, p, t + 0.5 * h, nullptr);
    stage(k3, h, d2, x2);
    const Deriv k4 = eval(d2, x2, u, p, t + h, nullptr);
    for (int j = 0; j < 3; ++j) dg[j] += h / 6.0 * (k1.dg[j] + 2.0 * k2.dg[j] + 2.0 * k3.dg[j] + k4.dg[j]);
    for (int i = 0; i < nw; ++i) {
      for (int j = 0; j < kStateDim; ++j) {
        xs[i][j] += h / 6.0 * (k1.w[i][j] + 2.0 * k2.w[i][j] + 2.0 * k3.w[i][j] + k4.w[i][j]);
      }
    }

    const long m = n + 1;
    if (m == n_onset && scn.disturbance.magnitude_mw > 0.0) tr.events.push_back("disturbance onset t=" + stamp(m * h));
    if (n_trigger < 0 && dg[0] <= scn.trigger_hz) {
      n_trigger = m;
      tr.trigger_time = static_cast<double>(m) * h;
      tr.events.push_back("trigger t=" + stamp(tr.trigger_time));
    }
    if (m % scn.record_stride == 0) {
      std::vector<double> um(nw);
      for (int i = 0; i < nw; ++i) um[i] = u_at(i, m);
      const double pm = m >= n_onset ? scn.disturbance.magnitude_mw : 0.0;
      eval(dg, xs, um, pm, m * h, &dp_g);
      record(m, um);
    }
  }
  if (n_trigger >= 0 && scn.schedule.z() > 0) {
    tr.events.push_back("schedule end t=" + stamp(static_cast<double>(n_trigger + static_cast<long>(scn.schedule.z()) * per_ts) * h));
  }
  return tr;
}

Metrics metrics(const Trajectories& tr, const NocConfig& cfg) {
  const int nw = tr.num_wtgs();
  Metrics m;
  m.max_dw_r.assign(nw, 0.0);
  m.wtg_violation.assign(nw, false);
  m.wtg_first_violation_s.assign(nw, -1.0);
  m.delivered_energy.assign(nw, 0.0);
  m.kinetic_energy.assign(nw, 0.0);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double f = tr.dw_d[k];
    m.nadir_hz = std::min(m.nadir_hz, f);
    m.max_dw_d_hz = std::max(m.max_dw_d_hz, std::fabs(f));
    if (f < -cfg.dfd_lim_hz && !m.dg_violation) {
      m.dg_violation = true;
      m.dg_first_violation_s = tr.t[k];
    }
    for (int i = 0; i < nw; ++i) {
      const double dw = std::fabs(tr.x[i][k][xw::omega_r] - tr.omega_eq[i]);
      m.max_dw_r[i] = std::max(m.max_dw_r[i], dw);
      if (dw > cfg.dfw_lim_pu && !m.wtg_violation[i]) {
        m.wtg_violation[i] = true;
        m.wtg_first_violation_s[i] = tr.t[k];
      }
    }
  }
  // Rotor energy balance: P_g tracks T_e w_r up to copper losses, and
  // 2H w dw/dt = T_m w - T_e w gives the drawdown plus mechanical input change.
  for (int i = 0; i < nw && tr.size() > 1; ++i) {
    double e = 0.0, mech = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k) {
      const double dt = tr.t[k] - tr.t[k - 1];
      e += 0.5 * dt * (tr.dp_g[i][k] + tr.dp_g[i][k - 1]);
      const double d0 = tr.x[i][k - 1][xw::omega_r] - tr.omega_eq[i];
      const double d1 = tr.x[i][k][xw::omega_r] - tr.omega_eq[i];
      mech += 0.5 * dt * tr.mech_torque[i] * (d0 + d1);
    }
    const double w0 = tr.x[i].front()[xw::omega_r], w1 = tr.x[i].back()[xw::omega_r];
    m.delivered_energy[i] = e;
    m.kinetic_energy[i] = tr.inertia[i] * (w0 * w0 - w1 * w1) + mech;
  }
  return m;
}

std::vector<WtgState> simulate_wtg(const DfigParams& params, const OperatingPoint& eq, const std::vector<double>& levels,
                                   double hold, double horizon, double sample_dt, double step) {
  if (levels.empty()) throw SynthError(ErrorKind::invalid_argument, "sim: no input levels");
  const int per_sample = ratio_steps(sample_dt, step, "sample_dt");
  const int per_hold = hold > 0.0 ? ratio_steps(hold, step, "hold") : 0;
  const long n_steps = std::lround(horizon / step);
  const WtgContext c = eq.context(params);
  WtgState x = eq.x;
  WtgAlgebraic y = eq.y;
  std::vector<WtgState> out{x};
  const double pg_eq = eq.y[yw::p_g];
  for (long n = 0; n < n_steps; ++n) {
    const std::size_t j = per_hold > 0 ? std::min<std::size_t>(n / per_hold, levels.size() - 1) : 0;
    const double u = levels[j];
    const double t = static_cast<double>(n) * step;
    const WtgState k1 = wtg_stage(x, u, c, y, pg_eq, t).f;
    const WtgState k2 = wtg_stage(axpy(x, 0.5 * step, k1), u, c, y, pg_eq, t).f;
    const WtgState k3 = wtg_stage(axpy(x, 0.5 * step, k2), u, c, y, pg_eq, t).f;
    const WtgState k4 = wtg_stage(axpy(x, step, k3), u, c, y, pg_eq, t).f;
    for (int i = 0; i < kStateDim; ++i) x[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if ((n + 1) % per_sample == 0) out.push_back(x);
  }
  return out;
}

}  // namespace synth

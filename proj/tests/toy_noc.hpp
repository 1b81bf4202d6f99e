#pragma once

#include "synth/afr.hpp"
#include "synth/noc.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

// Z = 6, one WTG, u_BD = 2. Only the fastest current-loop error row and the
// output error stay uncertain, so every realization vertex can be rolled out:
// 6 steps x (S row + O) + the constant disturbance = 13 scalars.
struct ToyNoc {
  synth::AfrDiscrete disc;
  synth::StackedPrediction sp;
  synth::NocConfig cfg;
  std::vector<synth::WtgLinearModel> lin;
};

inline ToyNoc make_toy_noc(const synth::WtgLinearModel& base, double error_scale = 1.0) {
  using namespace synth;
  ToyNoc t;
  WtgLinearModel m = base;
  for (int i = 0; i < kStateDim; ++i) m.s[i] = i == xw::x4 ? error_scale * base.s[i] : Interval(0.0);
  m.o[0] = error_scale * base.o[0];
  t.lin = {m};
  t.cfg.z = 6;
  t.cfg.u_bd = 2;
  t.cfg.max_activations = 2;
  const AfrContinuous c = assemble_afr(DieselParams{}, t.lin);
  t.disc = discretize_zoh(c, 0.1, t.cfg.z, t.lin);
  t.sp = stack_prediction(t.disc, t.cfg.z);
  t.cfg.x0 = Eigen::VectorXd::Zero(c.dim());
  t.cfg.x0[0] = -0.11;
  return t;
}

struct ToyExtremes {
  double min_dw_d = INFINITY;   // Hz
  double max_dw_r = 0.0;        // pu
};

// Every vertex of the box of uncertain scalars, rolled out over x(1..Z).
inline ToyExtremes vertex_extremes(const ToyNoc& t, const synth::Schedule& s) {
  using namespace synth;
  const int z = t.cfg.z;
  const Eigen::MatrixXd u = schedule_levels(s, t.cfg.u_l);
  const Eigen::MatrixXd b = s.b.cast<double>();
  const int scalars = 2 * z + 1;
  ToyExtremes e;
  for (long code = 0; code < (1L << scalars); ++code) {
    Realization w;
    const bool p_hi = code & 1;
    w.p.assign(z, p_hi ? 0.0 : -t.cfg.p_dis_max_mw);
    for (int k = 0; k < z; ++k) {
      Eigen::VectorXd sk = Eigen::VectorXd::Zero(kStateDim);
      const Interval& sr = t.disc.s_stack[k][xw::x4];
      sk[xw::x4] = (code >> (1 + 2 * k)) & 1 ? sr.hi() : sr.lo();
      const Interval& orr = t.disc.o_stack[k][0];
      Eigen::VectorXd ok(1);
      ok[0] = (code >> (2 + 2 * k)) & 1 ? orr.hi() : orr.lo();
      w.s.push_back(sk);
      w.o.push_back(ok);
    }
    const auto xs = rollout(t.disc, t.cfg.x0, u, b, w);
    for (int k = 1; k <= z; ++k) {
      e.min_dw_d = std::min(e.min_dw_d, xs[k][0]);
      e.max_dw_r = std::max(e.max_dw_r, std::fabs(xs[k][3 + xw::omega_r]));
    }
  }
  return e;
}

// Smallest slack of any limit under the worst vertex.
inline double vertex_slack(const ToyNoc& t, const synth::Schedule& s) {
  const ToyExtremes e = vertex_extremes(t, s);
  return std::min(t.cfg.dfd_lim_hz + e.min_dw_d, t.cfg.dfw_lim_pu - e.max_dw_r);
}

// All u sequences with u(0) = 0 and levels 0..u_BD; b and v follow from u.
inline std::vector<synth::Schedule> all_toy_schedules(const ToyNoc& t) {
  using namespace synth;
  const int z = t.cfg.z, levels = t.cfg.u_bd + 1;
  long total = 1;
  for (int k = 1; k < z; ++k) total *= levels;
  std::vector<Schedule> out;
  for (long code = 0; code < total; ++code) {
    Schedule s = Schedule::zeros(z, 1);
    long c = code;
    for (int k = 1; k < z; ++k) {
      s.u(k, 0) = static_cast<int>(c % levels);
      c /= levels;
    }
    int edges = 0;
    for (int k = 0; k < z; ++k) {
      s.b(k, 0) = s.u(k, 0) >= 1;
      s.v(k, 0) = k > 0 && s.b(k, 0) && !s.b(k - 1, 0);
      edges += s.v(k, 0);
    }
    s.c_u = s.u.sum();
    if (edges <= t.cfg.max_activations) out.push_back(s);
  }
  return out;
}

// Sets the DG limit halfway between the uncontrolled and the fully
// supported worst cases, so the toy needs support but has a solution.
inline void tighten_toy_limit(ToyNoc& t) {
  using namespace synth;
  Schedule none = Schedule::zeros(t.cfg.z, 1), full = none;
  for (int k = 1; k < t.cfg.z; ++k) {
    full.u(k, 0) = t.cfg.u_bd;
    full.b(k, 0) = 1;
  }
  full.v(1, 0) = 1;
  t.cfg.dfd_lim_hz = -0.5 * (vertex_extremes(t, none).min_dw_d + vertex_extremes(t, full).min_dw_d);
}

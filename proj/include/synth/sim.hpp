#pragma once

#include "synth/models.hpp"
#include "synth/noc.hpp"

#include <string>
#include <vector>

namespace synth {

struct Disturbance {
  double magnitude_mw = 0.7;  // load picked up by the DG; drives frequency down
  double onset_s = 1.0;
};

struct Scenario {
  Disturbance disturbance;
  double trigger_hz = -0.11;   // schedule clock starts when dw_d first reaches this
  Schedule schedule;
  double t_s = 0.1;
  double u_l = 0.02;
  double horizon_s = 15.0;
  double step_s = 1e-3;
  int record_stride = 10;      // samples kept every stride integrator steps

  void validate() const;
};

struct WtgUnit {
  DfigParams params;
  OperatingPoint eq;
};

struct Trajectories {
  std::vector<double> t;
  std::vector<double> dw_d;   // Hz
  std::vector<double> dp_m;
  std::vector<double> dp_v;
  std::vector<std::vector<WtgState>> x;      // [wtg][sample], absolute
  std::vector<std::vector<double>> dp_g;     // [wtg][sample], pu on S_w
  std::vector<std::vector<double>> u_sp;     // [wtg][sample]
  std::vector<double> omega_eq;              // per WTG
  std::vector<double> inertia;               // per WTG, H_T
  std::vector<double> mech_torque;           // per WTG
  double trigger_time = -1.0;                // -1: never triggered
  std::vector<std::string> events;

  int num_wtgs() const { return static_cast<int>(x.size()); }
  std::size_t size() const { return t.size(); }
};

struct Metrics {
  double nadir_hz = 0.0;
  double max_dw_d_hz = 0.0;
  std::vector<double> max_dw_r;    // per WTG, pu
  bool dg_violation = false;
  double dg_first_violation_s = -1.0;
  std::vector<bool> wtg_violation;
  std::vector<double> wtg_first_violation_s;
  std::vector<double> delivered_energy;   // trapezoid of dP_g, pu s
  std::vector<double> kinetic_energy;     // rotor drawdown plus mechanical input change, pu s

  bool violation() const;
};

// RK4 on [DG; x_w,1..N_w] with the algebraic nonlinear solve after every stage.
Trajectories simulate_closed_loop(const Scenario& scn, const DieselParams& diesel, const std::vector<WtgUnit>& wtgs);

Metrics metrics(const Trajectories& tr, const NocConfig& cfg);

// Isolated WTG from equilibrium with u_sp held at levels[j] on
// [j hold, (j + 1) hold); the last level persists. Returns x_w at every
// multiple of sample_dt up to the horizon (K + 1 states).
std::vector<WtgState> simulate_wtg(const DfigParams& params, const OperatingPoint& eq, const std::vector<double>& levels,
                                   double hold, double horizon, double sample_dt, double step = 1e-3);

}  // namespace synth

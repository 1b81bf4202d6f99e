#include "synth/error.hpp"
#include "synth/sim.hpp"
#include "scenario_fixture.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <utility>

using namespace synth;

namespace {

const ModelChain& chain() {
  static const ModelChain mc = build_model_chain(default_config());
  return mc;
}

// Robust schedule found for the default scenario (C_U = 29), added to the
// test after one solve so the simulator is tested without the solver.
Schedule robust_schedule() {
  const char* rows[2] = {"0005500000000400", "0050055000000000"};
  Schedule s = Schedule::zeros(100, 2);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; rows[i][k] != '\0'; ++k) {
      s.u(k, i) = rows[i][k] - '0';
      s.b(k, i) = s.u(k, i) >= 1;
      s.v(k, i) = k > 0 && s.b(k, i) && !s.b(k - 1, i);
    }
  }
  s.c_u = s.u.sum();
  return s;
}

Scenario base_scenario(const Schedule& s) {
  const ScenarioConfig cfg = default_config();
  Scenario scn;
  scn.disturbance = cfg.disturbance;
  scn.trigger_hz = cfg.x0_dw_d_hz;
  scn.schedule = s;
  scn.t_s = cfg.t_s;
  scn.u_l = cfg.noc.u_l;
  scn.horizon_s = cfg.sim.horizon_s;
  scn.step_s = cfg.sim.step_s;
  scn.record_stride = cfg.sim.record_stride;
  return scn;
}

NocConfig limits() { return default_config().noc; }

}  // namespace

TEST_CASE("frozen schedule sums to its cost") { CHECK(robust_schedule().c_u == 29); }

TEST_CASE("equilibrium is a fixed point of the closed loop") {
  Scenario scn = base_scenario(Schedule::zeros(100, 2));
  scn.disturbance.magnitude_mw = 0.0;
  scn.horizon_s = 10.0;
  const Trajectories tr = simulate_closed_loop(scn, DieselParams{}, chain().units);
  CHECK(tr.trigger_time == -1.0);
  double dev = 0.0;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    dev = std::max({dev, std::fabs(tr.dw_d[k]), std::fabs(tr.dp_m[k]), std::fabs(tr.dp_v[k])});
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < kStateDim; ++j) dev = std::max(dev, std::fabs(tr.x[i][k][j] - chain().units[i].eq.x[j]));
      dev = std::max(dev, std::fabs(tr.dp_g[i][k]));
    }
  }
  CHECK(dev <= 1e-6);
  CHECK(tr.t.size() == 1001);
  CHECK(tr.t.back() == doctest::Approx(10.0));
}

TEST_CASE("support raises the nadir") {
  const Trajectories none = simulate_closed_loop(base_scenario(Schedule::zeros(100, 2)), DieselParams{}, chain().units);
  const Trajectories sup = simulate_closed_loop(base_scenario(robust_schedule()), DieselParams{}, chain().units);
  const Metrics mn = metrics(none, limits()), ms = metrics(sup, limits());
  CHECK(mn.nadir_hz < ms.nadir_hz);
  CHECK(mn.dg_violation);
  CHECK_FALSE(ms.violation());
  CHECK(mn.nadir_hz == doctest::Approx(-0.7501).epsilon(1e-3));
  CHECK(ms.nadir_hz == doctest::Approx(-0.4349).epsilon(1e-3));
  CHECK(sup.trigger_time > 1.0);
  CHECK(sup.trigger_time == none.trigger_time);
  // The schedule starts at the trigger on the sampling grid.
  for (std::size_t k = 0; k < sup.size(); ++k) {
    const double expect = schedule_signal(robust_schedule(), 0, sup.t[k] - sup.trigger_time, 0.1, 0.02);
    if (std::fabs(std::fmod(sup.t[k] - sup.trigger_time + 1e-9, 0.1)) < 2e-9) continue;  // step edges
    CHECK(sup.u_sp[0][k] == doctest::Approx(expect));
  }
}

TEST_CASE("halving the integrator step barely moves the nadir") {
  // The trigger is detected on the step grid, so at 1 ms it lands half a
  // step late and shifts the schedule; from 0.5 ms on it fires at the same
  // instant and only the integration error remains.
  auto run = [](int refine) {
    Scenario scn = base_scenario(robust_schedule());
    scn.step_s /= refine;
    scn.record_stride *= refine;
    const Trajectories tr = simulate_closed_loop(scn, DieselParams{}, chain().units);
    return std::pair{tr.trigger_time, metrics(tr, limits()).nadir_hz};
  };
  const auto [t1, n1] = run(1);
  const auto [t2, n2] = run(2);
  const auto [t4, n4] = run(4);
  CHECK(std::fabs(t1 - t2) <= 1e-3);
  CHECK(std::fabs(n1 - n2) < 1e-3);
  CHECK(t2 == doctest::Approx(t4).epsilon(1e-12));
  CHECK(std::fabs(n2 - n4) < 1e-8);
}

TEST_CASE("metrics on synthetic traces") {
  Trajectories z;
  z.x.resize(1);
  z.dp_g.resize(1);
  z.u_sp.resize(1);
  z.omega_eq = {1.2};
  z.inertia = {4.5};
  z.mech_torque = {0.66};
  for (int k = 0; k <= 100; ++k) {
    z.t.push_back(0.01 * k);
    z.dw_d.push_back(0.0);
    z.dp_m.push_back(0.0);
    z.dp_v.push_back(0.0);
    WtgState x{};
    x[xw::omega_r] = 1.2;
    z.x[0].push_back(x);
    z.dp_g[0].push_back(0.0);
    z.u_sp[0].push_back(0.0);
  }
  const Metrics m0 = metrics(z, limits());
  CHECK(m0.nadir_hz == 0.0);
  CHECK_FALSE(m0.violation());
  CHECK(m0.delivered_energy[0] == 0.0);

  Trajectories dip = z;
  for (std::size_t k = 0; k < dip.size(); ++k) dip.dw_d[k] = -0.6 * std::sin(M_PI * dip.t[k]);
  const Metrics m1 = metrics(dip, limits());
  CHECK(m1.nadir_hz == doctest::Approx(-0.6).epsilon(1e-6));
  CHECK(m1.dg_violation);
  CHECK(m1.violation());
  // First sample past 0.5 Hz: sin(pi t) > 5/6 first at t = 0.32.
  CHECK(m1.dg_first_violation_s == doctest::Approx(0.32));

  Trajectories fast = z;
  fast.x[0][50][xw::omega_r] = 1.2 + 0.04;
  const Metrics m2 = metrics(fast, limits());
  CHECK(m2.wtg_violation[0]);
  CHECK(m2.wtg_first_violation_s[0] == doctest::Approx(0.5));
  CHECK(m2.max_dw_r[0] == doctest::Approx(0.04));
}

TEST_CASE("delivered energy matches the rotor energy balance") {
  const Trajectories tr = simulate_closed_loop(base_scenario(robust_schedule()), DieselParams{}, chain().units);
  const Metrics m = metrics(tr, limits());
  for (int i = 0; i < 2; ++i) {
    CHECK(std::fabs(m.delivered_energy[i]) > 1e-3);
    CHECK(std::fabs(m.delivered_energy[i] - m.kinetic_energy[i]) <= 0.05 * std::fabs(m.kinetic_energy[i]));
  }
}

TEST_CASE("larger disturbances never delay the trigger") {
  double prev = INFINITY;
  for (double mw : {0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
    Scenario scn = base_scenario(Schedule::zeros(10, 2));
    scn.disturbance.magnitude_mw = mw;
    scn.horizon_s = 4.0;
    const Trajectories tr = simulate_closed_loop(scn, DieselParams{}, chain().units);
    const double t = tr.trigger_time < 0.0 ? INFINITY : tr.trigger_time;
    CHECK(t <= prev);
    prev = t;
  }
  CHECK(prev < INFINITY);
}

TEST_CASE("algebraic failures carry the time stamp") {
  Scenario scn = base_scenario(robust_schedule());
  scn.u_l = 1e3;
  try {
    simulate_closed_loop(scn, DieselParams{}, chain().units);
    FAIL("expected the algebraic solve to fail");
  } catch (const SynthError& e) {
    const std::string what = e.what();
    const std::string tag = "sim: algebraic solve failed at t = ";
    REQUIRE(what.rfind(tag, 0) == 0);
    const double t = std::stod(what.substr(tag.size()));
    CHECK(t > 1.0);
    CHECK(t < 15.0);
  }
}

TEST_CASE("scenario validation") {
  Scenario scn = base_scenario(robust_schedule());
  scn.horizon_s = 5.0;
  CHECK_THROWS(simulate_closed_loop(scn, DieselParams{}, chain().units));
  scn = base_scenario(robust_schedule());
  scn.step_s = 0.03;
  CHECK_THROWS(simulate_closed_loop(scn, DieselParams{}, chain().units));
  scn = base_scenario(Schedule::zeros(100, 1));
  CHECK_THROWS(simulate_closed_loop(scn, DieselParams{}, chain().units));
}

TEST_CASE("small disturbances stay inside the linear error tube") {
  // 10% of the rated outage, support from an early trigger, compared on the
  // t_s grid from the trigger with S and O always active.
  const ModelChain& mc = chain();
  Scenario scn = base_scenario(robust_schedule());
  scn.disturbance.magnitude_mw = 0.07;
  scn.trigger_hz = -0.005;
  scn.record_stride = 1;
  const Trajectories tr = simulate_closed_loop(scn, DieselParams{}, mc.units);
  REQUIRE(tr.trigger_time > 0.0);
  const auto n0 = static_cast<std::size_t>(std::lround(tr.trigger_time / scn.step_s));

  const int z = mc.sp.z, n = mc.sp.n, nw = 2;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  x0[0] = tr.dw_d[n0];
  x0[1] = tr.dp_m[n0];
  x0[2] = tr.dp_v[n0];
  for (int i = 0; i < nw; ++i)
    for (int j = 0; j < kStateDim; ++j) x0[3 + kStateDim * i + j] = tr.x[i][n0][j] - mc.units[i].eq.x[j];
  const Schedule s = robust_schedule();
  Realization mid;
  mid.p.assign(z, -0.07);
  for (int k = 0; k < z; ++k) {
    mid.s.push_back(Eigen::VectorXd::Zero(kStateDim * nw));
    mid.o.push_back(Eigen::VectorXd::Zero(nw));
    for (int j = 0; j < kStateDim * nw; ++j) mid.s[k][j] = mc.disc.s_stack[k][j].mid();
    for (int i = 0; i < nw; ++i) mid.o[k][i] = mc.disc.o_stack[k][i].mid();
  }
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(z, nw);
  const Eigen::VectorXd center = stacked_rollout(mc.sp, x0, schedule_levels(s, scn.u_l), ones, mid);
  Eigen::VectorXd rad_s(z * kStateDim * nw), rad_o(z * nw);
  for (int k = 0; k < z; ++k) {
    for (int j = 0; j < kStateDim * nw; ++j) rad_s[k * kStateDim * nw + j] = mc.disc.s_stack[k][j].rad();
    for (int i = 0; i < nw; ++i) rad_o[k * nw + i] = mc.disc.o_stack[k][i].rad();
  }
  const Eigen::VectorXd rad = mc.sp.b3.cwiseAbs() * rad_s + mc.sp.b4.cwiseAbs() * rad_o;
  long outside = 0;
  double worst_ratio = 0.0;
  for (int k = 1; k <= z; ++k) {
    const std::size_t idx = n0 + static_cast<std::size_t>(k) * 100;
    REQUIRE(idx < tr.size());
    auto check = [&](Eigen::Index row, double value) {
      const Eigen::Index r = static_cast<Eigen::Index>(k - 1) * n + row;
      const double off = std::fabs(value - center[r]);
      outside += off > rad[r] + 1e-9;
      if (rad[r] > 0.0) worst_ratio = std::max(worst_ratio, off / rad[r]);
    };
    check(0, tr.dw_d[idx]);
    for (int i = 0; i < nw; ++i) check(3 + kStateDim * i + xw::omega_r, tr.x[i][idx][xw::omega_r] - mc.units[i].eq.x[xw::omega_r]);
  }
  CHECK(outside == 0);
  MESSAGE("largest tube fraction used: " << worst_ratio);
}

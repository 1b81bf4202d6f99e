#include "synth/linalg.hpp"
#include "synth/sim.hpp"
#include "wtg_fixture.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace synth;

namespace {

Eigen::VectorXd gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

Eigen::VectorXd unit_cube(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = (rng() % 4 == 0) ? ((rng() & 1) ? 1.0 : -1.0) : d(rng);
  return v;
}

RowMatrix random_generators(std::mt19937_64& rng, int n, int m) {
  RowMatrix g(n, m);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = d(rng);
  return g;
}

}  // namespace

TEST_CASE("zonotope operations") {
  std::mt19937_64 rng(31);
  const Zonotope z(gaussian(rng, 4), random_generators(rng, 4, 9));

  const Zonotope id = zono_linear_map(Eigen::MatrixXd::Identity(4, 4), z);
  CHECK(id.center() == z.center());
  CHECK(id.generators() == z.generators());

  const Zonotope a = Zonotope::box(Eigen::Vector2d(1, 2), Eigen::Vector2d(0.5, 1.0));
  const Zonotope b = Zonotope::box(Eigen::Vector2d(-1, 0), Eigen::Vector2d(0.25, 2.0));
  const IntervalVector h = hull(zono_minkowski(a, b));
  CHECK(h[0] == Interval(-0.75, 0.75));
  CHECK(h[1] == Interval(-1.0, 5.0));

  const Zonotope shifted = zono_translate(z, Eigen::Vector4d(1, 0, 0, 0));
  CHECK(shifted.center()[0] == z.center()[0] + 1.0);

  const Zonotope big(gaussian(rng, 4), random_generators(rng, 4, 40));
  const Zonotope red = zono_reduce(big, 3.0);
  CHECK(red.order() <= 3.0);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::VectorXd p = big.point(unit_cube(rng, big.num_generators()));
    CHECK(red.contains(p, 1e-9));
  }
  const Zonotope again = zono_reduce(big, 3.0);
  CHECK(again.generators() == red.generators());
}

TEST_CASE("zonotope containment") {
  const Zonotope box = Zonotope::box(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1));
  CHECK(box.contains(Eigen::Vector2d(0.9, -0.9)));
  CHECK_FALSE(box.contains(Eigen::Vector2d(1.1, 0)));
  RowMatrix g(2, 1);
  g << 1, 1;
  const Zonotope seg(Eigen::Vector2d::Zero(), g);
  CHECK(seg.contains(Eigen::Vector2d(0.5, 0.5)));
  CHECK_FALSE(seg.contains(Eigen::Vector2d(0.5, -0.5)));
}

TEST_CASE("no input: every set is the equilibrium") {
  const auto& f = wtg_fixture();
  const ReachResult r = reach_nonlinear(f.params, f.eq, Interval(0.0), 1.0);
  const Eigen::VectorXd s_eq = f.eq.s();
  for (std::size_t i = 0; i < r.theta.size(); ++i) {
    CHECK(r.theta[i].contains(s_eq[static_cast<Eigen::Index>(i)]));
    CHECK(r.theta[i].width() <= 1e-12 * std::max(1.0, std::fabs(s_eq[static_cast<Eigen::Index>(i)])));
  }
  for (const Zonotope& z : r.step_sets) {
    const IntervalVector h = hull(z);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(h[i].width() <= 1e-12);
  }
}

TEST_CASE("Monte Carlo containment of piecewise-constant inputs") {
  const auto& f = wtg_fixture();
  ReachOptions opt;
  opt.input_hold = 0.5;
  const double horizon = 2.0;
  const ReachResult r = reach_nonlinear(f.params, f.eq, f.u, horizon, opt);
  REQUIRE(r.step_sets.size() == 201);
  std::mt19937_64 rng(0xc0ffee);
  std::uniform_real_distribution<double> level(f.u.lo(), f.u.hi());
  long outside_box = 0, outside_zono = 0;
  for (int run = 0; run < 1000; ++run) {
    std::vector<double> levels(4);
    for (double& v : levels) v = (rng() % 5 == 0) ? ((rng() & 1) ? f.u.hi() : f.u.lo()) : level(rng);
    const std::vector<WtgState> traj = simulate_wtg(f.params, f.eq, levels, opt.input_hold, horizon, opt.dt, 5e-3);
    for (std::size_t k = 0; k < traj.size(); ++k) {
      Eigen::VectorXd x(kStateDim);
      for (int i = 0; i < kStateDim; ++i) x[i] = traj[k][i];
      const IntervalVector h = hull(r.step_sets[k]);
      if (!h.contains(x)) {
        ++outside_box;
        continue;
      }
      if (k < r.step_boxes.size()) {
        for (int i = 0; i < kStateDim; ++i) outside_box += !r.step_boxes[k][i].contains(x[i]);
      }
      if (run < 40 && k % 10 == 0) outside_zono += !r.step_sets[k].contains(x, 1e-10);
    }
  }
  CHECK(outside_box == 0);
  CHECK(outside_zono == 0);
}

TEST_CASE("theta widens with the input set and keeps a margin") {
  const auto& f = wtg_fixture();
  const ReachResult narrow = reach_nonlinear(f.params, f.eq, Interval(0.0, 0.05), f.horizon);
  CHECK(f.reach.theta.contains(narrow.theta));
  CHECK(f.reach.theta[xw::omega_r].width() > narrow.theta[xw::omega_r].width());
  CHECK(f.reach.theta.contains(f.eq.s()));
  CHECK(f.reach.theta[kUIndex] == f.u);

  // Strictly wider than what constant extreme inputs actually reach.
  const std::vector<WtgState> hi = simulate_wtg(f.params, f.eq, {f.u.hi()}, 0.0, f.horizon, 0.01, 5e-3);
  double lo_r = INFINITY, hi_r = -INFINITY;
  for (const WtgState& x : hi) {
    lo_r = std::min(lo_r, x[xw::omega_r]);
    hi_r = std::max(hi_r, x[xw::omega_r]);
  }
  CHECK(f.reach.theta[xw::omega_r].lo() < lo_r);
  CHECK(f.reach.theta[xw::omega_r].hi() >= hi_r);
}

TEST_CASE("reach is deterministic") {
  const auto& f = wtg_fixture();
  const ReachResult again = reach_nonlinear(f.params, f.eq, f.u, f.horizon);
  CHECK(again.theta == f.reach.theta);
  REQUIRE(again.step_sets.size() == f.reach.step_sets.size());
  for (std::size_t k = 0; k < again.step_sets.size(); ++k) {
    CHECK(again.step_sets[k].center() == f.reach.step_sets[k].center());
    CHECK(again.step_sets[k].generators() == f.reach.step_sets[k].generators());
  }
}

TEST_CASE("linear reach without error is the linear trajectory") {
  const auto& f = wtg_fixture();
  WtgLinearModel m = f.lin;
  for (std::size_t i = 0; i < m.s.size(); ++i) m.s[i] = Interval(0.0);
  const double dt = 0.1, u = 0.07;
  const std::vector<Zonotope> sets = reach_linear_with_error(m, u, 3.0, dt);
  REQUIRE(sets.size() == 31);
  const Zoh z = zoh(m.lin.a_w, m.lin.b_w, dt);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(kStateDim);
  for (std::size_t k = 0; k < sets.size(); ++k) {
    const IntervalVector h = hull(sets[k]);
    for (int i = 0; i < kStateDim; ++i) {
      CHECK(h[i].width() == 0.0);
      CHECK(std::fabs(h[i].lo() - x[i]) <= 1e-12 * (1.0 + std::fabs(x[i])));
    }
    x = z.phi * x + z.gamma * u;
  }
}

TEST_CASE("linear reach hulls are insensitive to the step") {
  // Halving from 0.02 s down to the default 0.01 s step.
  const auto& f = wtg_fixture();
  const std::vector<Zonotope> coarse = reach_linear_with_error(f.lin, 0.05, f.horizon, 0.02);
  const std::vector<Zonotope> fine = reach_linear_with_error(f.lin, 0.05, f.horizon, 0.01);
  for (int sec = 1; sec <= 10; ++sec) {
    const IntervalVector hc = hull(coarse[static_cast<std::size_t>(50 * sec)]);
    const IntervalVector hf = hull(fine[static_cast<std::size_t>(100 * sec)]);
    for (int i = 0; i < kStateDim; ++i) {
      if (hc[i].width() == 0.0) {
        CHECK(hf[i].width() == 0.0);
        continue;
      }
      CHECK_MESSAGE(std::fabs(hf[i].width() - hc[i].width()) <= 0.05 * hc[i].width(), "t " << sec << " state " << i);
    }
  }
}

TEST_CASE("bad reach arguments") {
  const auto& f = wtg_fixture();
  CHECK_THROWS(reach_linear_with_error(f.lin, 0.0, 1.0, 0.0));
  CHECK_THROWS(reach_linear_with_error(f.lin, 0.0, 1.0, 0.3));
}

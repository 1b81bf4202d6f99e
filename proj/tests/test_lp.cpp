#include "synth/kernels.hpp"
#include "synth/lp.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <random>

using namespace synth;

namespace {

struct Constraint {
  Eigen::VectorXd a;
  double b;  // a' x = b when active
};

// Minimum over all vertices of the bounded polyhedron, or nullopt when empty.
std::optional<double> vertex_oracle(const lp::Problem& p) {
  const int n = p.num_cols();
  std::vector<Constraint> faces;
  for (int i = 0; i < p.num_rows(); ++i) {
    const Eigen::VectorXd a = p.a.row(i).transpose();
    if (std::isfinite(p.row_lo[i])) faces.push_back({a, p.row_lo[i]});
    if (std::isfinite(p.row_hi[i]) && p.row_hi[i] != p.row_lo[i]) faces.push_back({a, p.row_hi[i]});
  }
  for (int j = 0; j < n; ++j) {
    faces.push_back({Eigen::VectorXd::Unit(n, j), p.col_lo[j]});
    faces.push_back({Eigen::VectorXd::Unit(n, j), p.col_hi[j]});
  }
  const int f = static_cast<int>(faces.size());
  std::optional<double> best;
  std::vector<int> pick(static_cast<std::size_t>(n));
  // Enumerate n-subsets of faces.
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd m(n, n);
      Eigen::VectorXd rhs(n);
      for (int k = 0; k < n; ++k) {
        m.row(k) = faces[pick[k]].a.transpose();
        rhs[k] = faces[pick[k]].b;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(rhs);
      for (int j = 0; j < n; ++j)
        if (x[j] < p.col_lo[j] - 1e-9 || x[j] > p.col_hi[j] + 1e-9) return;
      const Eigen::VectorXd ax = p.a * x;
      for (int i = 0; i < p.num_rows(); ++i)
        if (ax[i] < p.row_lo[i] - 1e-9 || ax[i] > p.row_hi[i] + 1e-9) return;
      const double v = p.cost.dot(x);
      if (!best || v < *best) best = v;
      return;
    }
    for (int i = start; i < f; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

lp::Problem random_lp(std::mt19937_64& rng, int n, int m) {
  std::uniform_int_distribution<int> coef(-4, 4);
  std::uniform_int_distribution<int> kind(0, 5);
  lp::Problem p;
  p.cost.resize(n);
  p.col_lo.resize(n);
  p.col_hi.resize(n);
  for (int j = 0; j < n; ++j) {
    p.cost[j] = coef(rng);
    p.col_lo[j] = -std::abs(coef(rng));
    p.col_hi[j] = p.col_lo[j] + 1 + std::abs(coef(rng));
  }
  p.a.resize(m, n);
  p.row_lo.resize(m);
  p.row_hi.resize(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) p.a(i, j) = coef(rng) * (kind(rng) == 0 ? 0 : 1);
    const double c = coef(rng);
    switch (kind(rng)) {
      case 0: p.row_lo[i] = c; p.row_hi[i] = c; break;
      case 1: case 2: p.row_lo[i] = c; p.row_hi[i] = lp::kInf; break;
      case 3: case 4: p.row_lo[i] = -lp::kInf; p.row_hi[i] = c; break;
      default: p.row_lo[i] = c; p.row_hi[i] = c + 1 + std::abs(coef(rng)); break;
    }
  }
  return p;
}

}  // namespace

TEST_CASE("dual simplex agrees with vertex enumeration") {
  std::mt19937_64 rng(2024);
  int feasible = 0, infeasible = 0;
  for (int t = 0; t < 600; ++t) {
    const int n = 2 + t % 3, m = 1 + t % 5;
    const lp::Problem p = random_lp(rng, n, m);
    const auto ref = vertex_oracle(p);
    const lp::Result r = lp::solve(p);
    REQUIRE(r.status != lp::Status::iteration_limit);
    if (!ref) {
      CHECK(r.status == lp::Status::infeasible);
      ++infeasible;
      continue;
    }
    ++feasible;
    REQUIRE(r.status == lp::Status::optimal);
    CHECK(r.objective == doctest::Approx(*ref).epsilon(1e-9).scale(1.0));
    CHECK(p.cost.dot(r.x) == doctest::Approx(r.objective).epsilon(1e-9).scale(1.0));
    const Eigen::VectorXd ax = p.a * r.x;
    for (int i = 0; i < m; ++i) {
      CHECK(ax[i] >= p.row_lo[i] - 1e-8);
      CHECK(ax[i] <= p.row_hi[i] + 1e-8);
    }
    for (int j = 0; j < n; ++j) {
      CHECK(r.x[j] >= p.col_lo[j] - 1e-9);
      CHECK(r.x[j] <= p.col_hi[j] + 1e-9);
    }
  }
  CHECK(feasible > 100);
  CHECK(infeasible > 20);
}

TEST_CASE("simple infeasible instance names its rows") {
  lp::Problem p;
  p.cost = Eigen::Vector2d(1, 1);
  p.col_lo = Eigen::Vector2d(0, 0);
  p.col_hi = Eigen::Vector2d(1, 1);
  p.a.resize(2, 2);
  p.a << 1, 1, 1, -1;
  p.row_lo = Eigen::Vector2d(3, -lp::kInf);
  p.row_hi = Eigen::Vector2d(lp::kInf, 0);
  const lp::Result r = lp::solve(p);
  CHECK(r.status == lp::Status::infeasible);
  CHECK(std::find(r.infeasibility_rows.begin(), r.infeasibility_rows.end(), 0) != r.infeasibility_rows.end());
}

TEST_CASE("warm starts reach the cold-start optimum") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 200; ++t) {
    lp::Problem p = random_lp(rng, 4, 5);
    lp::DualSimplex warm(p);
    if (warm.solve() != lp::Status::optimal) continue;
    const lp::Basis b = warm.basis();

    // Tighten a column bound through the live solver, then compare with a cold solve.
    const int j = static_cast<int>(rng() % 4);
    const double mid = 0.5 * (p.col_lo[j] + p.col_hi[j]);
    warm.set_col_bounds(j, p.col_lo[j], mid);
    p.col_hi[j] = mid;
    const lp::Status ws = warm.solve();
    const lp::Result cold = lp::solve(p);
    CHECK(ws == cold.status);
    if (ws == lp::Status::optimal) CHECK(warm.objective() == doctest::Approx(cold.objective).epsilon(1e-9).scale(1.0));

    // Restoring a saved basis on a fresh solver.
    lp::DualSimplex again(p);
    again.set_basis(b);
    CHECK(again.solve() == cold.status);
    if (cold.status == lp::Status::optimal) CHECK(again.objective() == doctest::Approx(cold.objective).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("rows added after a solve") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 200; ++t) {
    lp::Problem p = random_lp(rng, 3, 3);
    lp::DualSimplex s(p);
    if (s.solve() != lp::Status::optimal) continue;
    const lp::Problem extra = random_lp(rng, 3, 2);
    std::vector<std::vector<double>> rows;
    std::vector<double> lo, hi;
    for (int i = 0; i < 2; ++i) {
      rows.push_back({extra.a(i, 0), extra.a(i, 1), extra.a(i, 2)});
      lo.push_back(extra.row_lo[i]);
      hi.push_back(extra.row_hi[i]);
    }
    s.add_rows(rows, lo, hi);
    const lp::Status st = s.solve();
    lp::Problem full = p;
    full.a.conservativeResize(5, 3);
    full.row_lo.conservativeResize(5);
    full.row_hi.conservativeResize(5);
    for (int i = 0; i < 2; ++i) {
      full.a.row(3 + i) = extra.a.row(i);
      full.row_lo[3 + i] = extra.row_lo[i];
      full.row_hi[3 + i] = extra.row_hi[i];
    }
    const auto ref = vertex_oracle(full);
    CHECK(st == (ref ? lp::Status::optimal : lp::Status::infeasible));
    if (ref && st == lp::Status::optimal) CHECK(s.objective() == doctest::Approx(*ref).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("a larger dense instance under both kernels") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = 60, m = 80;
  lp::Problem p;
  p.cost.resize(n);
  p.col_lo = Eigen::VectorXd::Constant(n, -1.0);
  p.col_hi = Eigen::VectorXd::Constant(n, 2.0);
  for (int j = 0; j < n; ++j) p.cost[j] = g(rng);
  p.a.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) p.a(i, j) = g(rng);
  p.row_lo = Eigen::VectorXd::Constant(m, -lp::kInf);
  p.row_hi = Eigen::VectorXd::Constant(m, 3.0);
  const lp::Result r = lp::solve(p);
  REQUIRE(r.status == lp::Status::optimal);
  CHECK((p.a * r.x).maxCoeff() <= 3.0 + 1e-8);
  if (kernels::isa_available(kernels::Isa::avx2)) {
    const kernels::Isa prev = kernels::select_isa(kernels::active_isa() == kernels::Isa::avx2 ? kernels::Isa::scalar
                                                                                               : kernels::Isa::avx2);
    const lp::Result other = lp::solve(p);
    kernels::select_isa(prev);
    CHECK(other.objective == r.objective);
    CHECK(other.iterations == r.iterations);
  }
}

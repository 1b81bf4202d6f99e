#include "synth/noc.hpp"

#include "synth/error.hpp"
#include "synth/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

namespace synth {

using Vec = Eigen::VectorXd;

void NocConfig::validate(int n) const {
  std::vector<std::string> bad;
  if (!(dfd_lim_hz > 0.0)) bad.emplace_back("dfd_lim must be positive");
  if (!(dfw_lim_pu > 0.0)) bad.emplace_back("dfw_lim must be positive");
  if (!(u_l > 0.0)) bad.emplace_back("u_L must be positive");
  if (u_bd < 1) bad.emplace_back("u_BD must be at least 1");
  if (!(p_dis_max_mw >= 0.0)) bad.emplace_back("P_dis_max must be non-negative");
  if (max_activations < 1) bad.emplace_back("max_activations must be at least 1");
  if (big_m != 0.0 && big_m < u_bd + 1.0) bad.emplace_back("M must be at least u_BD + 1");
  if (z < 2) bad.emplace_back("Z must be at least 2");
  if (x0.size() != n) bad.emplace_back("X0 has the wrong dimension");
  if (!bad.empty()) {
    std::string msg = "noc config:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw SynthError(ErrorKind::config, msg);
  }
}

RobustRow robustify_row(const Vec& u_coef, double constant, const Vec& p_coef, const Interval& p, const Vec& e_coef,
                        const std::vector<Interval>& e_int, const std::vector<int>& e_gate, int num_gates) {
  if (static_cast<std::size_t>(e_coef.size()) != e_int.size() || e_int.size() != e_gate.size()) {
    throw SynthError(ErrorKind::invalid_argument, "robustify_row: term arrays differ in length");
  }
  RobustRow r{u_coef, Vec::Zero(num_gates), constant};
  // Constant-step disturbance: one magnitude for the whole horizon.
  const double pc = p_coef.sum();
  r.constant += std::max(pc * p.lo(), pc * p.hi());
  for (Eigen::Index j = 0; j < e_coef.size(); ++j) {
    const double c = e_coef[j];
    if (c == 0.0) continue;
    const double w = std::max(c * e_int[j].lo(), c * e_int[j].hi());
    if (e_gate[j] < 0) {
      r.constant += w;
    } else {
      if (e_gate[j] >= num_gates) throw SynthError(ErrorKind::invalid_argument, "robustify_row: gate out of range");
      r.b_coef[e_gate[j]] += w;
    }
  }
  return r;
}

namespace {

struct LimitRow {
  RowInfo info;
  int state;    // component of x
  double sign;  // constraint sign * x_state <= rhs
  double rhs;
};

std::vector<LimitRow> limit_rows(int z, int nw, const NocConfig& cfg) {
  std::vector<LimitRow> out;
  for (int k = 0; k < z; ++k) {
    // The outage drives dw_d down; the one-sided limit is its lower side.
    out.push_back({{RowKind::dg_frequency, -1, k}, 0, -1.0, cfg.dfd_lim_hz});
    for (int i = 0; i < nw; ++i) {
      const int c = 3 + kStateDim * i + xw::omega_r;
      out.push_back({{RowKind::wtg_speed_upper, i, k}, c, 1.0, cfg.dfw_lim_pu});
      out.push_back({{RowKind::wtg_speed_lower, i, k}, c, -1.0, cfg.dfw_lim_pu});
    }
  }
  return out;
}

// Local u/b index i * Z + k.
RobustRow robust_limit_row(const StackedPrediction& sp, const AfrDiscrete& d, const NocConfig& cfg, const LimitRow& lr,
                           bool robust) {
  const int z = sp.z, nw = d.num_wtgs(), n = sp.n;
  const Eigen::Index r = static_cast<Eigen::Index>(lr.info.k) * n + lr.state;
  const double sg = lr.sign;
  Vec u_coef = Vec::Zero(nw * z);
  for (int k = 0; k < z; ++k)
    for (int i = 0; i < nw; ++i) u_coef[i * z + k] = sg * cfg.u_l * sp.b1(r, k * nw + i);
  const double constant = sg * sp.a.row(r).dot(cfg.x0);
  const Vec p_coef = sg * sp.b2.row(r).transpose();
  Vec e_coef;
  std::vector<Interval> e_int;
  std::vector<int> e_gate;
  if (robust) {
    const int per = kStateDim * nw;
    e_coef.resize(static_cast<Eigen::Index>(z) * (per + nw));
    e_int.reserve(e_coef.size());
    e_gate.reserve(e_coef.size());
    Eigen::Index t = 0;
    for (int k = 0; k < z; ++k) {
      for (int i = 0; i < nw; ++i) {
        for (int j = 0; j < kStateDim; ++j) {
          e_coef[t++] = sg * sp.b3(r, k * per + kStateDim * i + j);
          e_int.push_back(d.s_stack[k][kStateDim * i + j]);
          e_gate.push_back(i * z + k);
        }
        e_coef[t++] = sg * sp.b4(r, k * nw + i);
        e_int.push_back(d.o_stack[k][i]);
        e_gate.push_back(i * z + k);
      }
    }
  }
  return robustify_row(u_coef, constant, p_coef, Interval(-cfg.p_dis_max_mw, 0.0), e_coef, e_int, e_gate, nw * z);
}

std::string row_name(const RowInfo& r) {
  switch (r.kind) {
    case RowKind::dg_frequency: return "dg_" + std::to_string(r.k + 1);
    case RowKind::wtg_speed_upper: return "wup_" + std::to_string(r.wtg) + "_" + std::to_string(r.k + 1);
    case RowKind::wtg_speed_lower: return "wlo_" + std::to_string(r.wtg) + "_" + std::to_string(r.k + 1);
    case RowKind::big_m_link: return "link_" + std::to_string(r.wtg) + "_" + std::to_string(r.k);
    case RowKind::activation_edge: return "edge_" + std::to_string(r.wtg) + "_" + std::to_string(r.k);
    case RowKind::activation_budget: return "budget_" + std::to_string(r.wtg);
  }
  return "row";
}

}  // namespace

MilpInstance build_milp(const StackedPrediction& sp, const AfrDiscrete& d, const NocConfig& cfg, bool robust) {
  cfg.validate(sp.n);
  if (sp.z != cfg.z || d.z != cfg.z) throw SynthError(ErrorKind::invalid_argument, "build_milp: Z mismatch");
  const int z = cfg.z, nw = d.num_wtgs();
  {
    const double v0 = -cfg.x0[0];
    if (v0 > cfg.dfd_lim_hz) throw SynthError(ErrorKind::infeasible, "infeasible by construction: X0 violates the DG limit");
    for (int i = 0; i < nw; ++i) {
      if (std::fabs(cfg.x0[3 + kStateDim * i + xw::omega_r]) > cfg.dfw_lim_pu) {
        throw SynthError(ErrorKind::infeasible, "infeasible by construction: X0 violates a WTG speed limit");
      }
    }
  }

  MilpInstance m;
  m.num_wtgs = nw;
  m.z = z;
  const int nv = 3 * nw * z;
  lp::Problem& q = m.problem.lp;
  q.cost = Vec::Zero(nv);
  q.col_lo = Vec::Zero(nv);
  q.col_hi = Vec::Ones(nv);
  m.col_names.resize(nv);
  for (int i = 0; i < nw; ++i) {
    for (int k = 0; k < z; ++k) {
      q.cost[m.iu(i, k)] = 1.0;
      q.col_hi[m.iu(i, k)] = cfg.u_bd;
      m.col_names[m.iu(i, k)] = "u_" + std::to_string(i) + "_" + std::to_string(k);
      m.col_names[m.ib(i, k)] = "b_" + std::to_string(i) + "_" + std::to_string(k);
      m.col_names[m.iv(i, k)] = "v_" + std::to_string(i) + "_" + std::to_string(k);
    }
    // Support starts from rest: u(0) = 0 and no edge can be counted at k = 0.
    q.col_hi[m.iu(i, 0)] = 0.0;
    q.col_hi[m.iv(i, 0)] = 0.0;
  }
  m.problem.integer.assign(nv, true);

  std::vector<std::vector<double>> rows;
  std::vector<double> lo, hi;
  std::vector<bool> lazy;
  auto push = [&](std::vector<double> a, double l, double h, const RowInfo& info, bool is_lazy) {
    rows.push_back(std::move(a));
    lo.push_back(l);
    hi.push_back(h);
    lazy.push_back(is_lazy);
    m.rows.push_back(info);
    m.row_names.push_back(row_name(info));
  };

  for (const LimitRow& lr : limit_rows(z, nw, cfg)) {
    const RobustRow rr = robust_limit_row(sp, d, cfg, lr, robust);
    std::vector<double> a(nv, 0.0);
    double max_lhs = 0.0;
    for (int i = 0; i < nw; ++i) {
      for (int k = 0; k < z; ++k) {
        const double cu = rr.u_coef[i * z + k], cb = rr.b_coef[i * z + k];
        a[m.iu(i, k)] = cu;
        a[m.ib(i, k)] = cb;
        max_lhs += std::max(0.0, cu * q.col_hi[m.iu(i, k)]) + std::max(0.0, cb);
      }
    }
    const double rhs = lr.rhs - rr.constant;
    if (max_lhs <= rhs) {
      ++m.dropped_rows;
      continue;
    }
    push(std::move(a), -lp::kInf, rhs, lr.info, true);
  }

  const double bm = cfg.m();
  for (int i = 0; i < nw; ++i) {
    for (int k = 0; k < z; ++k) {
      // b = 1 exactly when u >= 1.
      std::vector<double> a(nv, 0.0);
      a[m.iu(i, k)] = -1.0;
      a[m.ib(i, k)] = bm;
      push(std::move(a), 0.0, bm - 1.0, {RowKind::big_m_link, i, k}, false);
    }
    for (int k = 1; k < z; ++k) {
      std::vector<double> a(nv, 0.0);
      a[m.iv(i, k)] = 1.0;
      a[m.ib(i, k)] = -1.0;
      a[m.ib(i, k - 1)] = 1.0;
      push(std::move(a), 0.0, lp::kInf, {RowKind::activation_edge, i, k}, false);
    }
    std::vector<double> a(nv, 0.0);
    for (int k = 0; k < z; ++k) a[m.iv(i, k)] = 1.0;
    push(std::move(a), -lp::kInf, cfg.max_activations, {RowKind::activation_budget, i, 0}, false);
  }

  q.a.resize(static_cast<Eigen::Index>(rows.size()), nv);
  q.row_lo.resize(static_cast<Eigen::Index>(rows.size()));
  q.row_hi.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    q.a.row(t) = Eigen::Map<const Eigen::RowVectorXd>(rows[t].data(), nv);
    q.row_lo[t] = lo[t];
    q.row_hi[t] = hi[t];
  }
  m.problem.lazy = std::move(lazy);
  // Branch on activation structure before magnitudes: b and v decide the pattern, u then follows.
  m.problem.priority.assign(m.problem.lp.num_cols(), 0);
  for (int i = 0; i < nw; ++i) {
    for (int k = 0; k < z; ++k) {
      m.problem.priority[m.ib(i, k)] = 1;
      m.problem.priority[m.iv(i, k)] = 1;
    }
  }
  return m;
}

Schedule Schedule::zeros(int z, int num_wtgs) {
  Schedule s;
  s.u = Eigen::MatrixXi::Zero(z, num_wtgs);
  s.b = s.u;
  s.v = s.u;
  s.status = milp::Status::optimal;
  return s;
}

namespace {

int max_activations(const MilpInstance& m) {
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    if (m.rows[r].kind == RowKind::activation_budget) return static_cast<int>(std::lround(m.problem.lp.row_hi[r]));
  }
  return 0;
}

// Activation pattern from a relaxed point: b = 1 where the relaxed b reaches
// the threshold, closest bursts merged until the edge budget holds.
std::vector<std::vector<int>> pattern(const MilpInstance& m, const Vec& relaxed, double threshold, int budget) {
  std::vector<std::vector<int>> on(m.num_wtgs, std::vector<int>(m.z, 0));
  for (int i = 0; i < m.num_wtgs; ++i) {
    std::vector<int>& b = on[i];
    for (int k = 1; k < m.z; ++k) b[k] = relaxed[m.ib(i, k)] >= threshold ? 1 : 0;
    for (;;) {
      std::vector<std::pair<int, int>> bursts;
      for (int k = 0; k < m.z; ++k) {
        if (b[k] == 1 && (k == 0 || b[k - 1] == 0)) bursts.emplace_back(k, k);
        if (b[k] == 1) bursts.back().second = k;
      }
      if (static_cast<int>(bursts.size()) <= budget) break;
      std::size_t g = 0;
      for (std::size_t t = 1; t + 1 < bursts.size(); ++t) {
        if (bursts[t + 1].first - bursts[t].second < bursts[g + 1].first - bursts[g].second) g = t;
      }
      for (int k = bursts[g].second + 1; k < bursts[g + 1].first; ++k) b[k] = 1;
    }
  }
  return on;
}

// Fix the activation pattern and solve the remaining level choice as a
// small MILP; returns nothing when the pattern admits no levels.
std::optional<Vec> fixed_pattern_solve(const MilpInstance& m, const std::vector<std::vector<int>>& on, long max_nodes) {
  milp::Problem sub = m.problem;
  lp::Problem& q = sub.lp;
  for (int i = 0; i < m.num_wtgs; ++i) {
    for (int k = 0; k < m.z; ++k) {
      const int b = on[i][k];
      const int edge = k > 0 && b == 1 && on[i][k - 1] == 0 ? 1 : 0;
      q.col_lo[m.ib(i, k)] = q.col_hi[m.ib(i, k)] = b;
      q.col_lo[m.iv(i, k)] = q.col_hi[m.iv(i, k)] = edge;
      q.col_lo[m.iu(i, k)] = b;
      q.col_hi[m.iu(i, k)] = b == 1 ? m.problem.lp.col_hi[m.iu(i, k)] : 0.0;
      if (q.col_lo[m.iu(i, k)] > q.col_hi[m.iu(i, k)]) return std::nullopt;
    }
  }
  milp::Options o;
  o.integral_objective = true;
  o.max_nodes = max_nodes;
  o.time_limit_s = 5.0;
  const milp::Result r = milp::solve(sub, o);
  if (!r.has_incumbent) return std::nullopt;
  return r.x;
}

// LP dive over the activation binaries: repeatedly fix the fractional b
// closest to 1 (up) or to 0 (down), taking the other value when that is
// infeasible, until the relaxation's pattern is integral; then solve the
// levels exactly.
std::optional<Vec> dive_solve(const MilpInstance& m, int max_fixes, bool up) {
  lp::DualSimplex ds(m.problem.lp);
  std::vector<int> fixed(m.problem.lp.num_cols(), -1);
  for (int step = 0; step < max_fixes; ++step) {
    if (ds.solve() != lp::Status::optimal) return std::nullopt;
    const Vec x = ds.primal();
    int pick = -1;
    double best = -1.0;
    for (int i = 0; i < m.num_wtgs; ++i) {
      for (int k = 0; k < m.z; ++k) {
        const int j = m.ib(i, k);
        if (fixed[j] >= 0 || x[j] < 1e-6 || x[j] > 1.0 - 1e-6) continue;
        const double score = up ? x[j] : 1.0 - x[j];
        if (score > best) {
          best = score;
          pick = j;
        }
      }
    }
    if (pick < 0) {
      std::vector<std::vector<int>> on(m.num_wtgs, std::vector<int>(m.z, 0));
      for (int i = 0; i < m.num_wtgs; ++i)
        for (int k = 0; k < m.z; ++k) on[i][k] = x[m.ib(i, k)] > 0.5 ? 1 : 0;
      return fixed_pattern_solve(m, on, 500);
    }
    const int ucol = pick - m.num_wtgs * m.z;  // u of the same (i, k)
    const double uhi = ds.col_hi(ucol);
    auto fix = [&](int v) {
      ds.set_col_bounds(pick, v, v);
      ds.set_col_bounds(ucol, v, v == 1 ? uhi : 0.0);
      fixed[pick] = v;
    };
    const lp::Basis saved = ds.basis();
    if (uhi < 1.0) {
      // b = 1 needs u >= 1; this step cannot activate.
      fix(0);
      continue;
    }
    fix(up ? 1 : 0);
    if (ds.solve() != lp::Status::optimal) {
      fix(up ? 0 : 1);
      ds.set_basis(saved);
    }
  }
  return std::nullopt;
}

// Relax-and-fix along time: steps before the window are fixed, the window is
// integer, later steps stay continuous.
std::optional<Vec> relax_and_fix(const MilpInstance& m, int window) {
  milp::Problem sub = m.problem;
  const int nv = sub.lp.num_cols();
  auto step_of = [&](int j) { return j % m.z; };
  Vec x;
  for (int start = 0; start < m.z; start += window) {
    for (int j = 0; j < nv; ++j) sub.integer[j] = step_of(j) < start + window;
    milp::Options o;
    o.max_nodes = 2000;
    o.time_limit_s = 5.0;
    const milp::Result r = milp::solve(sub, o);
    if (!r.has_incumbent) return std::nullopt;
    x = r.x;
    for (int j = 0; j < nv; ++j) {
      if (step_of(j) >= start && step_of(j) < start + window) {
        const double v = std::round(x[j]);
        sub.lp.col_lo[j] = sub.lp.col_hi[j] = v;
      }
    }
  }
  for (int j = 0; j < nv; ++j) x[j] = sub.lp.col_lo[j];
  return x;
}

}  // namespace

Schedule extract_schedule(const MilpInstance& m, const milp::Result& r) {
  if (!r.has_incumbent) throw SynthError(ErrorKind::internal, "extract_schedule: no incumbent");
  const int z = m.z, nw = m.num_wtgs;
  Schedule s;
  s.u.resize(z, nw);
  s.b.resize(z, nw);
  s.v.resize(z, nw);
  const int budget = max_activations(m);
  for (int i = 0; i < nw; ++i) {
    int edges = 0, vsum = 0;
    for (int k = 0; k < z; ++k) {
      const int u = static_cast<int>(std::lround(r.x[m.iu(i, k)]));
      const int b = static_cast<int>(std::lround(r.x[m.ib(i, k)]));
      vsum += static_cast<int>(std::lround(r.x[m.iv(i, k)]));
      if (b != (u >= 1 ? 1 : 0)) throw SynthError(ErrorKind::internal, "solver inconsistency: b does not match u");
      s.u(k, i) = u;
      s.b(k, i) = b;
      s.v(k, i) = k > 0 && b == 1 && s.b(k - 1, i) == 0 ? 1 : 0;
      edges += s.v(k, i);
    }
    if (s.u(0, i) != 0) throw SynthError(ErrorKind::internal, "solver inconsistency: u(0) != 0");
    if (edges > budget || vsum > budget) throw SynthError(ErrorKind::internal, "solver inconsistency: activation budget");
  }
  s.c_u = s.u.sum();
  s.status = r.status;
  s.gap = r.gap;
  s.bound = r.bound;
  s.nodes = r.nodes;
  s.seconds = r.seconds;
  return s;
}

Schedule solve_noc(const MilpInstance& m, const SolveOptions& opt) {
  milp::Options mo;
  mo.gap_tol = opt.gap_tol;
  mo.time_limit_s = opt.time_limit_s;
  mo.integral_objective = true;
  mo.heuristic_every = 64;
  const int budget = max_activations(m);
  bool dived = false;
  mo.heuristic = [&m, budget, &dived](const Vec& relaxed) -> std::optional<Vec> {
    std::optional<Vec> best;
    double best_obj = lp::kInf;
    if (!dived) {
      dived = true;
      auto rf = relax_and_fix(m, 5);
      if (rf) {
        best_obj = m.problem.lp.cost.dot(*rf);
        best = std::move(rf);
      }
      for (bool up : {false, true}) {
        auto x = dive_solve(m, 4 * m.num_wtgs * m.z, up);
        if (x && m.problem.lp.cost.dot(*x) < best_obj) {
          best_obj = m.problem.lp.cost.dot(*x);
          best = std::move(x);
        }
      }
    }
    for (double t : {0.5, 0.25, 0.75, 0.1}) {
      auto x = fixed_pattern_solve(m, pattern(m, relaxed, t, budget), 200);
      if (x && m.problem.lp.cost.dot(*x) < best_obj) {
        best_obj = m.problem.lp.cost.dot(*x);
        best = std::move(x);
      }
    }
    return best;
  };
  const milp::Result r = milp::solve(m.problem, mo);
  if (!r.has_incumbent) {
    if (r.status == milp::Status::infeasible) {
      std::string msg = "infeasible MILP; proof rows:";
      int shown = 0;
      for (int row : r.infeasibility_rows) {
        if (shown++ == 8) {
          msg += " ...";
          break;
        }
        msg += " " + m.row_names[row];
      }
      throw SynthError(ErrorKind::infeasible, msg);
    }
    throw SynthError(ErrorKind::no_convergence, "time limit reached without an incumbent");
  }
  return extract_schedule(m, r);
}

double schedule_signal(const Schedule& s, int wtg, double t, double t_s, double u_l) {
  if (!(t >= 0.0)) return 0.0;
  const double k = std::floor(t / t_s + 1e-9);
  if (k >= s.z()) return 0.0;
  return s.u(static_cast<int>(k), wtg) * u_l;
}

Eigen::MatrixXd schedule_levels(const Schedule& s, double u_l) { return s.u.cast<double>() * u_l; }

Margin worst_case_margin(const StackedPrediction& sp, const AfrDiscrete& d, const NocConfig& cfg, const Schedule& s,
                         bool robust) {
  const int z = sp.z, nw = d.num_wtgs();
  Vec u(nw * z), b(nw * z);
  for (int i = 0; i < nw; ++i)
    for (int k = 0; k < z; ++k) {
      u[i * z + k] = s.u(k, i);
      b[i * z + k] = s.b(k, i);
    }
  Margin out;
  out.worst = lp::kInf;
  for (const LimitRow& lr : limit_rows(z, nw, cfg)) {
    const RobustRow rr = robust_limit_row(sp, d, cfg, lr, robust);
    const double margin = lr.rhs - (rr.u_coef.dot(u) + rr.b_coef.dot(b) + rr.constant);
    if (margin < out.worst) {
      out.worst = margin;
      out.row = lr.info;
    }
  }
  return out;
}

Realization worst_case_realization(const StackedPrediction& sp, const AfrDiscrete& d, const NocConfig& cfg,
                                   const RowInfo& row) {
  const int z = sp.z, nw = d.num_wtgs(), n = sp.n;
  LimitRow lr{};
  for (const LimitRow& cand : limit_rows(z, nw, cfg)) {
    if (cand.info.kind == row.kind && cand.info.wtg == row.wtg && cand.info.k == row.k) lr = cand;
  }
  const Eigen::Index r = static_cast<Eigen::Index>(lr.info.k) * n + lr.state;
  const double sg = lr.sign;
  auto pick = [](double c, const Interval& iv) { return c >= 0.0 ? iv.hi() : iv.lo(); };
  Realization w;
  const double pc = sg * sp.b2.row(r).sum();
  w.p.assign(z, pick(pc, Interval(-cfg.p_dis_max_mw, 0.0)));
  const int per = kStateDim * nw;
  for (int k = 0; k < z; ++k) {
    Vec sk(per), ok(nw);
    for (int j = 0; j < per; ++j) sk[j] = pick(sg * sp.b3(r, k * per + j), d.s_stack[k][j]);
    for (int i = 0; i < nw; ++i) ok[i] = pick(sg * sp.b4(r, k * nw + i), d.o_stack[k][i]);
    w.s.push_back(sk);
    w.o.push_back(ok);
  }
  return w;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_expr(std::ostream& os, const Eigen::RowVectorXd& a, const std::vector<std::string>& names) {
  int terms = 0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (a[j] == 0.0) continue;
    if (terms > 0 && terms % 6 == 0) os << "\n   ";
    os << (a[j] < 0.0 ? " - " : " + ") << num(std::fabs(a[j])) << ' ' << names[j];
    ++terms;
  }
  if (terms == 0) os << " 0 " << names.front();
}

}  // namespace

void write_lp(std::ostream& os, const MilpInstance& m) {
  const lp::Problem& q = m.problem.lp;
  os << "\\ robust supplementary-control schedule, " << m.num_wtgs << " WTG x " << m.z << " steps\n";
  os << "Minimize\n obj:";
  write_expr(os, q.cost.transpose(), m.col_names);
  os << "\nSubject To\n";
  for (int i = 0; i < q.num_rows(); ++i) {
    const double l = q.row_lo[i], h = q.row_hi[i];
    auto line = [&](const std::string& name, const char* sense, double rhs) {
      os << ' ' << name << ':';
      write_expr(os, q.a.row(i), m.col_names);
      os << ' ' << sense << ' ' << num(rhs) << '\n';
    };
    if (l == h) {
      line(m.row_names[i], "=", l);
    } else if (std::isfinite(l) && std::isfinite(h)) {
      line(m.row_names[i] + "_lo", ">=", l);
      line(m.row_names[i] + "_hi", "<=", h);
    } else if (std::isfinite(l)) {
      line(m.row_names[i], ">=", l);
    } else {
      line(m.row_names[i], "<=", h);
    }
  }
  os << "Bounds\n";
  for (int j = 0; j < q.num_cols(); ++j) {
    os << ' ' << num(q.col_lo[j]) << " <= " << m.col_names[j] << " <= " << num(q.col_hi[j]) << '\n';
  }
  os << "Generals\n";
  for (int j = 0; j < q.num_cols(); ++j) {
    if (m.problem.integer[j]) os << ' ' << m.col_names[j] << '\n';
  }
  os << "End\n";
}

}  // namespace synth

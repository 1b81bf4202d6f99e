#include "synth/milp.hpp"

#include "synth/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

namespace synth::milp {

double max_violation(const Problem& p, const Eigen::VectorXd& x) {
  const lp::Problem& q = p.lp;
  double v = 0.0;
  for (int j = 0; j < q.num_cols(); ++j) v = std::max({v, q.col_lo[j] - x[j], x[j] - q.col_hi[j]});
  const Eigen::VectorXd act = q.a * x;
  for (int i = 0; i < q.num_rows(); ++i) v = std::max({v, q.row_lo[i] - act[i], act[i] - q.row_hi[i]});
  return v;
}

bool is_integral(const Problem& p, const Eigen::VectorXd& x, double tol) {
  for (int j = 0; j < p.lp.num_cols(); ++j) {
    if (p.integer[j] && std::fabs(x[j] - std::round(x[j])) > tol) return false;
  }
  return true;
}

namespace {

struct Change {
  int col;
  double lo, hi;
};

struct Node {
  double bound;
  int depth;
  long id;
  std::vector<Change> changes;  // from the root
  std::shared_ptr<const lp::Basis> basis;
};

struct Worse {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

class Solver {
 public:
  Solver(const Problem& p, const Options& opt) : p_(p), opt_(opt), n_(p.lp.num_cols()) {
    const lp::Problem& q = p.lp;
    if (static_cast<int>(p.integer.size()) != n_ || (!p.lazy.empty() && static_cast<int>(p.lazy.size()) != q.num_rows())) {
      throw SynthError(ErrorKind::invalid_argument, "milp: flag vector sizes do not match the LP");
    }
    lp::Problem core;
    core.cost = q.cost;
    core.col_lo = q.col_lo;
    core.col_hi = q.col_hi;
    for (int j = 0; j < n_; ++j) {
      if (p.integer[j]) {
        core.col_lo[j] = std::ceil(q.col_lo[j] - opt.int_tol);
        core.col_hi[j] = std::floor(q.col_hi[j] + opt.int_tol);
      }
    }
    root_lo_ = core.col_lo;
    root_hi_ = core.col_hi;
    std::vector<int> rows;
    for (int i = 0; i < q.num_rows(); ++i) {
      if (p.lazy.empty() || !p.lazy[i]) rows.push_back(i);
    }
    core.a.resize(static_cast<Eigen::Index>(rows.size()), n_);
    core.row_lo.resize(static_cast<Eigen::Index>(rows.size()));
    core.row_hi.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t t = 0; t < rows.size(); ++t) {
      core.a.row(t) = q.a.row(rows[t]);
      core.row_lo[t] = q.row_lo[rows[t]];
      core.row_hi[t] = q.row_hi[rows[t]];
    }
    active_ = rows;
    in_lp_.assign(q.num_rows(), false);
    for (int i : rows) in_lp_[i] = true;
    lp_ = std::make_unique<lp::DualSimplex>(core, opt.lp);
    start_ = std::chrono::steady_clock::now();
  }

  Result run();

 private:
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  double node_key(double obj) const { return opt_.integral_objective ? std::ceil(obj - 1e-6) : obj; }
  bool prunable(double key) const {
    if (!has_inc_) return false;
    if (opt_.integral_objective && key >= inc_obj_ - 0.5) return true;
    return inc_obj_ - key <= std::max(1e-9, opt_.gap_tol * std::max(1.0, std::fabs(inc_obj_)));
  }
  void apply(const std::vector<Change>& changes);
  lp::Status solve_with_pool(Eigen::VectorXd& x);
  void offer(const Eigen::VectorXd& x);
  int branch_column(const Eigen::VectorXd& x) const;

  const Problem& p_;
  const Options& opt_;
  int n_;
  Eigen::VectorXd root_lo_, root_hi_;
  std::vector<int> active_;
  std::vector<bool> in_lp_;
  std::unique_ptr<lp::DualSimplex> lp_;
  std::chrono::steady_clock::time_point start_;
  bool has_inc_ = false;
  double inc_obj_ = lp::kInf;
  Eigen::VectorXd inc_;
};

void Solver::apply(const std::vector<Change>& changes) {
  for (int j = 0; j < n_; ++j) {
    if (lp_->col_lo(j) != root_lo_[j] || lp_->col_hi(j) != root_hi_[j]) lp_->set_col_bounds(j, root_lo_[j], root_hi_[j]);
  }
  // Later changes on the same column are tighter, so apply in order.
  for (const Change& c : changes) lp_->set_col_bounds(c.col, c.lo, c.hi);
}

lp::Status Solver::solve_with_pool(Eigen::VectorXd& x) {
  const lp::Problem& q = p_.lp;
  for (;;) {
    lp::Status st = lp_->solve();
    if (st == lp::Status::iteration_limit) throw SynthError(ErrorKind::no_convergence, "milp: LP iteration limit");
    if (st != lp::Status::optimal) return st;
    x = lp_->primal();
    std::vector<std::vector<double>> rows;
    std::vector<double> lo, hi;
    for (int i = 0; i < q.num_rows(); ++i) {
      if (in_lp_[i]) continue;
      const double act = q.a.row(i).dot(x);
      if (act < q.row_lo[i] - opt_.feas_tol || act > q.row_hi[i] + opt_.feas_tol) {
        rows.emplace_back(q.a.row(i).data(), q.a.row(i).data() + n_);
        lo.push_back(q.row_lo[i]);
        hi.push_back(q.row_hi[i]);
        active_.push_back(i);
        in_lp_[i] = true;
      }
    }
    if (rows.empty()) return st;
    lp_->add_rows(rows, lo, hi);
  }
}

void Solver::offer(const Eigen::VectorXd& x) {
  if (x.size() != n_) return;
  Eigen::VectorXd r = x;
  for (int j = 0; j < n_; ++j) {
    if (p_.integer[j]) r[j] = std::round(r[j]);
  }
  if (max_violation(p_, r) > opt_.feas_tol) return;
  const double obj = p_.lp.cost.dot(r);
  if (!has_inc_ || obj < inc_obj_) {
    has_inc_ = true;
    inc_obj_ = obj;
    inc_ = r;
  }
}

int Solver::branch_column(const Eigen::VectorXd& x) const {
  int best = -1;
  int best_prio = 0;
  double score = opt_.int_tol;
  for (int j = 0; j < n_; ++j) {
    if (!p_.integer[j]) continue;
    const double f = x[j] - std::floor(x[j]);
    const double s = std::min(f, 1.0 - f);
    if (s <= opt_.int_tol) continue;
    const int prio = p_.priority.empty() ? 0 : p_.priority[j];
    if (best < 0 || prio > best_prio || (prio == best_prio && s > score)) {
      score = s;
      best = j;
      best_prio = prio;
    }
  }
  return best;
}

Result Solver::run() {
  Result res;
  std::priority_queue<Node, std::vector<Node>, Worse> open;
  long next_id = 0;
  bool limit_hit = false;
  Status limit_status = Status::time_limit;
  double open_bound = lp::kInf;  // bound of an unexplored node left at a limit

  Node current{-lp::kInf, 0, next_id++, {}, nullptr};
  bool have_current = true;  // current's basis is already loaded in lp_
  // Depth-first until the first incumbent, best-first afterwards.
  std::vector<Node> stack;
  while (have_current || !open.empty() || !stack.empty()) {
    if (!have_current && has_inc_ && !stack.empty()) {
      for (Node& nd : stack) open.push(std::move(nd));
      stack.clear();
    }
    if (!have_current) {
      if (!stack.empty()) {
        current = std::move(stack.back());
        stack.pop_back();
      } else {
        current = open.top();
        open.pop();
      }
      if (prunable(current.bound)) continue;
      apply(current.changes);
      if (current.basis) lp_->set_basis(*current.basis);
    }
    have_current = false;
    if (elapsed() > opt_.time_limit_s || (opt_.max_nodes > 0 && res.nodes >= opt_.max_nodes)) {
      limit_hit = true;
      limit_status = elapsed() > opt_.time_limit_s ? Status::time_limit : Status::node_limit;
      open_bound = std::min(open_bound, current.bound);
      break;
    }
    ++res.nodes;

    Eigen::VectorXd x;
    const lp::Status st = solve_with_pool(x);
    if (st == lp::Status::infeasible) {
      if (current.depth == 0) {
        for (int r : lp_->infeasibility_rows()) res.infeasibility_rows.push_back(active_[r]);
        std::sort(res.infeasibility_rows.begin(), res.infeasibility_rows.end());
      }
      continue;
    }
    const double key = node_key(lp_->objective());
    if (current.depth == 0) res.bound = key;
    if (opt_.heuristic && (current.depth == 0 || res.nodes % std::max(1, opt_.heuristic_every) == 0)) {
      if (auto cand = opt_.heuristic(x)) offer(*cand);
    }
    if (prunable(key)) continue;
    const int j = branch_column(x);
    if (j < 0) {
      offer(x);
      continue;
    }
    const double f = std::floor(x[j]);
    Node down{key, current.depth + 1, 0, current.changes, nullptr};
    down.changes.push_back({j, lp_->col_lo(j), f});
    Node up{key, current.depth + 1, 0, current.changes, nullptr};
    up.changes.push_back({j, f + 1.0, lp_->col_hi(j)});
    const bool dive_up = x[j] - f >= 0.5;
    Node& dive = dive_up ? up : down;
    Node& defer = dive_up ? down : up;
    defer.id = next_id++;
    defer.basis = std::make_shared<const lp::Basis>(lp_->basis());
    dive.id = next_id++;
    if (has_inc_) {
      open.push(std::move(defer));
    } else {
      stack.push_back(std::move(defer));
    }
    current = std::move(dive);
    lp_->set_col_bounds(j, current.changes.back().lo, current.changes.back().hi);
    have_current = true;
  }

  res.lp_iterations = lp_->iterations();
  res.lp_rows = static_cast<int>(active_.size());
  res.seconds = elapsed();
  double lb = limit_hit ? open_bound : lp::kInf;
  for (const Node& nd : stack) lb = std::min(lb, nd.bound);
  while (!open.empty()) {
    lb = std::min(lb, open.top().bound);
    open.pop();
  }
  res.has_incumbent = has_inc_;
  if (has_inc_) {
    res.x = inc_;
    res.objective = inc_obj_;
    res.bound = std::min(inc_obj_, std::max(res.bound, lb));
    res.gap = (inc_obj_ - res.bound) / std::max(1.0, std::fabs(inc_obj_));
  }
  if (!limit_hit) {
    res.status = has_inc_ ? Status::optimal : Status::infeasible;
    if (has_inc_) {
      res.bound = inc_obj_;
      res.gap = 0.0;
    }
  } else if (has_inc_ && res.gap <= opt_.gap_tol) {
    res.status = Status::optimal;
  } else {
    res.status = limit_status;
  }
  return res;
}

}  // namespace

Result solve(const Problem& p, const Options& opt) {
  Solver s(p, opt);
  return s.run();
}

}  // namespace synth::milp

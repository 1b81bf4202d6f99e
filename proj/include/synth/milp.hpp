#pragma once

#include "synth/lp.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace synth::milp {

struct Problem {
  lp::Problem lp;
  std::vector<bool> integer;  // per column
  // Rows kept out of the LP until a relaxation violates them. Once added a
  // row stays for every later node. Empty means none are lazy.
  std::vector<bool> lazy;
  // Branching classes: the most fractional column of the highest class
  // with a fractional value is branched on. Empty means one class.
  std::vector<int> priority;
};

// Proposes a candidate from a relaxed point; candidates are checked against
// every row, bound and integrality before they become incumbents.
using Heuristic = std::function<std::optional<Eigen::VectorXd>(const Eigen::VectorXd& relaxed)>;

struct Options {
  double gap_tol = 0.0;           // relative
  double time_limit_s = 60.0;
  double int_tol = 1e-6;
  double feas_tol = 1e-6;
  bool integral_objective = false;  // objective takes integer values on integer points
  long max_nodes = 0;             // 0: unlimited
  int heuristic_every = 16;       // nodes between heuristic calls (root always)
  Heuristic heuristic;
  lp::Options lp;
};

enum class Status { optimal, infeasible, time_limit, node_limit };

struct Result {
  Status status = Status::infeasible;
  bool has_incumbent = false;
  Eigen::VectorXd x;
  double objective = 0.0;
  double bound = -lp::kInf;       // proven lower bound
  double gap = lp::kInf;          // (objective - bound) / max(1, |objective|)
  long nodes = 0;
  long lp_iterations = 0;
  int lp_rows = 0;                // rows in the final relaxation
  double seconds = 0.0;
  std::vector<int> infeasibility_rows;  // original row ids, root infeasibility only
};

// Branch and bound on LP relaxations solved by the dual simplex: depth-first
// until an incumbent exists, then best-first with diving into the rounding
// child. Branching: most fractional column, ties by lowest index.
Result solve(const Problem& p, const Options& opt = {});

// Largest row or bound violation of x, and whether integer columns are integral.
double max_violation(const Problem& p, const Eigen::VectorXd& x);
bool is_integral(const Problem& p, const Eigen::VectorXd& x, double tol);

}  // namespace synth::milp

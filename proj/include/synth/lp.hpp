#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <vector>

namespace synth::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// min c'x  s.t.  row_lo <= A x <= row_hi,  col_lo <= x <= col_hi.
// Columns must have finite bounds; rows may be one-sided.
struct Problem {
  Eigen::VectorXd cost;
  Eigen::VectorXd col_lo, col_hi;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> a;
  Eigen::VectorXd row_lo, row_hi;

  int num_cols() const { return static_cast<int>(cost.size()); }
  int num_rows() const { return static_cast<int>(a.rows()); }
};

enum class Status { optimal, infeasible, iteration_limit };

enum class VarStatus : std::uint8_t { basic, at_lower, at_upper };

// Basis snapshot for warm starts. Rows added after the snapshot enter with
// their slack basic.
struct Basis {
  std::vector<int> heading;  // basic variable per row position
  std::vector<VarStatus> status;  // n structurals then m slacks
};

struct Options {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-7;
  int refactor_interval = 64;
  int max_iterations = 0;  // 0: 20 * (n + m) + 1000
};

// Bounded-variable dual simplex on [A -I][x; s] = 0 with an explicit dense
// basis inverse, dual steepest-edge pricing and a Harris ratio test. Slack
// s_i = a_i x carries the row bounds; slack index is n + i.
class DualSimplex {
 public:
  explicit DualSimplex(const Problem& p, Options opt = {});

  int num_cols() const { return n_; }
  int num_rows() const { return m_; }

  void set_col_bounds(int j, double lo, double hi);
  double col_lo(int j) const { return lo_[j]; }
  double col_hi(int j) const { return hi_[j]; }
  // Appends rows (coefficient rows of length n); slacks enter the basis, so
  // the current basis stays dual feasible.
  void add_rows(const std::vector<std::vector<double>>& rows, const std::vector<double>& lo,
                const std::vector<double>& hi);

  Status solve();

  Basis basis() const;
  void set_basis(const Basis& b);

  double objective() const;
  Eigen::VectorXd primal() const;  // structural values
  double row_activity(int i) const { return x_[n_ + i]; }
  int iterations() const { return iterations_; }
  int basis_resets() const { return basis_resets_; }  // singular refactors repaired
  // After Status::infeasible: rows with a nonzero weight in the Farkas ray.
  const std::vector<int>& infeasibility_rows() const { return infeasible_rows_; }
  int infeasible_variable() const { return infeasible_var_; }

 private:
  double* binv_row(int i) { return binv_.data() + static_cast<std::size_t>(i) * cap_; }
  const double* binv_row(int i) const { return binv_.data() + static_cast<std::size_t>(i) * cap_; }
  void reserve(int rows);
  void refactor();
  void compute_primal();
  void compute_dual();
  void compute_weights();
  void column(int j, std::vector<double>& out) const;  // B^{-1} a_j
  bool iterate(Status& status);

  Options opt_;
  int n_ = 0;
  int m_ = 0;
  int cap_ = 0;
  std::vector<double> cost_;
  std::vector<double> a_;  // row-major m x n
  std::vector<double> lo_, hi_, x_, d_;
  std::vector<VarStatus> status_;
  std::vector<int> heading_;
  std::vector<double> binv_;  // row-major, leading dimension cap_
  std::vector<double> weights_;
  int since_refactor_ = 0;
  int iterations_ = 0;
  int basis_resets_ = 0;
  bool dirty_ = true;
  bool primal_dirty_ = false;
  std::vector<int> infeasible_rows_;
  int infeasible_var_ = -1;

  std::vector<double> rho_, alpha_row_, alpha_col_, tau_;
  mutable std::vector<double> col_;
  mutable std::vector<int> nz_;
};

struct Result {
  Status status = Status::infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
  int iterations = 0;
  std::vector<int> infeasibility_rows;
};

Result solve(const Problem& p, Options opt = {});

}  // namespace synth::lp

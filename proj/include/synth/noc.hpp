#pragma once

#include "synth/afr.hpp"
#include "synth/interval.hpp"
#include "synth/milp.hpp"

#include <Eigen/Dense>

#include <ostream>
#include <string>
#include <vector>

namespace synth {

struct NocConfig {
  double dfd_lim_hz = 0.5;          // DG frequency deviation limit
  double dfw_lim_pu = 2.0 / 60.0;   // WTG rotor speed deviation limit
  double u_l = 0.02;                // pu per level
  int u_bd = 5;                     // levels
  double p_dis_max_mw = 0.7;
  Eigen::VectorXd x0;               // AFR state at trigger
  int max_activations = 2;
  double big_m = 0.0;               // 0: u_bd + 1
  int z = 100;

  double m() const { return big_m > 0.0 ? big_m : u_bd + 1.0; }
  void validate(int n) const;
};

// Row expression u_coef . u + b_coef . b + constant, whose value bounds the
// constrained quantity for every admissible realization.
struct RobustRow {
  Eigen::VectorXd u_coef;
  Eigen::VectorXd b_coef;
  double constant = 0.0;
};

// Uncertain additive terms e_j in e_int[j] enter with coefficient e_coef[j];
// e_gate[j] names the binary that switches term j on (-1: always on). The
// disturbance is one constant p in `p` weighted by the summed p_coef.
RobustRow robustify_row(const Eigen::VectorXd& u_coef, double constant, const Eigen::VectorXd& p_coef,
                        const Interval& p, const Eigen::VectorXd& e_coef, const std::vector<Interval>& e_int,
                        const std::vector<int>& e_gate, int num_gates);

enum class RowKind { dg_frequency, wtg_speed_upper, wtg_speed_lower, big_m_link, activation_edge, activation_budget };

struct RowInfo {
  RowKind kind;
  int wtg;  // -1 for the DG
  int k;    // step; the state row predicts x(k+1)
};

struct MilpInstance {
  milp::Problem problem;
  std::vector<RowInfo> rows;
  std::vector<std::string> col_names;
  std::vector<std::string> row_names;
  int num_wtgs = 0;
  int z = 0;
  int dropped_rows = 0;  // redundant limit rows removed by presolve

  int iu(int i, int k) const { return i * z + k; }
  int ib(int i, int k) const { return (num_wtgs + i) * z + k; }
  int iv(int i, int k) const { return (2 * num_wtgs + i) * z + k; }
};

// robust = false drops S and O (nominal formulation); the disturbance stays.
MilpInstance build_milp(const StackedPrediction& sp, const AfrDiscrete& d, const NocConfig& cfg, bool robust = true);

struct Schedule {
  Eigen::MatrixXi u, b, v;  // Z x N_w
  double c_u = 0.0;
  milp::Status status = milp::Status::infeasible;
  double gap = 0.0;
  double bound = 0.0;
  long nodes = 0;
  double seconds = 0.0;

  int z() const { return static_cast<int>(u.rows()); }
  int num_wtgs() const { return static_cast<int>(u.cols()); }
  static Schedule zeros(int z, int num_wtgs);
};

struct SolveOptions {
  double gap_tol = 0.0;
  double time_limit_s = 60.0;
};

// Throws SynthError(infeasible) naming the rows of the infeasibility proof
// when no schedule exists.
Schedule solve_noc(const MilpInstance& m, const SolveOptions& opt = {});

// Checks the schedule invariants; the reported v is the off-to-on edge set.
Schedule extract_schedule(const MilpInstance& m, const milp::Result& r);

// u_s,i(t) = u_i(floor(t / t_s)) u_L on [0, Z t_s), zero elsewhere.
double schedule_signal(const Schedule& s, int wtg, double t, double t_s, double u_l);
Eigen::MatrixXd schedule_levels(const Schedule& s, double u_l);  // Z x N_w in pu

struct Margin {
  double worst = 0.0;  // min over limit rows of rhs - worst-case value
  RowInfo row{RowKind::dg_frequency, -1, 0};
};

// Analytic worst case of every limit row for a fixed schedule.
Margin worst_case_margin(const StackedPrediction& sp, const AfrDiscrete& d, const NocConfig& cfg, const Schedule& s,
                         bool robust = true);

// The realization attaining the worst case of one limit row; the b gating
// is applied by the rollout, so it holds for any schedule.
Realization worst_case_realization(const StackedPrediction& sp, const AfrDiscrete& d, const NocConfig& cfg,
                                   const RowInfo& row);

// CPLEX LP text.
void write_lp(std::ostream& os, const MilpInstance& m);

}  // namespace synth

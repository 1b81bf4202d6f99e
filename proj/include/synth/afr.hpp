#pragma once

#include "synth/interval.hpp"
#include "synth/linearize.hpp"
#include "synth/models.hpp"

#include <Eigen/Dense>

#include <vector>

namespace synth {

// State [dw_d (Hz), dP_m, dP_v, x_w,1 .. x_w,Nw]; n = 3 + 6 N_w.
// Inputs: B1 u_sp (pu, one column per WTG), B2 disturbance injection (MW),
// B3 per-WTG S realizations (6 each), B4 per-WTG O realizations.
struct AfrContinuous {
  Eigen::MatrixXd a, b1, b2, b3, b4;
  double k_d = 0.0;
  std::vector<double> k_dw;
  int num_wtgs() const { return static_cast<int>(k_dw.size()); }
  int dim() const { return static_cast<int>(a.rows()); }
};

struct AfrDiscrete {
  Eigen::MatrixXd a_d, b_d1, b_d2, b_d3, b_d4;
  double t_s = 0.0;
  int z = 0;
  std::vector<IntervalVector> s_stack;  // per step, 6 N_w entries
  std::vector<IntervalVector> o_stack;  // per step, N_w entries
  int num_wtgs() const { return static_cast<int>(b_d1.cols()); }
  int dim() const { return static_cast<int>(a_d.rows()); }
};

// Row block r predicts x(r+1); block (r, c) of each b_i is A_d^{r-c} B_di.
struct StackedPrediction {
  int n = 0;
  int z = 0;
  Eigen::MatrixXd a;
  Eigen::MatrixXd b1, b2, b3, b4;
};

AfrContinuous assemble_afr(const DieselParams& diesel, const std::vector<WtgLinearModel>& wtgs);

AfrDiscrete discretize_zoh(const AfrContinuous& c, double t_s, int z, const std::vector<WtgLinearModel>& wtgs);

StackedPrediction stack_prediction(const AfrDiscrete& d, int z);

// One realization of every uncertain input along the horizon.
struct Realization {
  std::vector<double> p;                // disturbance per step, MW
  std::vector<Eigen::VectorXd> s;       // per step, 6 N_w
  std::vector<Eigen::VectorXd> o;       // per step, N_w
};

// x(k+1) = A_d x + B_d1 u_s + B_d2 p + B_d3 (b o s) + B_d4 (b o o); returns
// x(0..Z). b gates the error terms per WTG; u_s and b are Z x N_w.
std::vector<Eigen::VectorXd> rollout(const AfrDiscrete& d, const Eigen::VectorXd& x0, const Eigen::MatrixXd& u_s,
                                     const Eigen::MatrixXd& b, const Realization& w);

// Same trajectory through the stacked matrices (x(1..Z) concatenated).
Eigen::VectorXd stacked_rollout(const StackedPrediction& sp, const Eigen::VectorXd& x0, const Eigen::MatrixXd& u_s,
                                const Eigen::MatrixXd& b, const Realization& w);

}  // namespace synth

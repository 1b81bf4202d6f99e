#pragma once

#include "synth/interval.hpp"
#include "synth/models.hpp"

#include <Eigen/Dense>

#include <vector>

namespace synth {

// Blocks of d(f, g, h)/d(x_w, u_sp, y_w).
struct SystemJacobians {
  Eigen::MatrixXd a;  // 6 x 6
  Eigen::MatrixXd b;  // 6 x 1
  Eigen::MatrixXd c;  // 6 x 12
  Eigen::MatrixXd d;  // 12 x 6
  Eigen::MatrixXd e;  // 12 x 1
  Eigen::MatrixXd f;  // 12 x 12
  Eigen::MatrixXd l;  // 1 x 6
  Eigen::MatrixXd m;  // 1 x 1
  Eigen::MatrixXd n;  // 1 x 12

  Eigen::MatrixXd full() const;  // 19 x 19, rows (f, g, h), columns s
};

struct LinearWtg {
  Eigen::MatrixXd a_w;  // 6 x 6
  Eigen::MatrixXd b_w;  // 6 x 1
  Eigen::MatrixXd c_w;  // 1 x 6
  Eigen::MatrixXd d_w;  // 1 x 1
};

struct HessianIntervals {
  std::vector<IntervalMatrix> hd;  // 6, each 19 x 19
  std::vector<IntervalMatrix> ha;  // 12
  std::vector<IntervalMatrix> ho;  // 1
};

struct Remainders {
  IntervalVector i;  // 6
  IntervalVector j;  // 12
  IntervalVector k;  // 1
};

struct ErrorIntervals {
  IntervalVector s;  // 6
  IntervalVector o;  // 1
};

struct WtgLinearModel {
  LinearWtg lin;
  IntervalVector s;  // additive state-derivative error
  IntervalVector o;  // additive output (P_g) error
  OperatingPoint eq;
  DfigParams params;
  IntervalVector theta;  // 19-dim box the errors hold on
};

// [f; g; h] at s = [x_w, u_sp, y_w].
Eigen::VectorXd full_residual(const Eigen::VectorXd& s, const WtgContext& c);

SystemJacobians jacobians_at(const Eigen::VectorXd& s, const WtgContext& c);
// At the equilibrium; rejects an ill-conditioned algebraic block.
SystemJacobians jacobians(const OperatingPoint& eq, const DfigParams& params);
// Largest |J - J_fd| / max(1, |J|) over all 19 x 19 entries, central
// differences with the given step.
double jacobian_fd_error(const SystemJacobians& j, const Eigen::VectorXd& s, const WtgContext& c, double step = 1e-6);

LinearWtg reduce_index1(const SystemJacobians& j);

HessianIntervals hessian_intervals(const IntervalVector& theta, const WtgContext& c);
Remainders remainder_intervals(const IntervalVector& theta, const Eigen::VectorXd& s_center, const HessianIntervals& h);
ErrorIntervals error_intervals(const Remainders& r, const SystemJacobians& j);

WtgLinearModel linearize_wtg(const OperatingPoint& eq, const DfigParams& params, const IntervalVector& theta);

}  // namespace synth

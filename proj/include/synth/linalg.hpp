#pragma once

#include <Eigen/Dense>

namespace synth {

// Scaling and squaring with a degree-selected Pade approximant.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

struct Zoh {
  Eigen::MatrixXd phi;    // e^{A t}
  Eigen::MatrixXd gamma;  // (int_0^t e^{A s} ds) B
};

// Exact zero-order hold through the augmented exponential of [[A, B], [0, 0]] t.
Zoh zoh(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double t);

// Elementwise upper bound on int_0^t |e^{A s}| ds from `pieces` Riemann
// cells, each bounded by |e^{A s_i}| int_0^h e^{|A| r} dr.
Eigen::MatrixXd abs_exp_integral_bound(const Eigen::MatrixXd& a, double t, int pieces = 10);

double spectral_abscissa(const Eigen::MatrixXd& a);
double spectral_radius(const Eigen::MatrixXd& a);

}  // namespace synth

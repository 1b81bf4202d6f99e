#pragma once

#include "synth/interval.hpp"
#include "synth/linearize.hpp"
#include "synth/models.hpp"
#include "synth/zonotope.hpp"

#include <cstdint>
#include <vector>

namespace synth {

struct ReachOptions {
  double dt = 0.01;
  double input_hold = 0.0;       // u_sp constant on this grid; 0 holds it over the horizon
  double order_cap = 20.0;
  int max_fixpoint_iterations = 20;
  double y_margin = 0.1;         // relative widening of the sampled algebraic hull
  int integral_pieces = 10;      // cells in the |e^{A s}| integral bound
  double curvature_factor = 2.0; // slack on the within-step curvature bound
  int verify_samples = 4096;     // dense re-check of the y margin
  std::uint64_t verify_seed = 0x5eed;
};

struct ReachResult {
  std::vector<Zonotope> step_sets;       // x_w at t_k, k = 0..K
  std::vector<IntervalVector> step_boxes; // s over [t_k, t_{k+1}], k = 0..K-1
  IntervalVector theta;                  // hull over all steps in s-coordinates
  double horizon = 0.0;
  double dt = 0.0;
  int max_fixpoint_iterations_used = 0;
};

// Conservative linearization: each step is linearized at the set center,
// mapped through the exact ZOH of the reduced model (u_sp carried as a held
// state), and inflated by the Lagrange remainder over the step's
// time-interval box, iterated until the remainder box is self-consistent.
// Inputs are piecewise constant on the input_hold grid with values in u.
ReachResult reach_nonlinear(const DfigParams& params, const OperatingPoint& eq, const Interval& u, double horizon,
                            const ReachOptions& opt = {});

// Delta x_w sets of the linear model under constant u_sp with the additive
// error box S entering through the ZOH integral bound. Returns K + 1 sets.
std::vector<Zonotope> reach_linear_with_error(const WtgLinearModel& lin, double u_sp, double horizon, double dt,
                                              double order_cap = 20.0);

}  // namespace synth

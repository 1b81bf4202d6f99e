#include "synth/afr.hpp"

#include "synth/error.hpp"
#include "synth/linalg.hpp"

namespace synth {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

AfrContinuous assemble_afr(const DieselParams& diesel, const std::vector<WtgLinearModel>& wtgs) {
  diesel.validate();
  if (wtgs.empty()) throw SynthError(ErrorKind::invalid_argument, "afr: at least one WTG required");
  const int nw = static_cast<int>(wtgs.size());
  const int n = 3 + kStateDim * nw;
  const double swing = diesel.freq_base_hz / (2.0 * diesel.inertia_s);

  AfrContinuous c;
  c.k_d = 1.0 / diesel.power_base_mva;
  c.a = Mat::Zero(n, n);
  c.b1 = Mat::Zero(n, nw);
  c.b2 = Mat::Zero(n, 1);
  c.b3 = Mat::Zero(n, kStateDim * nw);
  c.b4 = Mat::Zero(n, nw);

  c.a(0, 1) = swing;
  c.a(1, 1) = -1.0 / diesel.engine_tau_s;
  c.a(1, 2) = 1.0 / diesel.engine_tau_s;
  c.a(2, 0) = -1.0 / (diesel.freq_base_hz * diesel.droop_pu * diesel.governor_tau_s);
  c.a(2, 2) = -1.0 / diesel.governor_tau_s;
  c.b2(0, 0) = swing * c.k_d;

  for (int i = 0; i < nw; ++i) {
    const LinearWtg& w = wtgs[i].lin;
    if (w.a_w.rows() != kStateDim || w.a_w.cols() != kStateDim || w.b_w.rows() != kStateDim || w.c_w.cols() != kStateDim ||
        w.d_w.size() != 1 || wtgs[i].s.size() != kStateDim || wtgs[i].o.size() != 1) {
      throw SynthError(ErrorKind::invalid_argument, "afr: WTG model dimension mismatch");
    }
    const double kdw = wtgs[i].params.power_base_mva / diesel.power_base_mva;
    if (!(kdw > 0.0)) throw SynthError(ErrorKind::invalid_argument, "afr: bases must be positive");
    c.k_dw.push_back(kdw);
    const int o = 3 + kStateDim * i;
    c.a.block(o, o, kStateDim, kStateDim) = w.a_w;
    c.b1.block(o, i, kStateDim, 1) = w.b_w;
    // dP_g,i = C_w dx_w + D_w u enters the swing row on the DG base.
    c.a.block(0, o, 1, kStateDim) = swing * kdw * w.c_w;
    c.b1(0, i) = swing * kdw * w.d_w(0, 0);
    c.b3.block(o, kStateDim * i, kStateDim, kStateDim).setIdentity();
    c.b4(0, i) = swing * kdw;
  }
  return c;
}

AfrDiscrete discretize_zoh(const AfrContinuous& c, double t_s, int z, const std::vector<WtgLinearModel>& wtgs) {
  if (!(t_s > 0.0) || z <= 0) throw SynthError(ErrorKind::invalid_argument, "afr: t_s and Z must be positive");
  if (static_cast<int>(wtgs.size()) != c.num_wtgs()) throw SynthError(ErrorKind::invalid_argument, "afr: WTG count mismatch");
  const int nw = c.num_wtgs();
  // One augmented exponential for all inputs keeps the blocks consistent.
  Mat ball(c.dim(), c.b1.cols() + c.b2.cols() + c.b3.cols() + c.b4.cols());
  ball << c.b1, c.b2, c.b3, c.b4;
  const Zoh h = zoh(c.a, ball, t_s);

  AfrDiscrete d;
  d.t_s = t_s;
  d.z = z;
  d.a_d = h.phi;
  int col = 0;
  d.b_d1 = h.gamma.middleCols(col, c.b1.cols());
  col += static_cast<int>(c.b1.cols());
  d.b_d2 = h.gamma.middleCols(col, 1);
  col += 1;
  d.b_d3 = h.gamma.middleCols(col, c.b3.cols());
  col += static_cast<int>(c.b3.cols());
  d.b_d4 = h.gamma.middleCols(col, c.b4.cols());

  IntervalVector s(kStateDim * nw);
  IntervalVector o(nw);
  for (int i = 0; i < nw; ++i) {
    for (int j = 0; j < kStateDim; ++j) s[kStateDim * i + j] = wtgs[i].s[j];
    o[i] = wtgs[i].o[0];
  }
  d.s_stack.assign(z, s);
  d.o_stack.assign(z, o);
  return d;
}

StackedPrediction stack_prediction(const AfrDiscrete& d, int z) {
  if (z <= 0) throw SynthError(ErrorKind::invalid_argument, "stack_prediction: Z must be positive");
  const int n = d.dim();
  StackedPrediction sp;
  sp.n = n;
  sp.z = z;
  std::vector<Mat> pw(z + 1);
  pw[0] = Mat::Identity(n, n);
  for (int k = 1; k <= z; ++k) pw[k] = d.a_d * pw[k - 1];
  sp.a.resize(static_cast<Eigen::Index>(z) * n, n);
  for (int r = 0; r < z; ++r) sp.a.middleRows(static_cast<Eigen::Index>(r) * n, n) = pw[r + 1];

  auto toeplitz = [&](const Mat& bd) {
    const Eigen::Index m = bd.cols();
    Mat out = Mat::Zero(static_cast<Eigen::Index>(z) * n, z * m);
    std::vector<Mat> blocks(z);
    for (int k = 0; k < z; ++k) blocks[k] = pw[k] * bd;
    for (int r = 0; r < z; ++r) {
      for (int c = 0; c <= r; ++c) out.block(static_cast<Eigen::Index>(r) * n, c * m, n, m) = blocks[r - c];
    }
    return out;
  };
  sp.b1 = toeplitz(d.b_d1);
  sp.b2 = toeplitz(d.b_d2);
  sp.b3 = toeplitz(d.b_d3);
  sp.b4 = toeplitz(d.b_d4);
  return sp;
}

namespace {

void check_realization(int z, int nw, const Eigen::MatrixXd& u_s, const Eigen::MatrixXd& b, const Realization& w) {
  if (u_s.rows() != z || u_s.cols() != nw || b.rows() != z || b.cols() != nw || static_cast<int>(w.p.size()) != z ||
      static_cast<int>(w.s.size()) != z || static_cast<int>(w.o.size()) != z) {
    throw SynthError(ErrorKind::invalid_argument, "rollout: input shape mismatch");
  }
}

Vec gated(const Vec& v, const Eigen::MatrixXd& b, int k, int per) {
  Vec g = v;
  for (Eigen::Index j = 0; j < g.size(); ++j) g[j] *= b(k, j / per);
  return g;
}

}  // namespace

std::vector<Vec> rollout(const AfrDiscrete& d, const Vec& x0, const Eigen::MatrixXd& u_s, const Eigen::MatrixXd& b,
                         const Realization& w) {
  const int z = static_cast<int>(u_s.rows());
  check_realization(z, d.num_wtgs(), u_s, b, w);
  std::vector<Vec> xs{x0};
  xs.reserve(z + 1);
  for (int k = 0; k < z; ++k) {
    Vec x = d.a_d * xs.back() + d.b_d1 * u_s.row(k).transpose() + d.b_d2.col(0) * w.p[k] +
            d.b_d3 * gated(w.s[k], b, k, kStateDim) + d.b_d4 * gated(w.o[k], b, k, 1);
    xs.push_back(std::move(x));
  }
  return xs;
}

Vec stacked_rollout(const StackedPrediction& sp, const Vec& x0, const Eigen::MatrixXd& u_s, const Eigen::MatrixXd& b,
                    const Realization& w) {
  const int z = sp.z;
  const int nw = static_cast<int>(sp.b1.cols()) / z;
  check_realization(z, nw, u_s, b, w);
  Vec uu(z * nw), pp(z), ss(z * kStateDim * nw), oo(z * nw);
  for (int k = 0; k < z; ++k) {
    uu.segment(k * nw, nw) = u_s.row(k).transpose();
    pp[k] = w.p[k];
    ss.segment(k * kStateDim * nw, kStateDim * nw) = gated(w.s[k], b, k, kStateDim);
    oo.segment(k * nw, nw) = gated(w.o[k], b, k, 1);
  }
  return sp.a * x0 + sp.b1 * uu + sp.b2 * pp + sp.b3 * ss + sp.b4 * oo;
}

}  // namespace synth

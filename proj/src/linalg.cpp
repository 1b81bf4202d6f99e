#include "synth/linalg.hpp"

#include "synth/error.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>

namespace synth {

namespace {

using Mat = Eigen::MatrixXd;

void pade_low(const Mat& a, const double* b, int m, Mat& u, Mat& v) {
  const Eigen::Index n = a.rows();
  const Mat a2 = a * a;
  Mat p = Mat::Identity(n, n);
  Mat uo = b[1] * p;
  Mat ve = b[0] * p;
  for (int j = 2; j <= m; j += 2) {
    p = p * a2;
    uo += b[j + 1] * p;
    ve += b[j] * p;
  }
  u = a * uo;
  v = ve;
}

}  // namespace

Mat expm(const Mat& a) {
  if (a.rows() != a.cols()) throw SynthError(ErrorKind::invalid_argument, "expm: matrix not square");
  if (!a.allFinite()) throw SynthError(ErrorKind::non_finite, "expm: non-finite matrix");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  static constexpr double b3[] = {120.0, 60.0, 12.0, 1.0};
  static constexpr double b5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  static constexpr double b7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0};
  static constexpr double b9[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
                                  2162160.0,     110880.0,     3960.0,       90.0,        1.0};
  static constexpr double b13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
  static constexpr std::array<double, 4> theta = {1.495585217958292e-2, 2.539398330063230e-1,
                                                  9.504178996162932e-1, 2.097847961257068};
  static constexpr double theta13 = 5.371920351148152;
  static constexpr const double* low[] = {b3, b5, b7, b9};
  static constexpr int degree[] = {3, 5, 7, 9};

  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  Mat u, v;
  int squarings = 0;
  bool done = false;
  for (std::size_t i = 0; i < theta.size() && !done; ++i) {
    if (norm <= theta[i]) {
      pade_low(a, low[i], degree[i], u, v);
      done = true;
    }
  }
  if (!done) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
    const Mat as = a / std::ldexp(1.0, squarings);
    const Mat id = Mat::Identity(n, n);
    const Mat a2 = as * as, a4 = a2 * a2, a6 = a4 * a2;
    u = as * (a6 * (b13[13] * a6 + b13[11] * a4 + b13[9] * a2) + b13[7] * a6 + b13[5] * a4 + b13[3] * a2 + b13[1] * id);
    v = a6 * (b13[12] * a6 + b13[10] * a4 + b13[8] * a2) + b13[6] * a6 + b13[4] * a4 + b13[2] * a2 + b13[0] * id;
  }
  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

Zoh zoh(const Mat& a, const Mat& b, double t) {
  if (a.rows() != a.cols() || b.rows() != a.rows()) throw SynthError(ErrorKind::invalid_argument, "zoh: shape mismatch");
  const Eigen::Index n = a.rows(), m = b.cols();
  Mat aug = Mat::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a * t;
  aug.topRightCorner(n, m) = b * t;
  const Mat e = expm(aug);
  return Zoh{e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

Mat abs_exp_integral_bound(const Mat& a, double t, int pieces) {
  if (pieces < 1 || !(t >= 0.0)) throw SynthError(ErrorKind::invalid_argument, "abs_exp_integral_bound: bad arguments");
  const Eigen::Index n = a.rows();
  const double h = t / pieces;
  const Mat cell = zoh(a.cwiseAbs(), Mat::Identity(n, n), h).gamma;
  const Mat step = expm(a * h);
  Mat e = Mat::Identity(n, n);
  Mat acc = Mat::Zero(n, n);
  for (int i = 0; i < pieces; ++i) {
    acc += e.cwiseAbs() * cell;
    e = step * e;
  }
  return acc;
}

double spectral_abscissa(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  return es.eigenvalues().real().maxCoeff();
}

double spectral_radius(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace synth

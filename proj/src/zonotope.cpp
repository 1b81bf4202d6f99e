#include "synth/zonotope.hpp"

#include "synth/error.hpp"
#include "synth/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace synth {

Zonotope::Zonotope(Eigen::VectorXd center) : c_(std::move(center)), g_(c_.size(), 0) {}

Zonotope::Zonotope(Eigen::VectorXd center, RowMatrix generators) : c_(std::move(center)), g_(std::move(generators)) {
  if (g_.rows() != c_.size()) throw SynthError(ErrorKind::invalid_argument, "zonotope: shape mismatch");
  if (!c_.allFinite() || !g_.allFinite()) throw SynthError(ErrorKind::non_finite, "zonotope: non-finite entry");
}

Zonotope Zonotope::box(const Eigen::VectorXd& center, const Eigen::VectorXd& radius) {
  if (radius.size() != center.size()) throw SynthError(ErrorKind::invalid_argument, "zonotope: shape mismatch");
  std::vector<Eigen::Index> nz;
  for (Eigen::Index i = 0; i < radius.size(); ++i) {
    if (radius[i] < 0.0) throw SynthError(ErrorKind::invalid_argument, "zonotope: negative radius");
    if (radius[i] > 0.0) nz.push_back(i);
  }
  RowMatrix g = RowMatrix::Zero(center.size(), static_cast<Eigen::Index>(nz.size()));
  for (std::size_t k = 0; k < nz.size(); ++k) g(nz[k], static_cast<Eigen::Index>(k)) = radius[nz[k]];
  return Zonotope(center, std::move(g));
}

bool Zonotope::contains(const Eigen::VectorXd& p, double tol) const {
  if (p.size() != dim()) throw SynthError(ErrorKind::invalid_argument, "zonotope: shape mismatch");
  const Eigen::VectorXd d = p - c_;
  const Eigen::Index m = g_.cols();
  if (m == 0) return d.cwiseAbs().maxCoeff() <= tol;
  lp::Problem prob;
  prob.cost = Eigen::VectorXd::Zero(m);
  prob.col_lo = Eigen::VectorXd::Constant(m, -1.0);
  prob.col_hi = Eigen::VectorXd::Constant(m, 1.0);
  prob.a = g_;
  prob.row_lo = d.array() - tol;
  prob.row_hi = d.array() + tol;
  return lp::solve(prob).status == lp::Status::optimal;
}

Zonotope zono_linear_map(const Eigen::MatrixXd& m, const Zonotope& z) {
  if (m.cols() != z.dim()) throw SynthError(ErrorKind::invalid_argument, "zono_linear_map: shape mismatch");
  return Zonotope(m * z.center(), RowMatrix(m * z.generators()));
}

Zonotope zono_translate(const Zonotope& z, const Eigen::VectorXd& t) {
  if (t.size() != z.dim()) throw SynthError(ErrorKind::invalid_argument, "zono_translate: shape mismatch");
  return Zonotope(z.center() + t, z.generators());
}

Zonotope zono_minkowski(const Zonotope& a, const Zonotope& b) {
  if (a.dim() != b.dim()) throw SynthError(ErrorKind::invalid_argument, "zono_minkowski: shape mismatch");
  RowMatrix g(a.dim(), a.num_generators() + b.num_generators());
  g << a.generators(), b.generators();
  return Zonotope(a.center() + b.center(), std::move(g));
}

Zonotope zono_reduce(const Zonotope& z, double order_cap) {
  const Eigen::Index n = z.dim();
  const Eigen::Index m = z.num_generators();
  if (order_cap < 1.0) throw SynthError(ErrorKind::invalid_argument, "zono_reduce: order cap < 1");
  const auto cap = static_cast<Eigen::Index>(std::floor(order_cap * static_cast<double>(n)));
  // Drop all-zero generators first; they cost nothing to remove.
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (z.generators().col(j).cwiseAbs().maxCoeff() > 0.0) live.push_back(j);
  }
  if (static_cast<Eigen::Index>(live.size()) <= cap) {
    RowMatrix g(n, static_cast<Eigen::Index>(live.size()));
    for (std::size_t k = 0; k < live.size(); ++k) g.col(static_cast<Eigen::Index>(k)) = z.generators().col(live[k]);
    return Zonotope(z.center(), std::move(g));
  }
  const Eigen::Index keep = cap - n;
  std::vector<double> score(live.size());
  for (std::size_t k = 0; k < live.size(); ++k) {
    const auto col = z.generators().col(live[k]);
    score[k] = col.cwiseAbs().sum() - col.cwiseAbs().maxCoeff();
  }
  std::vector<std::size_t> order(live.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  std::vector<std::size_t> kept(order.begin(), order.begin() + keep);
  std::sort(kept.begin(), kept.end());
  Eigen::VectorXd box = Eigen::VectorXd::Zero(n);
  for (auto it = order.begin() + keep; it != order.end(); ++it) box += z.generators().col(live[*it]).cwiseAbs();
  // Cover the rounding of the summation.
  const double grow = 1.0 + static_cast<double>(live.size()) * std::numeric_limits<double>::epsilon();
  RowMatrix g = RowMatrix::Zero(n, keep + n);
  for (Eigen::Index k = 0; k < keep; ++k) g.col(k) = z.generators().col(live[kept[static_cast<std::size_t>(k)]]);
  for (Eigen::Index i = 0; i < n; ++i) g(i, keep + i) = box[i] * grow;
  return Zonotope(z.center(), std::move(g));
}

}  // namespace synth

#include "synth/lp.hpp"

#include "synth/error.hpp"
#include "synth/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace synth::lp {

namespace {
constexpr double kMinWeight = 1e-12;
}

DualSimplex::DualSimplex(const Problem& p, Options opt) : opt_(opt), n_(p.num_cols()), m_(0) {
  if (p.col_lo.size() != n_ || p.col_hi.size() != n_ || (p.a.rows() > 0 && p.a.cols() != n_) ||
      p.row_lo.size() != p.a.rows() || p.row_hi.size() != p.a.rows()) {
    throw SynthError(ErrorKind::invalid_argument, "lp: inconsistent problem dimensions");
  }
  cost_.assign(p.cost.data(), p.cost.data() + n_);
  lo_.assign(p.col_lo.data(), p.col_lo.data() + n_);
  hi_.assign(p.col_hi.data(), p.col_hi.data() + n_);
  x_.assign(n_, 0.0);
  d_ = cost_;
  status_.assign(n_, VarStatus::at_lower);
  for (int j = 0; j < n_; ++j) {
    if (!std::isfinite(lo_[j]) || !std::isfinite(hi_[j]) || lo_[j] > hi_[j]) {
      throw SynthError(ErrorKind::invalid_argument, "lp: columns need finite bounds lo <= hi");
    }
    status_[j] = cost_[j] < 0.0 ? VarStatus::at_upper : VarStatus::at_lower;
    x_[j] = status_[j] == VarStatus::at_lower ? lo_[j] : hi_[j];
  }
  std::vector<std::vector<double>> rows(p.a.rows());
  std::vector<double> rlo(p.a.rows()), rhi(p.a.rows());
  for (Eigen::Index i = 0; i < p.a.rows(); ++i) {
    rows[i].assign(p.a.row(i).data(), p.a.row(i).data() + n_);
    rlo[i] = p.row_lo[i];
    rhi[i] = p.row_hi[i];
  }
  dirty_ = true;
  add_rows(rows, rlo, rhi);
}

void DualSimplex::reserve(int rows) {
  if (rows <= cap_) return;
  const int cap = std::max(rows, std::max(16, 2 * cap_));
  std::vector<double> nb(static_cast<std::size_t>(cap) * cap, 0.0);
  for (int i = 0; i < m_; ++i) std::copy(binv_row(i), binv_row(i) + m_, nb.data() + static_cast<std::size_t>(i) * cap);
  binv_.swap(nb);
  cap_ = cap;
}

void DualSimplex::set_col_bounds(int j, double lo, double hi) {
  if (j < 0 || j >= n_ || !(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw SynthError(ErrorKind::invalid_argument, "lp: bad column bound");
  }
  lo_[j] = lo;
  hi_[j] = hi;
  if (status_[j] != VarStatus::basic) x_[j] = status_[j] == VarStatus::at_lower ? lo : hi;
  primal_dirty_ = true;
}

void DualSimplex::add_rows(const std::vector<std::vector<double>>& rows, const std::vector<double>& lo,
                           const std::vector<double>& hi) {
  const int k = static_cast<int>(rows.size());
  if (lo.size() != rows.size() || hi.size() != rows.size()) {
    throw SynthError(ErrorKind::invalid_argument, "lp: row bound count mismatch");
  }
  if (k == 0) return;
  reserve(m_ + k);
  a_.reserve(a_.size() + static_cast<std::size_t>(k) * n_);
  for (int t = 0; t < k; ++t) {
    if (static_cast<int>(rows[t].size()) != n_) throw SynthError(ErrorKind::invalid_argument, "lp: row length");
    if (lo[t] > hi[t]) throw SynthError(ErrorKind::invalid_argument, "lp: row bounds lo > hi");
    const int i = m_;
    a_.insert(a_.end(), rows[t].begin(), rows[t].end());
    lo_.push_back(lo[t]);
    hi_.push_back(hi[t]);
    const double act = kernels::dot(rows[t], std::span<const double>(x_.data(), n_));
    x_.push_back(act);
    d_.push_back(0.0);
    status_.push_back(VarStatus::basic);
    heading_.push_back(n_ + i);
    weights_.push_back(1.0);
    if (!dirty_) {
      // Bordered inverse: [[B, 0], [r, -1]]^{-1} = [[B^{-1}, 0], [r B^{-1}, -1]].
      double* nr = binv_row(i);
      std::fill(nr, nr + i + 1, 0.0);
      for (int p = 0; p < i; ++p) {
        const int j = heading_[p];
        const double rp = j < n_ ? rows[t][j] : 0.0;
        if (rp != 0.0) kernels::axpy(rp, std::span<const double>(binv_row(p), i), std::span<double>(nr, i));
      }
      nr[i] = -1.0;
      for (int p = 0; p < i; ++p) binv_row(p)[i] = 0.0;
      double w = 0.0;
      for (int c = 0; c <= i; ++c) w += nr[c] * nr[c];
      weights_[i] = std::max(w, kMinWeight);
    }
    ++m_;
  }
}

Basis DualSimplex::basis() const { return Basis{heading_, status_}; }

void DualSimplex::set_basis(const Basis& b) {
  const int mb = static_cast<int>(b.heading.size());
  if (mb > m_ || static_cast<int>(b.status.size()) != n_ + mb) {
    throw SynthError(ErrorKind::invalid_argument, "lp: basis shape mismatch");
  }
  std::copy(b.heading.begin(), b.heading.end(), heading_.begin());
  std::copy(b.status.begin(), b.status.end(), status_.begin());
  for (int i = mb; i < m_; ++i) {
    heading_[i] = n_ + i;
    status_[n_ + i] = VarStatus::basic;
  }
  dirty_ = true;
}

void DualSimplex::refactor() {
  // Basis [A_S, -E_T]: with R the rows whose slack is nonbasic, only the
  // k x k block A_RS needs an LU; slack rows follow by substitution.
  std::vector<int> pos_of_row(m_, -1);  // basis position of a row's slack
  std::vector<int> structurals;         // basis positions of structurals
  for (int p = 0; p < m_; ++p) {
    const int j = heading_[p];
    if (j < n_) {
      structurals.push_back(p);
    } else {
      pos_of_row[j - n_] = p;
    }
  }
  std::vector<int> rrows;
  for (int i = 0; i < m_; ++i) {
    if (pos_of_row[i] < 0) rrows.push_back(i);
  }
  const int k = static_cast<int>(structurals.size());
  Eigen::MatrixXd ars(k, k);
  for (int r = 0; r < k; ++r)
    for (int q = 0; q < k; ++q) ars(r, q) = a_[static_cast<std::size_t>(rrows[r]) * n_ + heading_[structurals[q]]];
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  if (k > 0) lu.compute(ars);
  if (static_cast<int>(rrows.size()) != k || (k > 0 && !(lu.rcond() > 1e-12))) {
    // Repair by restarting from the slack basis. Every column is boxed, so
    // putting each at the bound its cost prefers keeps the basis dual
    // feasible.
    ++basis_resets_;
    for (int j = 0; j < n_; ++j) status_[j] = cost_[j] < 0.0 ? VarStatus::at_upper : VarStatus::at_lower;
    for (int p = 0; p < m_; ++p) {
      heading_[p] = n_ + p;
      status_[n_ + p] = VarStatus::basic;
    }
    for (int p = 0; p < m_; ++p) {
      std::fill(binv_row(p), binv_row(p) + m_, 0.0);
      binv_row(p)[p] = -1.0;
    }
  } else {
    const Eigen::MatrixXd inv = k > 0 ? lu.inverse() : Eigen::MatrixXd();
    for (int q = 0; q < k; ++q) {
      double* row = binv_row(structurals[q]);
      std::fill(row, row + m_, 0.0);
      for (int r = 0; r < k; ++r) row[rrows[r]] = inv(q, r);
    }
    std::vector<double> ats(k);
    for (int t = 0; t < m_; ++t) {
      const int p = pos_of_row[t];
      if (p < 0) continue;
      double* row = binv_row(p);
      std::fill(row, row + m_, 0.0);
      for (int q = 0; q < k; ++q) ats[q] = a_[static_cast<std::size_t>(t) * n_ + heading_[structurals[q]]];
      for (int r = 0; r < k; ++r) {
        double acc = 0.0;
        for (int q = 0; q < k; ++q) acc += ats[q] * inv(q, r);
        row[rrows[r]] = acc;
      }
      row[t] = -1.0;
    }
  }
  since_refactor_ = 0;
  dirty_ = false;
  compute_primal();
  compute_dual();
  compute_weights();
}

void DualSimplex::compute_primal() {
  std::vector<double> r(m_, 0.0);
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == VarStatus::basic) continue;
    x_[j] = status_[j] == VarStatus::at_lower ? lo_[j] : hi_[j];
    if (x_[j] == 0.0) continue;
    if (j < n_) {
      for (int i = 0; i < m_; ++i) r[i] -= a_[static_cast<std::size_t>(i) * n_ + j] * x_[j];
    } else {
      r[j - n_] += x_[j];
    }
  }
  for (int p = 0; p < m_; ++p) x_[heading_[p]] = kernels::dot(std::span<const double>(binv_row(p), m_), r);
  primal_dirty_ = false;
}

void DualSimplex::compute_dual() {
  std::vector<double> y(m_, 0.0);
  for (int p = 0; p < m_; ++p) {
    const int j = heading_[p];
    const double c = j < n_ ? cost_[j] : 0.0;
    if (c != 0.0) kernels::axpy(c, std::span<const double>(binv_row(p), m_), y);
  }
  std::vector<double> ya(n_, 0.0);
  for (int i = 0; i < m_; ++i) {
    if (y[i] != 0.0) kernels::axpy(y[i], std::span<const double>(a_.data() + static_cast<std::size_t>(i) * n_, n_), ya);
  }
  for (int j = 0; j < n_; ++j) d_[j] = cost_[j] - ya[j];
  for (int i = 0; i < m_; ++i) d_[n_ + i] = y[i];
  for (int p = 0; p < m_; ++p) d_[heading_[p]] = 0.0;
  // Drift repair: boxed variables flip to the bound matching their reduced
  // cost; the rest are truncated (a cost shift below dual_tol * 100).
  bool flipped = false;
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == VarStatus::basic || lo_[j] == hi_[j]) continue;
    const bool bad = status_[j] == VarStatus::at_lower ? d_[j] < -opt_.dual_tol : d_[j] > opt_.dual_tol;
    if (!bad) continue;
    const VarStatus other = status_[j] == VarStatus::at_lower ? VarStatus::at_upper : VarStatus::at_lower;
    const double bound = other == VarStatus::at_lower ? lo_[j] : hi_[j];
    if (std::isfinite(bound)) {
      status_[j] = other;
      flipped = true;
    } else {
      d_[j] = 0.0;
    }
  }
  if (flipped) compute_primal();
}

void DualSimplex::compute_weights() {
  for (int p = 0; p < m_; ++p) {
    const double* row = binv_row(p);
    weights_[p] = std::max(kernels::dot(std::span<const double>(row, m_), std::span<const double>(row, m_)), kMinWeight);
  }
}

void DualSimplex::column(int j, std::vector<double>& out) const {
  out.assign(m_, 0.0);
  if (j < n_) {
    // Columns are sparse in the row space; the lazy limit rows touch only u and b.
    nz_.clear();
    col_.clear();
    for (int i = 0; i < m_; ++i) {
      const double a = a_[static_cast<std::size_t>(i) * n_ + j];
      if (a != 0.0) {
        nz_.push_back(i);
        col_.push_back(a);
      }
    }
    for (int p = 0; p < m_; ++p) {
      const double* row = binv_row(p);
      double acc = 0.0;
      for (std::size_t k = 0; k < nz_.size(); ++k) acc += row[nz_[k]] * col_[k];
      out[p] = acc;
    }
  } else {
    const int i = j - n_;
    for (int p = 0; p < m_; ++p) out[p] = -binv_row(p)[i];
  }
}

Status DualSimplex::solve() {
  infeasible_rows_.clear();
  infeasible_var_ = -1;
  if (m_ == 0) {
    for (int j = 0; j < n_; ++j) x_[j] = status_[j] == VarStatus::at_lower ? lo_[j] : hi_[j];
    primal_dirty_ = false;
    return Status::optimal;
  }
  if (dirty_) {
    refactor();
  } else if (primal_dirty_) {
    compute_primal();
  }
  const int cap = opt_.max_iterations > 0 ? opt_.max_iterations : 20 * (n_ + m_) + 1000;
  for (int it = 0; it < cap; ++it) {
    Status st;
    if (!iterate(st)) return st;
    ++iterations_;
    if (++since_refactor_ >= opt_.refactor_interval) refactor();
  }
  return Status::iteration_limit;
}

bool DualSimplex::iterate(Status& status) {
  // Pricing: dual steepest edge.
  int r = -1;
  double best = 0.0;
  for (int p = 0; p < m_; ++p) {
    const int j = heading_[p];
    const double v = x_[j];
    double infeas = 0.0;
    if (v < lo_[j] - opt_.primal_tol * std::max(1.0, std::fabs(lo_[j]))) infeas = lo_[j] - v;
    else if (v > hi_[j] + opt_.primal_tol * std::max(1.0, std::fabs(hi_[j]))) infeas = v - hi_[j];
    if (infeas == 0.0) continue;
    const double score = infeas * infeas / weights_[p];
    if (score > best) {
      best = score;
      r = p;
    }
  }
  if (r < 0) {
    status = Status::optimal;
    return false;
  }
  const int leaving = heading_[r];
  const bool to_lower = x_[leaving] < lo_[leaving];
  const double bound = to_lower ? lo_[leaving] : hi_[leaving];
  const double s = to_lower ? -1.0 : 1.0;

  rho_.assign(binv_row(r), binv_row(r) + m_);
  alpha_row_.assign(n_ + m_, 0.0);
  std::span<double> alpha_struct(alpha_row_.data(), n_);
  for (int i = 0; i < m_; ++i) {
    if (rho_[i] != 0.0) {
      kernels::axpy(rho_[i], std::span<const double>(a_.data() + static_cast<std::size_t>(i) * n_, n_), alpha_struct);
    }
  }
  for (int i = 0; i < m_; ++i) alpha_row_[n_ + i] = -rho_[i];

  // Harris two-pass ratio test.
  double theta_max = kInf;
  for (int j = 0; j < n_ + m_; ++j) {
    const VarStatus st = status_[j];
    if (st == VarStatus::basic || lo_[j] == hi_[j]) continue;
    const double a = s * alpha_row_[j];
    const bool eligible = st == VarStatus::at_lower ? a > opt_.pivot_tol : a < -opt_.pivot_tol;
    if (!eligible) continue;
    const double dj = std::fabs(d_[j]);
    theta_max = std::min(theta_max, (dj + opt_.dual_tol) / std::fabs(a));
  }
  if (!std::isfinite(theta_max)) {
    infeasible_var_ = leaving;
    for (int i = 0; i < m_; ++i) {
      if (std::fabs(rho_[i]) > 1e-12) infeasible_rows_.push_back(i);
    }
    status = Status::infeasible;
    return false;
  }
  int q = -1;
  double best_alpha = 0.0;
  for (int j = 0; j < n_ + m_; ++j) {
    const VarStatus st = status_[j];
    if (st == VarStatus::basic || lo_[j] == hi_[j]) continue;
    const double a = s * alpha_row_[j];
    const bool eligible = st == VarStatus::at_lower ? a > opt_.pivot_tol : a < -opt_.pivot_tol;
    if (!eligible) continue;
    const double dj = std::max(0.0, st == VarStatus::at_lower ? d_[j] : -d_[j]);
    if (dj / std::fabs(a) <= theta_max && std::fabs(a) > best_alpha) {
      best_alpha = std::fabs(a);
      q = j;
    }
  }
  const double arq = alpha_row_[q];

  column(q, alpha_col_);
  // Weights use tau = B^{-1} rho with the pre-pivot inverse.
  // Only rows with alpha_col != 0 consume tau.
  tau_.assign(m_, 0.0);
  for (int p = 0; p < m_; ++p) {
    if (alpha_col_[p] != 0.0) tau_[p] = kernels::dot(std::span<const double>(binv_row(p), m_), rho_);
  }

  const double theta_d = d_[q] / arq;
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] != VarStatus::basic && alpha_row_[j] != 0.0) d_[j] -= theta_d * alpha_row_[j];
  }
  d_[q] = 0.0;
  d_[leaving] = -theta_d;

  const double theta_p = (x_[leaving] - bound) / arq;
  for (int p = 0; p < m_; ++p) {
    if (alpha_col_[p] != 0.0) x_[heading_[p]] -= theta_p * alpha_col_[p];
  }
  x_[q] += theta_p;
  x_[leaving] = bound;
  status_[leaving] = to_lower ? VarStatus::at_lower : VarStatus::at_upper;
  status_[q] = VarStatus::basic;
  heading_[r] = q;

  const double wr = weights_[r];
  for (int p = 0; p < m_; ++p) {
    if (p == r || alpha_col_[p] == 0.0) continue;
    const double k = alpha_col_[p] / arq;
    weights_[p] = std::max(weights_[p] - 2.0 * k * tau_[p] + k * k * wr, std::max(k * k * wr, kMinWeight));
  }
  weights_[r] = std::max(wr / (arq * arq), kMinWeight);

  double* pr = binv_row(r);
  const double inv = 1.0 / arq;
  for (int c = 0; c < m_; ++c) pr[c] *= inv;
  for (int p = 0; p < m_; ++p) {
    if (p == r || alpha_col_[p] == 0.0) continue;
    kernels::axpy(-alpha_col_[p], std::span<const double>(pr, m_), std::span<double>(binv_row(p), m_));
  }
  return true;
}

double DualSimplex::objective() const {
  double v = 0.0;
  for (int j = 0; j < n_; ++j) v += cost_[j] * x_[j];
  return v;
}

Eigen::VectorXd DualSimplex::primal() const {
  return Eigen::Map<const Eigen::VectorXd>(x_.data(), n_);
}

Result solve(const Problem& p, Options opt) {
  DualSimplex ds(p, opt);
  Result r;
  r.status = ds.solve();
  r.iterations = ds.iterations();
  r.x = ds.primal();
  r.objective = ds.objective();
  r.infeasibility_rows = ds.infeasibility_rows();
  return r;
}

}  // namespace synth::lp

#pragma once

#include <Eigen/Dense>

namespace synth {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// {c + G xi : xi in [-1, 1]^m}. Generators are row-major so hulls read rows
// contiguously.
class Zonotope {
 public:
  Zonotope() = default;
  explicit Zonotope(Eigen::VectorXd center);
  Zonotope(Eigen::VectorXd center, RowMatrix generators);
  static Zonotope box(const Eigen::VectorXd& center, const Eigen::VectorXd& radius);

  Eigen::Index dim() const { return c_.size(); }
  Eigen::Index num_generators() const { return g_.cols(); }
  double order() const { return dim() == 0 ? 0.0 : static_cast<double>(g_.cols()) / static_cast<double>(dim()); }
  const Eigen::VectorXd& center() const { return c_; }
  const RowMatrix& generators() const { return g_; }

  Eigen::VectorXd point(const Eigen::VectorXd& xi) const { return c_ + g_ * xi; }
  // Feasibility LP: exists xi in [-1,1]^m with |c + G xi - p| <= tol.
  bool contains(const Eigen::VectorXd& p, double tol = 1e-9) const;

 private:
  Eigen::VectorXd c_;
  RowMatrix g_;
};

Zonotope zono_linear_map(const Eigen::MatrixXd& m, const Zonotope& z);
Zonotope zono_translate(const Zonotope& z, const Eigen::VectorXd& t);
Zonotope zono_minkowski(const Zonotope& a, const Zonotope& b);
// Keeps order <= cap: the smallest generators (by ||g||_1 - ||g||_inf) are
// replaced by their interval hull. Deterministic; ties keep column order.
Zonotope zono_reduce(const Zonotope& z, double order_cap);

}  // namespace synth

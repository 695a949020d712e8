#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace kbemu {

/// Axis-aligned input box [lower, upper].
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Box unit(std::size_t dim);
  static Box symmetric(std::size_t dim);  // [-1, 1]^dim
  static Box uniform(std::size_t dim, double lo, double hi);

  std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }
  Eigen::VectorXd width() const { return upper - lower; }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol = 1e-12) const;

  /// Maps rows of a unit-box matrix into this box, and back.
  Eigen::MatrixXd from_unit(const Eigen::MatrixXd& unit_points) const;
  Eigen::MatrixXd to_unit(const Eigen::MatrixXd& points) const;

  void validate() const;
};

}  // namespace kbemu

#include "kbemu/box.hpp"

#include <cmath>

#include "kbemu/errors.hpp"

namespace kbemu {

Box Box::unit(std::size_t dim) { return uniform(dim, 0.0, 1.0); }

Box Box::symmetric(std::size_t dim) { return uniform(dim, -1.0, 1.0); }

Box Box::uniform(std::size_t dim, double lo, double hi) {
  const auto d = static_cast<Eigen::Index>(dim);
  Box box{Eigen::VectorXd::Constant(d, lo), Eigen::VectorXd::Constant(d, hi)};
  box.validate();
  return box;
}

bool Box::contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] - tol && x[i] <= upper[i] + tol)) return false;
  }
  return true;
}

Eigen::MatrixXd Box::from_unit(const Eigen::MatrixXd& unit_points) const {
  if (unit_points.cols() != lower.size()) throw ShapeError("box dimension mismatch");
  Eigen::MatrixXd out = unit_points;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    out.col(j) = (lower[j] + (upper[j] - lower[j]) * unit_points.col(j).array()).matrix();
  }
  return out;
}

Eigen::MatrixXd Box::to_unit(const Eigen::MatrixXd& points) const {
  if (points.cols() != lower.size()) throw ShapeError("box dimension mismatch");
  Eigen::MatrixXd out = points;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    out.col(j) = ((points.col(j).array() - lower[j]) / (upper[j] - lower[j])).matrix();
  }
  return out;
}

void Box::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw InvalidParameter("box needs matching, nonempty lower/upper bounds");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(upper[i] > lower[i])) {
      throw InvalidParameter("box bounds must be finite with upper > lower");
    }
  }
}

}  // namespace kbemu

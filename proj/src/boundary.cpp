#include "kbemu/boundary.hpp"

#include <cmath>
#include <sstream>

#include "kbemu/errors.hpp"

namespace kbemu {

AxisBoundary::AxisBoundary(std::size_t axis, double location, BoundaryFunction evaluator,
                           std::string name)
    : axis_(axis), location_(location), evaluator_(std::move(evaluator)), name_(std::move(name)) {
  if (!std::isfinite(location_)) throw InvalidParameter("boundary location must be finite");
  if (!evaluator_) throw InvalidParameter("boundary needs an evaluator");
}

double AxisBoundary::offset(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) <= axis_) {
    throw ShapeError("point of dimension " + std::to_string(x.size()) +
                     " has no axis " + std::to_string(axis_));
  }
  return x[static_cast<Eigen::Index>(axis_)] - location_;
}

Eigen::VectorXd AxisBoundary::project(const Eigen::VectorXd& x) const {
  offset(x);
  Eigen::VectorXd p = x;
  p[static_cast<Eigen::Index>(axis_)] = location_;
  return p;
}

double AxisBoundary::evaluate(const Eigen::VectorXd& on_boundary) const {
  if (offset(on_boundary) != 0.0) {
    std::ostringstream msg;
    msg << "boundary '" << name_ << "' evaluated off its hyperplane (x[" << axis_
        << "] = " << on_boundary[static_cast<Eigen::Index>(axis_)] << ", expected "
        << location_ << ")";
    throw MisuseError(msg.str());
  }
  return evaluator_(on_boundary);
}

AxisBoundary AxisBoundary::relocated(double new_location) const {
  return AxisBoundary(axis_, new_location, evaluator_, name_);
}

Projection project(const Eigen::VectorXd& x, const AxisBoundary& boundary) {
  return {boundary.project(x), std::abs(boundary.offset(x))};
}

const char* to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::kNone: return "none";
    case BoundaryKind::kSingle: return "single";
    case BoundaryKind::kTwoPerpendicular: return "two-perpendicular";
    case BoundaryKind::kTwoParallel: return "two-parallel";
  }
  return "?";
}

BoundaryConfig BoundaryConfig::none() { return BoundaryConfig(BoundaryKind::kNone, {}); }

BoundaryConfig BoundaryConfig::single(AxisBoundary k) {
  return BoundaryConfig(BoundaryKind::kSingle, {std::move(k)});
}

BoundaryConfig BoundaryConfig::perpendicular(AxisBoundary k, AxisBoundary l) {
  if (k.axis() == l.axis()) {
    throw InvalidParameter("perpendicular boundaries must lie on distinct axes");
  }
  return BoundaryConfig(BoundaryKind::kTwoPerpendicular, {std::move(k), std::move(l)});
}

BoundaryConfig BoundaryConfig::parallel(AxisBoundary k, AxisBoundary l) {
  if (k.axis() != l.axis()) {
    throw InvalidParameter("parallel boundaries must share an axis");
  }
  if (k.location() == l.location()) {
    throw DegenerateConfiguration("parallel boundaries coincide");
  }
  return BoundaryConfig(BoundaryKind::kTwoParallel, {std::move(k), std::move(l)});
}

BoundaryConfig BoundaryConfig::from_list(std::vector<AxisBoundary> boundaries) {
  switch (boundaries.size()) {
    case 0: return none();
    case 1: return single(std::move(boundaries[0]));
    case 2:
      if (boundaries[0].axis() == boundaries[1].axis()) {
        return parallel(std::move(boundaries[0]), std::move(boundaries[1]));
      }
      return perpendicular(std::move(boundaries[0]), std::move(boundaries[1]));
    default:
      throw InvalidParameter("at most two known boundaries are supported, got " +
                             std::to_string(boundaries.size()));
  }
}

const AxisBoundary& BoundaryConfig::k() const {
  if (boundaries_.empty()) throw MisuseError("boundary configuration is empty");
  return boundaries_[0];
}

const AxisBoundary& BoundaryConfig::l() const {
  if (boundaries_.size() < 2) throw MisuseError("boundary configuration has no second boundary");
  return boundaries_[1];
}

BoundaryConfig BoundaryConfig::swapped() const {
  if (boundaries_.size() < 2) return *this;
  return BoundaryConfig(kind_, {boundaries_[1], boundaries_[0]});
}

double BoundaryConfig::separation() const {
  if (kind_ != BoundaryKind::kTwoParallel) {
    throw MisuseError("separation is defined for parallel boundaries only");
  }
  return std::abs(boundaries_[1].location() - boundaries_[0].location());
}

void BoundaryConfig::check_dimension(std::size_t dim) const {
  for (const auto& b : boundaries_) {
    if (b.axis() >= dim) {
      throw InvalidParameter("boundary axis " + std::to_string(b.axis()) +
                             " out of range for dimension " + std::to_string(dim));
    }
  }
}

}  // namespace kbemu

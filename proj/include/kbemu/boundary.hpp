#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kbemu {

/// Exact simulator output on a boundary hyperplane.
using BoundaryFunction = std::function<double(const Eigen::VectorXd&)>;

/// Axis-aligned hyperplane {x : x[axis] = location} on which the simulator
/// is cheap to evaluate.
class AxisBoundary {
 public:
  AxisBoundary(std::size_t axis, double location, BoundaryFunction evaluator,
               std::string name = {});

  std::size_t axis() const { return axis_; }
  double location() const { return location_; }
  const std::string& name() const { return name_; }

  /// Signed displacement of x from the hyperplane along the normal.
  double offset(const Eigen::VectorXd& x) const;

  /// x with coordinate axis() replaced by location().
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;

  /// Calls the evaluator. The point must lie exactly on the hyperplane.
  double evaluate(const Eigen::VectorXd& on_boundary) const;

  AxisBoundary relocated(double new_location) const;

 private:
  std::size_t axis_;
  double location_;
  BoundaryFunction evaluator_;
  std::string name_;
};

struct Projection {
  Eigen::VectorXd point;
  double distance;  // |x[axis] - location|
};

Projection project(const Eigen::VectorXd& x, const AxisBoundary& boundary);

enum class BoundaryKind { kNone, kSingle, kTwoPerpendicular, kTwoParallel };

const char* to_string(BoundaryKind kind);

/// One of the arrangements for which closed-form updates exist.
class BoundaryConfig {
 public:
  static BoundaryConfig none();
  static BoundaryConfig single(AxisBoundary k);
  /// K and L on distinct axes.
  static BoundaryConfig perpendicular(AxisBoundary k, AxisBoundary l);
  /// K and L on the same axis at distinct locations.
  static BoundaryConfig parallel(AxisBoundary k, AxisBoundary l);
  /// Infers the arrangement from zero, one or two boundaries.
  static BoundaryConfig from_list(std::vector<AxisBoundary> boundaries);

  BoundaryKind kind() const { return kind_; }
  bool empty() const { return kind_ == BoundaryKind::kNone; }
  const std::vector<AxisBoundary>& boundaries() const { return boundaries_; }
  const AxisBoundary& k() const;
  const AxisBoundary& l() const;

  /// Same arrangement with K and L interchanged.
  BoundaryConfig swapped() const;

  /// |L.location - K.location| for the parallel arrangement.
  double separation() const;

  /// Throws if any axis is outside [0, dim).
  void check_dimension(std::size_t dim) const;

 private:
  BoundaryConfig(BoundaryKind kind, std::vector<AxisBoundary> boundaries)
      : kind_(kind), boundaries_(std::move(boundaries)) {}

  BoundaryKind kind_;
  std::vector<AxisBoundary> boundaries_;
};

}  // namespace kbemu

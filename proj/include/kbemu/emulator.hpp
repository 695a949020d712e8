#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kbemu/boundary.hpp"
#include "kbemu/box.hpp"
#include "kbemu/kernel.hpp"

namespace kbemu {

inline constexpr double kDefaultJitter = 1e-10;
inline constexpr double kMaxJitter = 1e-6;

/// Constant-mean, constant-variance second-order prior for f(x).
struct PriorSpec {
  double beta = 0.0;
  double sigma2 = 1.0;
  KernelSpec kernel;

  std::size_t dim() const { return kernel.dim(); }
  void validate() const;

  double covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const {
    return sigma2 * corr_product(x, x2, kernel);
  }
};

/// Simulator runs: one point per row of `points`, outputs in `values`.
class TrainingSet {
 public:
  /// Empty set of the given dimension.
  explicit TrainingSet(std::size_t dim);
  TrainingSet(Eigen::MatrixXd points, Eigen::VectorXd values);

  Eigen::Index size() const { return points_.rows(); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  bool empty() const { return size() == 0; }
  const Eigen::MatrixXd& points() const { return points_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd point(Eigen::Index i) const { return points_.row(i).transpose(); }

  /// Index of a row within 1e-12 (max-norm) of x, if any.
  std::optional<Eigen::Index> find(const Eigen::VectorXd& x, double tol = 1e-12) const;

  TrainingSet with_point(const Eigen::VectorXd& x, double value) const;

  void check_inside(const Box& box) const;

 private:
  Eigen::MatrixXd points_;
  Eigen::VectorXd values_;
};

/// Prior beliefs analytically adjusted by the configured known boundaries.
/// With BoundaryConfig::none() this is just the prior.
class BoundaryAdjustment {
 public:
  BoundaryAdjustment(PriorSpec prior, BoundaryConfig boundaries);

  const PriorSpec& prior() const { return prior_; }
  const BoundaryConfig& boundaries() const { return boundaries_; }

  double mean(const Eigen::VectorXd& x) const;
  double covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const;
  double variance(const Eigen::VectorXd& x) const;

 private:
  struct ParallelOffsets {
    double a;  // distance from K, measured towards L
    double b;  // distance from L, measured towards K
  };
  ParallelOffsets parallel_offsets(const Eigen::VectorXd& x) const;
  void check_point(const Eigen::VectorXd& x) const;

  PriorSpec prior_;
  BoundaryConfig boundaries_;
  double parallel_c_ = 0.0;
  double parallel_denominator_ = 0.0;  // 1 - r(c)^2
};

/// E_K[f(x)]; throws MisuseError for an empty configuration.
double boundary_mean(const Eigen::VectorXd& x, const PriorSpec& prior,
                     const BoundaryConfig& boundaries);

/// Cov_K[f(x), f(x2)]; throws MisuseError for an empty configuration.
double boundary_cov(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                    const PriorSpec& prior, const BoundaryConfig& boundaries);

/// Emulator adjusted by the known boundaries and then by training runs.
///
/// The n x n matrix Var_K[D] is factorized once at construction with
/// jitter * sigma2 on its diagonal. If that fails the jitter is raised
/// tenfold, up to kMaxJitter, before a ConditioningError is thrown.
/// Instances are immutable and safe to query concurrently.
class AdjustedEmulator {
 public:
  AdjustedEmulator(PriorSpec prior, BoundaryConfig boundaries, TrainingSet training,
                   double jitter = kDefaultJitter);

  double mean(const Eigen::VectorXd& x) const;
  double variance(const Eigen::VectorXd& x) const;
  double covariance(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const;

  const PriorSpec& prior() const { return adjustment_.prior(); }
  const BoundaryConfig& boundaries() const { return adjustment_.boundaries(); }
  const BoundaryAdjustment& adjustment() const { return adjustment_; }
  const TrainingSet& training() const { return training_; }
  double jitter() const { return jitter_; }

  /// Cov_K[f(x), D] in training order.
  Eigen::VectorXd cross_covariance(const Eigen::VectorXd& x) const;
  /// L^{-1} v for the cached factor L L^T = Var_K[D] + jitter.
  Eigen::VectorXd whiten(const Eigen::VectorXd& v) const;
  /// Cov_K[f(x), D] Var_K[D]^{-1} Cov_K[D, f(x)], the variance resolved by D.
  double resolved_variance(const Eigen::VectorXd& x) const;

 private:
  double clip_variance(double v) const;

  BoundaryAdjustment adjustment_;
  TrainingSet training_;
  Eigen::MatrixXd factor_;   // lower Cholesky factor
  Eigen::VectorXd weights_;  // Var_K[D]^{-1} (D - E_K[D])
  double jitter_ = 0.0;
};

AdjustedEmulator build_adjusted(PriorSpec prior, BoundaryConfig boundaries,
                                TrainingSet training, double jitter = kDefaultJitter);

/// Conditioning set that lets a plain GP/Bayes-linear update reproduce the
/// analytic boundary update: the training runs, their projections onto
/// every boundary (and onto K ∩ L when perpendicular), and the same
/// projections of each query point. Values come from the training outputs
/// and the boundary evaluators. Rows within 1e-12 of an earlier row are
/// dropped.
struct AugmentedSet {
  Eigen::MatrixXd points;
  Eigen::VectorXd values;
};

AugmentedSet blackbox_augmented_points(const TrainingSet& training,
                                       std::span<const Eigen::VectorXd> queries,
                                       const BoundaryConfig& boundaries);

AugmentedSet blackbox_augmented_points(const TrainingSet& training, const Eigen::VectorXd& x,
                                       const BoundaryConfig& boundaries);

struct BruteForceResult {
  double mean;
  double variance;    // at x
  double covariance;  // between x and x2
};

/// Direct Bayes-linear adjustment by m evaluations with no boundary
/// shortcuts, solved in 50-digit arithmetic. This is the reference the
/// analytic formulas are checked against. `jitter` * sigma2 is added to the
/// first `jittered_rows` diagonal entries (all rows when negative), so that
/// noisy training runs can be mixed with exact boundary evaluations.
BruteForceResult brute_force_update(const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                                    const PriorSpec& prior, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& x2, double jitter = 0.0,
                                    Eigen::Index jittered_rows = -1);

struct BruteForceBatch {
  Eigen::VectorXd mean;        // per query row
  Eigen::MatrixXd covariance;  // between query rows
};

/// Same adjustment for every row of `queries`, factorizing once.
BruteForceBatch brute_force_batch(const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                                  const PriorSpec& prior, const Eigen::MatrixXd& queries,
                                  double jitter = 0.0, Eigen::Index jittered_rows = -1);

}  // namespace kbemu

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "kbemu/boundary.hpp"
#include "kbemu/box.hpp"
#include "kbemu/emulator.hpp"
#include "kbemu/kernel.hpp"

namespace kbemu {

enum class DesignMethod { kLhc, kMaximinLhc, kWarpedLhc, kGreedyVOpt, kWarpedGreedyVOpt };

const char* to_string(DesignMethod method);
DesignMethod design_method_from_string(const std::string& name);

/// Training-run locations, one per row, expressed in `box`.
struct Design {
  Eigen::MatrixXd points;
  Box box;
  std::uint64_t seed = 0;
  DesignMethod provenance = DesignMethod::kLhc;

  Eigen::Index size() const { return points.rows(); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }

  /// Same design with points mapped affinely from the current box into `target`.
  Design rescaled(const Box& target) const;

  void validate() const;
};

/// Deterministic stream derived from (seed, stream); streams never overlap
/// in practice, so candidate k of a search can be regenerated on its own.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// n-point Latin hypercube in [0,1]^d: each coordinate has exactly one
/// point per stratum [k/n, (k+1)/n), jittered uniformly inside it.
Design latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed);

/// Best of `num_candidates` Latin hypercubes by minimum pairwise distance.
/// Ties keep the earliest candidate.
Design maximin_lhc(std::size_t n, std::size_t d, std::uint64_t seed, std::size_t num_candidates);

double min_pairwise_distance(const Eigen::MatrixXd& points);

/// Randomly shifted Sobol points in `box`.
Eigen::MatrixXd sobol_pool(std::size_t size, const Box& box, std::uint64_t seed);

// --- warping -----------------------------------------------------------------

enum class WarpRule {
  /// u -> F^{-1}(u), F the normalized CDF of the boundary-adjusted variance
  /// profile along the axis. Gives exactly that marginal density.
  kInverseCdf,
  /// u -> g(u) / g(1), g the inverse of the integral of 1 - r^2 measured in
  /// unit-box distance from the boundary. Only for a boundary at a box edge.
  kScaledInverse,
};

/// Monotone map of [0,1] onto itself along one boundary axis.
class AxisWarp {
 public:
  /// Density proportional to `profile(t)` on the box interval [lo, hi].
  /// `antiderivative`, when given, must be a primitive of `profile`;
  /// otherwise Gauss-Kronrod quadrature is used.
  AxisWarp(double lo, double hi, std::function<double(double)> profile,
           std::function<double(double)> antiderivative = {});

  /// Normalized CDF on the unit interval.
  double cdf(double u) const;
  /// Inverse of cdf(): the warp applied to a uniform coordinate.
  double warp(double u) const;

 private:
  double raw_cdf(double u) const;  // unnormalized

  double lo_, hi_;
  std::function<double(double)> profile_;
  std::function<double(double)> antiderivative_;
  std::vector<double> panel_cdf_;  // quadrature path: cumulative at panel edges
  double total_ = 1.0;
};

/// Per-axis warps for a boundary configuration: one entry per boundary axis.
/// Single and perpendicular boundaries use 1 - r^2 of the distance to the
/// boundary (closed form); parallel boundaries use the two-boundary
/// variance profile (quadrature).
std::vector<std::pair<std::size_t, AxisWarp>> boundary_warps(const BoundaryConfig& boundaries,
                                                              const KernelSpec& kernel,
                                                              const Box& box,
                                                              bool use_quadrature = false);

/// Warps every boundary axis of `design`; other axes are untouched. An empty
/// configuration returns the design unchanged.
Design warp_design(const Design& design, const BoundaryConfig& boundaries,
                   const KernelSpec& kernel, WarpRule rule = WarpRule::kInverseCdf);

// --- V-optimality ------------------------------------------------------------

/// Discretization of the input space for the trace criterion.
struct CriterionGrid {
  Eigen::MatrixXd points;

  /// Cell-centred tensor grid with `resolution` points per axis.
  static CriterionGrid tensor(const Box& box, std::size_t resolution);
  /// Largest per-axis resolution with resolution^d <= max_points, capped at 30.
  static std::size_t default_resolution(std::size_t dim, std::size_t max_points = 50000);
};

/// The two terms of trace(Var_{D u K}) = trace(Var_K) - trace(RVar_{D u K}).
struct TraceTerms {
  double boundary_trace;  // sum of Var_K over the grid
  double resolved_trace;  // variance resolved by the design
  double value() const { return boundary_trace - resolved_trace; }
};

TraceTerms v_criterion_terms(const Eigen::MatrixXd& design_points, const CriterionGrid& grid,
                             const PriorSpec& prior, const BoundaryConfig& boundaries,
                             double jitter = kDefaultJitter);

/// trace(Var_{D u K}[f(X)]) via the trace identity.
double v_criterion(const Eigen::MatrixXd& design_points, const CriterionGrid& grid,
                   const PriorSpec& prior, const BoundaryConfig& boundaries,
                   double jitter = kDefaultJitter);

/// Same quantity summed point by point from AdjustedEmulator::variance.
double v_criterion_direct(const Eigen::MatrixXd& design_points, const CriterionGrid& grid,
                          const PriorSpec& prior, const BoundaryConfig& boundaries,
                          double jitter = kDefaultJitter);

struct GreedyOptions {
  std::size_t refine_sweeps = 0;  // coordinate-descent sweeps after selection
  double jitter = kDefaultJitter;
};

/// Chooses n points from `pool` one at a time, each minimizing the trace
/// criterion given the points already chosen. Ties go to the lowest pool
/// index. `box` bounds the optional refinement moves.
Design greedy_v_optimal(std::size_t n, const CriterionGrid& grid, const Eigen::MatrixXd& pool,
                        const PriorSpec& prior, const BoundaryConfig& boundaries, const Box& box,
                        std::uint64_t seed, const GreedyOptions& options = {});

/// Copy of the configuration whose evaluators return 0. Variances do not
/// depend on boundary values.
BoundaryConfig without_values(const BoundaryConfig& boundaries);

}  // namespace kbemu

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kbemu/boundary.hpp"
#include "kbemu/design.hpp"
#include "kbemu/diagnostics.hpp"
#include "kbemu/emulator.hpp"
#include "kbemu/models.hpp"

namespace kbemu::study {

// Seed streams, so that training, diagnostic and scoping sets never share
// random numbers even when the user passes one global seed.
inline constexpr std::uint64_t kStreamTraining = 1;
inline constexpr std::uint64_t kStreamDiagnostic = 2;
inline constexpr std::uint64_t kStreamScoping = 3;
inline constexpr std::uint64_t kStreamPool = 4;

/// A simulator together with the boundaries it knows about.
struct Simulator {
  std::string name;
  Box box;
  std::vector<std::string> axis_names;
  std::function<double(const Eigen::VectorXd&)> f;
  std::optional<AxisBoundary> k;
  std::optional<AxisBoundary> l;           // perpendicular to k
  std::optional<AxisBoundary> k_parallel;  // on k's axis, opposite face

  std::size_t dim() const { return box.dim(); }
  /// "none", "K", "KL-perp" or "KL-par".
  BoundaryConfig boundaries(const std::string& which) const;
};

Simulator toy_simulator();
/// Keeps `model` alive inside the returned closures.
Simulator arabidopsis_simulator(std::shared_ptr<const models::ArabidopsisModel> model);

Eigen::VectorXd evaluate(const Simulator& sim, const Eigen::MatrixXd& points);

struct DesignRequest {
  DesignMethod method = DesignMethod::kMaximinLhc;
  std::size_t n = 10;
  std::uint64_t seed = 0;
  std::size_t maximin_candidates = 100000;
  std::size_t pool_size = 4096;
  std::size_t grid_resolution = 0;  // 0: CriterionGrid::default_resolution
  std::size_t refine_sweeps = 0;
};

/// Builds a design in sim.box. `boundaries` are the ones the design should
/// know about: warping targets them, greedy search conditions on them.
/// kWarpedGreedyVOpt searches without boundaries and then warps.
Design generate_design(const DesignRequest& request, const Simulator& sim, const PriorSpec& prior,
                       const BoundaryConfig& boundaries);

/// Criterion grid used by generate_design for a given request.
CriterionGrid criterion_grid(const DesignRequest& request, const Box& box);

/// Sample mean and variance of a maximin scoping set, with theta on every axis.
PriorSpec scoping_prior(const Simulator& sim, double theta, std::size_t runs, std::uint64_t seed);

struct StudyOptions {
  std::size_t n_train = 20;
  std::vector<double> thetas{0.4};
  std::size_t n_diag = 500;
  std::uint64_t seed = 0;
  std::size_t maximin_candidates = 100000;
  std::size_t diag_candidates = 1000;
  std::size_t scoping_runs = 20;
  /// Fixed prior; when absent it comes from scoping runs.
  std::optional<double> beta;
  std::optional<double> sigma2;
  std::vector<DesignMethod> designs{DesignMethod::kMaximinLhc, DesignMethod::kWarpedLhc};
  std::vector<std::string> boundary_sets{"none", "K", "KL-perp"};
  /// Also report the prior-only scenarios (no training runs).
  bool include_untrained = true;
  std::size_t pool_size = 4096;
  std::size_t grid_resolution = 0;
  std::size_t refine_sweeps = 0;
};

struct StudyRow {
  std::string design;  // method name, or "none" for prior-only rows
  std::string boundaries;
  std::size_t n_train = 0;
  DiagnosticSummary summary;
  double criterion = 0.0;  // v_criterion of the design under these boundaries; 0 if not computed
};

struct StudyResult {
  PriorSpec prior;
  Eigen::MatrixXd diag_points;
  Eigen::VectorXd diag_values;
  std::vector<Design> designs;  // one per StudyOptions::designs entry
  std::vector<StudyRow> rows;
};

/// For each design and boundary set: build the emulator from the design's
/// runs and report its diagnostics on a fixed maximin diagnostic set.
/// Designs that use boundaries are built against the last (richest) set.
StudyResult run_study(const Simulator& sim, const StudyOptions& options);

const StudyRow& find_row(const StudyResult& result, const std::string& design,
                         const std::string& boundaries);

}  // namespace kbemu::study

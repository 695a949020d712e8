#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kbemu/box.hpp"
#include "kbemu/emulator.hpp"

namespace kbemu {

/// Standard deviation below which a prediction is treated as exact.
inline constexpr double kExactSd = 1e-12;
/// Residual an exact prediction may carry before it counts as inconsistent.
inline constexpr double kExactResidual = 1e-9;
inline constexpr double kFlagThreshold = 3.0;

struct DiagnosticRecord {
  Eigen::VectorXd x;
  double f_true;
  double mean;
  double sd;
  /// (mean - f_true) / sd; empty at exact-interpolation points.
  std::optional<double> standardized;
  bool exact() const { return !standardized.has_value(); }
  bool flagged() const { return standardized && std::abs(*standardized) > kFlagThreshold; }
};

struct DiagnosticSummary {
  std::size_t count = 0;
  std::size_t exact = 0;  // records without a standardized error
  double rmse = 0.0;
  double max_abs_s = 0.0;
  std::size_t over_threshold = 0;
  double fraction_over() const {
    return count == 0 ? 0.0 : static_cast<double>(over_threshold) / static_cast<double>(count);
  }
};

struct DiagnosticReport {
  std::vector<DiagnosticRecord> records;
  DiagnosticSummary summary;
};

/// Per-point standardized errors. Throws EmulatorInconsistency when the
/// emulator claims certainty (sd < kExactSd) yet misses the truth by more
/// than kExactResidual.
DiagnosticReport standardized_errors(const AdjustedEmulator& em, const Eigen::MatrixXd& points,
                                     const Eigen::VectorXd& truth);

double rmse(const AdjustedEmulator& em, const Eigen::MatrixXd& points,
            const Eigen::VectorXd& truth);

/// Two-dimensional slice: every input fixed at `base` except axes
/// `axis_x` and `axis_y`, which run over [lower, upper] of `box` on a
/// regular grid that includes both end points.
struct SliceSpec {
  Eigen::VectorXd base;
  std::size_t axis_x = 0;
  std::size_t axis_y = 1;
  std::size_t res_x = 41;
  std::size_t res_y = 41;
  Box box;

  void validate() const;
};

struct SweepRow {
  Eigen::VectorXd x;
  double mean;
  double sd;
  std::optional<double> f_true;
  std::optional<double> standardized;
};

/// Rows ordered with axis_y varying fastest.
std::vector<SweepRow> grid_sweep(const AdjustedEmulator& em, const SliceSpec& slice,
                                 const std::function<double(const Eigen::VectorXd&)>& truth = {});

struct SummaryRow {
  std::string config;
  std::size_t n_train;
  std::string boundaries;
  DiagnosticSummary summary;
};

/// Fixed-width text table: config, n_train, boundaries, rmse, max|S|, frac|S|>3.
std::string format_summary_table(const std::vector<SummaryRow>& rows);

}  // namespace kbemu

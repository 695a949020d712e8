#include "kbemu/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "kbemu/errors.hpp"

namespace kbemu {

namespace {

void check_lengths(const AdjustedEmulator& em, const Eigen::MatrixXd& points,
                   const Eigen::VectorXd& truth) {
  if (points.rows() != truth.size()) {
    throw ShapeError("diagnostics: " + std::to_string(points.rows()) + " points but " +
                     std::to_string(truth.size()) + " true values");
  }
  if (points.rows() > 0 && points.cols() != static_cast<Eigen::Index>(em.prior().dim())) {
    throw ShapeError("diagnostics: point dimension does not match the emulator");
  }
}

std::optional<double> standardize(double mean, double sd, double f_true,
                                  const Eigen::VectorXd& x) {
  const double resid = mean - f_true;
  if (sd < kExactSd) {
    if (std::abs(resid) < kExactResidual) return std::nullopt;
    std::ostringstream msg;
    msg << "emulator reports sd " << sd << " but misses the truth by " << resid << " at x = ["
        << x.transpose() << "]";
    throw EmulatorInconsistency(msg.str());
  }
  return resid / sd;
}

}  // namespace

DiagnosticReport standardized_errors(const AdjustedEmulator& em, const Eigen::MatrixXd& points,
                                     const Eigen::VectorXd& truth) {
  check_lengths(em, points, truth);
  DiagnosticReport report;
  report.records.reserve(static_cast<std::size_t>(points.rows()));
  double sse = 0.0;
  auto& s = report.summary;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    Eigen::VectorXd x = points.row(i).transpose();
    const double mean = em.mean(x);
    const double sd = std::sqrt(em.variance(x));
    DiagnosticRecord rec{x, truth[i], mean, sd, standardize(mean, sd, truth[i], x)};
    sse += (mean - truth[i]) * (mean - truth[i]);
    if (rec.exact()) {
      ++s.exact;
    } else {
      s.max_abs_s = std::max(s.max_abs_s, std::abs(*rec.standardized));
      if (rec.flagged()) ++s.over_threshold;
    }
    report.records.push_back(std::move(rec));
  }
  s.count = report.records.size();
  s.rmse = s.count ? std::sqrt(sse / static_cast<double>(s.count)) : 0.0;
  return report;
}

double rmse(const AdjustedEmulator& em, const Eigen::MatrixXd& points,
            const Eigen::VectorXd& truth) {
  check_lengths(em, points, truth);
  if (points.rows() == 0) throw InvalidParameter("rmse of an empty diagnostic set");
  double sse = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double e = em.mean(points.row(i).transpose()) - truth[i];
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(points.rows()));
}

void SliceSpec::validate() const {
  box.validate();
  const auto d = box.dim();
  if (static_cast<std::size_t>(base.size()) != d) throw ShapeError("slice base has wrong dimension");
  if (axis_x >= d || axis_y >= d || axis_x == axis_y) {
    throw InvalidParameter("slice axes must be two distinct axes of the box");
  }
  if (res_x < 2 || res_y < 2) throw InvalidParameter("slice resolution must be at least 2");
}

std::vector<SweepRow> grid_sweep(const AdjustedEmulator& em, const SliceSpec& slice,
                                 const std::function<double(const Eigen::VectorXd&)>& truth) {
  slice.validate();
  const auto ax = static_cast<Eigen::Index>(slice.axis_x);
  const auto ay = static_cast<Eigen::Index>(slice.axis_y);
  const double x0 = slice.box.lower[ax], x1 = slice.box.upper[ax];
  const double y0 = slice.box.lower[ay], y1 = slice.box.upper[ay];
  std::vector<SweepRow> rows;
  rows.reserve(slice.res_x * slice.res_y);
  for (std::size_t i = 0; i < slice.res_x; ++i) {
    // exact end points: i/(res-1) of 0 and 1 must land on the box faces
    const double tx = static_cast<double>(i) / static_cast<double>(slice.res_x - 1);
    for (std::size_t j = 0; j < slice.res_y; ++j) {
      const double ty = static_cast<double>(j) / static_cast<double>(slice.res_y - 1);
      Eigen::VectorXd x = slice.base;
      x[ax] = i + 1 == slice.res_x ? x1 : x0 + tx * (x1 - x0);
      x[ay] = j + 1 == slice.res_y ? y1 : y0 + ty * (y1 - y0);
      SweepRow row{x, em.mean(x), std::sqrt(em.variance(x)), std::nullopt, std::nullopt};
      if (truth) {
        row.f_true = truth(x);
        row.standardized = standardize(row.mean, row.sd, *row.f_true, x);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_summary_table(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %8s %-18s %12s %10s %11s\n", "config", "n_train",
                "boundaries", "rmse", "max|S|", "frac|S|>3");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-28s %8zu %-18s %12.6g %10.4g %11.4f\n", r.config.c_str(),
                  r.n_train, r.boundaries.c_str(), r.summary.rmse, r.summary.max_abs_s,
                  r.summary.fraction_over());
    out << line;
  }
  return out.str();
}

}  // namespace kbemu

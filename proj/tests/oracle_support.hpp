#pragma once

// Random boundary-emulation cases and the comparison against direct
// conditioning, shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "kbemu/boundary.hpp"
#include "kbemu/emulator.hpp"
#include "kbemu/kernel.hpp"

namespace kbemu::oracle {

// Smooth deterministic stand-in for a simulator.
struct RandomField {
  std::vector<Eigen::VectorXd> freq;
  std::vector<double> amp, phase;

  RandomField(std::size_t d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> w(-4.0, 4.0), a(-1.0, 1.0), p(0.0, 6.283185307179586);
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd f(static_cast<Eigen::Index>(d));
      for (auto& v : f) v = w(rng);
      freq.push_back(f);
      amp.push_back(a(rng));
      phase.push_back(p(rng));
    }
  }
  double operator()(const Eigen::VectorXd& x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < freq.size(); ++k) s += amp[k] * std::sin(freq[k].dot(x) + phase[k]);
    return s;
  }
};

struct OracleCase {
  PriorSpec prior;
  BoundaryConfig boundaries = BoundaryConfig::none();
  TrainingSet training{1};
  Eigen::VectorXd x, x2;
  std::shared_ptr<RandomField> field;
};

inline Eigen::VectorXd uniform_point(std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(static_cast<Eigen::Index>(d));
  for (auto& v : x) v = u(rng);
  return x;
}

/// kind: 0 single, 1 perpendicular, 2 parallel. n training runs in [0,1]^d.
inline OracleCase random_case(int kind, std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim_pick(2, 4);
  std::uniform_real_distribution<double> theta(0.2, 2.0), beta(-1.0, 1.0), s2(0.5, 2.0),
      u(0.0, 1.0);
  const auto d = static_cast<std::size_t>(dim_pick(rng));
  OracleCase c;
  std::vector<double> thetas(d);
  for (auto& t : thetas) t = theta(rng);
  c.prior.beta = beta(rng);
  c.prior.sigma2 = s2(rng);
  c.prior.kernel = KernelSpec::gaussian(thetas);
  c.field = std::make_shared<RandomField>(d, rng);
  auto field = c.field;
  auto eval = [field](const Eigen::VectorXd& x) { return (*field)(x); };

  std::uniform_int_distribution<std::size_t> axis_pick(0, d - 1);
  const std::size_t ax = axis_pick(rng);
  auto location = [&] {
    const double r = u(rng);
    return r < 0.4 ? 0.0 : (r < 0.6 ? 1.0 : u(rng));
  };
  if (kind == 0) {
    c.boundaries = BoundaryConfig::single(AxisBoundary(ax, location(), eval, "K"));
  } else if (kind == 1) {
    std::size_t ax2 = axis_pick(rng);
    while (ax2 == ax) ax2 = axis_pick(rng);
    c.boundaries = BoundaryConfig::perpendicular(AxisBoundary(ax, location(), eval, "K"),
                                                 AxisBoundary(ax2, location(), eval, "L"));
  } else {
    // Slab [lo, hi] on one axis; every point is drawn inside it.
    const double lo = u(rng) < 0.5 ? 0.0 : -0.5 * u(rng);
    const double hi = u(rng) < 0.5 ? 1.0 : 1.0 + 0.5 * u(rng);
    const bool flip = u(rng) < 0.5;
    c.boundaries = BoundaryConfig::parallel(AxisBoundary(ax, flip ? hi : lo, eval, "K"),
                                            AxisBoundary(ax, flip ? lo : hi, eval, "L"));
  }

  auto inside = [&] {
    while (true) {
      Eigen::VectorXd x = uniform_point(d, rng);
      bool ok = true;
      for (const auto& b : c.boundaries.boundaries()) ok = ok && std::abs(b.offset(x)) > 1e-6;
      if (ok) return x;
    }
  };
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::VectorXd vals(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd x = inside();
    pts.row(static_cast<Eigen::Index>(i)) = x.transpose();
    vals[static_cast<Eigen::Index>(i)] = (*field)(x);
  }
  c.training = TrainingSet(pts, vals);
  c.x = inside();
  c.x2 = inside();
  return c;
}

struct OracleComparison {
  double mean_err;  // relative errors, in the sense used by the criterion
  double var_err;
  double cov_err;
  double worst() const { return std::max({mean_err, var_err, cov_err}); }
};

/// |analytic - direct| / max(|direct|, scale), scale sigma^2 for second-order
/// quantities and max(|beta|, sigma) for the mean. The direct update gives
/// the training rows (listed first in the augmented set) the same nugget the
/// emulator ended up using, and the boundary rows none.
inline OracleComparison compare_with_oracle(const OracleCase& c, double jitter = kDefaultJitter) {
  const AdjustedEmulator em(c.prior, c.boundaries, c.training, jitter);
  const std::vector<Eigen::VectorXd> queries{c.x, c.x2};
  const AugmentedSet aug = blackbox_augmented_points(c.training, queries, c.boundaries);
  const BruteForceResult bf = brute_force_update(aug.points, aug.values, c.prior, c.x, c.x2,
                                                 em.jitter(), c.training.size());
  const double s2 = c.prior.sigma2;
  const double ms = std::max(std::abs(c.prior.beta), std::sqrt(s2));
  auto rel = [](double a, double b, double scale) {
    return std::abs(a - b) / std::max(std::abs(b), scale);
  };
  return {rel(em.mean(c.x), bf.mean, ms), rel(em.variance(c.x), bf.variance, s2),
          rel(em.covariance(c.x, c.x2), bf.covariance, s2)};
}

}  // namespace kbemu::oracle

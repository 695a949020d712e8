#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "kbemu/design.hpp"
#include "kbemu/errors.hpp"
#include "kbemu/models.hpp"

using namespace kbemu;

namespace {

PriorSpec toy_prior(double theta = 0.4) {
  PriorSpec p;
  p.kernel = KernelSpec::isotropic(theta, 2);
  return p;
}

// Kolmogorov-Smirnov distance of a sample against a CDF.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

// Target CDF on [0,1] for a boundary at 0, by independent trapezoid integration.
struct TrapezoidCdf {
  std::vector<double> cum;
  explicit TrapezoidCdf(std::function<double(double)> density, int steps = 20000) : cum(steps + 1, 0.0) {
    for (int i = 0; i < steps; ++i) {
      const double a = double(i) / steps, b = double(i + 1) / steps;
      cum[i + 1] = cum[i] + 0.5 * (density(a) + density(b)) / steps;
    }
    for (auto& c : cum) c /= cum.back();
  }
  double operator()(double x) const {
    const double s = std::clamp(x, 0.0, 1.0) * (cum.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(s), cum.size() - 2);
    return cum[i] + (s - i) * (cum[i + 1] - cum[i]);
  }
};

}  // namespace

TEST(LatinHypercube, OnePointPerStratum) {
  const Design d = latin_hypercube(37, 4, 99);
  ASSERT_EQ(d.size(), 37);
  for (Eigen::Index j = 0; j < 4; ++j) {
    std::vector<int> hits(37, 0);
    for (Eigen::Index i = 0; i < 37; ++i) {
      const int s = static_cast<int>(std::floor(d.points(i, j) * 37));
      ASSERT_GE(s, 0);
      ASSERT_LT(s, 37);
      ++hits[s];
    }
    for (int h : hits) EXPECT_EQ(h, 1);
  }
  EXPECT_EQ(d.provenance, DesignMethod::kLhc);
}

TEST(LatinHypercube, DeterministicAndSeedSensitive) {
  EXPECT_EQ(latin_hypercube(10, 3, 5).points, latin_hypercube(10, 3, 5).points);
  EXPECT_NE(latin_hypercube(10, 3, 5).points, latin_hypercube(10, 3, 6).points);
  const Design one = latin_hypercube(1, 3, 1);
  EXPECT_TRUE(Box::unit(3).contains(one.points.row(0).transpose()));
  EXPECT_THROW(latin_hypercube(0, 3, 1), InvalidParameter);
}

TEST(Maximin, SingleCandidateIsPlainLhc) {
  EXPECT_EQ(maximin_lhc(12, 3, 7, 1).points, latin_hypercube(12, 3, 7).points);
}

TEST(Maximin, WinnerBeatsEveryCandidate) {
  const std::size_t nc = 50;
  const Design best = maximin_lhc(2, 1, 3, nc);
  const double dbest = min_pairwise_distance(best.points);
  for (std::size_t c = 0; c < nc; ++c) {
    const Design cand = latin_hypercube(2, 1, c == 0 ? 3 : derive_seed(3, c));
    EXPECT_GE(dbest, min_pairwise_distance(cand.points));
  }
  EXPECT_GT(dbest, 0.5);
}

TEST(Maximin, BetterThanMostRandomHypercubes) {
  const Design best = maximin_lhc(60, 6, 1, 10000);
  const double dbest = min_pairwise_distance(best.points);
  int beaten = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    if (min_pairwise_distance(latin_hypercube(60, 6, derive_seed(777, t)).points) <= dbest) ++beaten;
  }
  EXPECT_GE(beaten, static_cast<int>(0.99 * trials));
}

TEST(Sobol, PoolInBoxAndDeterministic) {
  const Box box = Box::symmetric(3);
  const Eigen::MatrixXd a = sobol_pool(256, box, 4);
  EXPECT_EQ(a, sobol_pool(256, box, 4));
  for (Eigen::Index i = 0; i < a.rows(); ++i) EXPECT_TRUE(box.contains(a.row(i).transpose()));
}

TEST(Warp, EndpointsAndRoundTrip) {
  const auto b = BoundaryConfig::single(models::toy_boundary_k());
  const auto warps = boundary_warps(b, KernelSpec::isotropic(0.4, 2), Box::unit(2));
  ASSERT_EQ(warps.size(), 1u);
  const AxisWarp& w = warps[0].second;
  EXPECT_EQ(w.warp(0.0), 0.0);
  EXPECT_EQ(w.warp(1.0), 1.0);
  for (int i = 0; i <= 1000; ++i) {
    const double u = i / 1000.0;
    EXPECT_NEAR(w.cdf(w.warp(u)), u, 1e-9);
    EXPECT_NEAR(w.warp(w.cdf(u)), u, 1e-9);
  }
}

TEST(Warp, QuadraturePathMatchesClosedForm) {
  const auto b = BoundaryConfig::single(models::toy_boundary_k());
  const KernelSpec k = KernelSpec::isotropic(0.3, 2);
  const auto exact = boundary_warps(b, k, Box::unit(2), false);
  const auto quad = boundary_warps(b, k, Box::unit(2), true);
  for (int i = 0; i <= 100; ++i) {
    EXPECT_NEAR(exact[0].second.cdf(i / 100.0), quad[0].second.cdf(i / 100.0), 1e-10);
  }
}

TEST(Warp, MarginalMatchesTargetDensity) {
  const double theta = 0.4;
  const auto b = BoundaryConfig::perpendicular(models::toy_boundary_k(), models::toy_boundary_l());
  const Design base = latin_hypercube(10000, 2, 8);
  const Design w = warp_design(base, b, KernelSpec::isotropic(theta, 2));
  const TrapezoidCdf target([&](double a) {
    const double r = std::exp(-a * a / (theta * theta));
    return 1.0 - r * r;
  });
  for (Eigen::Index j = 0; j < 2; ++j) {
    std::vector<double> xs(w.points.col(j).begin(), w.points.col(j).end());
    EXPECT_LT(ks_distance(xs, target), 0.05);
  }
}

TEST(Warp, ParallelMarginalMatchesTwoBoundaryProfile) {
  const double theta = 0.3;
  const auto b = BoundaryConfig::parallel(models::toy_boundary_k(), models::toy_boundary_k_far());
  const PriorSpec p = toy_prior(theta);
  const BoundaryAdjustment adj(p, without_values(b));
  const Design w = warp_design(latin_hypercube(10000, 2, 9), b, p.kernel);
  const TrapezoidCdf target([&](double a) {
    Eigen::VectorXd x(2);
    x << a, 0.5;
    return adj.variance(x);
  });
  std::vector<double> xs(w.points.col(0).begin(), w.points.col(0).end());
  EXPECT_LT(ks_distance(xs, target), 0.05);
  std::vector<double> ys(w.points.col(1).begin(), w.points.col(1).end());
  EXPECT_LT(ks_distance(ys, [](double y) { return y; }), 0.05);
}

TEST(Warp, ShiftsAwayFromBoundariesAndKeepsOtherAxes) {
  const auto b = BoundaryConfig::single(models::toy_boundary_l());
  const Design base = maximin_lhc(20, 2, 3, 100);
  const Design w = warp_design(base, b, KernelSpec::isotropic(0.4, 2));
  EXPECT_EQ(w.points.col(0), base.points.col(0));
  for (Eigen::Index i = 0; i < 20; ++i) EXPECT_GE(w.points(i, 1), base.points(i, 1));
  // far boundary at x1 = 1 pushes points the other way
  const Design w2 = warp_design(base, BoundaryConfig::single(models::toy_boundary_k_far()),
                                KernelSpec::isotropic(0.4, 2));
  for (Eigen::Index i = 0; i < 20; ++i) EXPECT_LE(w2.points(i, 0), base.points(i, 0));
  EXPECT_EQ(warp_design(base, BoundaryConfig::none(), KernelSpec::isotropic(0.4, 2)).points,
            base.points);
}

TEST(Warp, ScaledInverseRuleIsMonotoneWithFixedEnds) {
  const auto b = BoundaryConfig::single(models::toy_boundary_k());
  Design d = latin_hypercube(50, 2, 2);
  d.points(0, 0) = 0.0;
  d.points(1, 0) = 1.0;
  const Design w = warp_design(d, b, KernelSpec::isotropic(0.4, 2), WarpRule::kScaledInverse);
  EXPECT_EQ(w.points(0, 0), 0.0);
  EXPECT_NEAR(w.points(1, 0), 1.0, 1e-12);
  for (Eigen::Index i = 0; i < 50; ++i) {
    for (Eigen::Index k = 0; k < 50; ++k) {
      if (d.points(i, 0) < d.points(k, 0)) EXPECT_LE(w.points(i, 0), w.points(k, 0));
    }
  }
}

TEST(Criterion, EmptyDesignAndFullGrid) {
  const PriorSpec p = toy_prior();
  const CriterionGrid g = CriterionGrid::tensor(Box::unit(2), 10);
  EXPECT_NEAR(v_criterion(Eigen::MatrixXd(0, 2), g, p, BoundaryConfig::none()), 100.0, 1e-12);
  EXPECT_NEAR(v_criterion(g.points, g, p, BoundaryConfig::none()), 0.0, 1e-6);
}

TEST(Criterion, TraceIdentityMatchesDirectSum) {
  const PriorSpec p = toy_prior();
  const CriterionGrid g = CriterionGrid::tensor(Box::unit(2), 30);
  const auto perp = BoundaryConfig::perpendicular(models::toy_boundary_k(), models::toy_boundary_l());
  const Design d = maximin_lhc(10, 2, 5, 100);
  for (const auto& b : {BoundaryConfig::none(), perp}) {
    const double a = v_criterion(d.points, g, p, b);
    const double direct = v_criterion_direct(d.points, g, p, b);
    EXPECT_NEAR(a, direct, 1e-9 * direct);
  }
}

TEST(Criterion, AddingAPointNeverIncreases) {
  const PriorSpec p = toy_prior();
  const CriterionGrid g = CriterionGrid::tensor(Box::unit(2), 15);
  const auto b = BoundaryConfig::single(models::toy_boundary_k());
  const Design d = latin_hypercube(12, 2, 1);
  double prev = v_criterion(Eigen::MatrixXd(0, 2), g, p, b);
  for (Eigen::Index n = 1; n <= 12; ++n) {
    const double v = v_criterion(d.points.topRows(n), g, p, b);
    EXPECT_LE(v, prev + 1e-10);
    prev = v;
  }
}

TEST(CriterionGrid, DefaultResolution) {
  EXPECT_EQ(CriterionGrid::default_resolution(2), 30u);
  EXPECT_EQ(CriterionGrid::default_resolution(6), 6u);
  EXPECT_EQ(CriterionGrid::tensor(Box::unit(3), 4).points.rows(), 64);
}

TEST(Greedy, FirstPointIsCentralWithoutBoundaries) {
  const PriorSpec p = toy_prior();
  const CriterionGrid g = CriterionGrid::tensor(Box::unit(2), 21);
  const Eigen::MatrixXd pool = CriterionGrid::tensor(Box::unit(2), 11).points;
  const Design d = greedy_v_optimal(1, g, pool, p, BoundaryConfig::none(), Box::unit(2), 0);
  EXPECT_NEAR(d.points(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(d.points(0, 1), 0.5, 1e-12);
}

TEST(Greedy, BoundaryPushesFirstPointAway) {
  const PriorSpec p = toy_prior();
  const CriterionGrid g = CriterionGrid::tensor(Box::unit(2), 30);
  const Eigen::MatrixXd pool = sobol_pool(1024, Box::unit(2), 1);
  const auto b = BoundaryConfig::single(models::toy_boundary_k());
  const Design with = greedy_v_optimal(1, g, pool, p, b, Box::unit(2), 1);
  const Design without = greedy_v_optimal(1, g, pool, p, BoundaryConfig::none(), Box::unit(2), 1);
  EXPECT_GT(with.points(0, 0), without.points(0, 0));
}

TEST(Greedy, DeterministicAndBeatsMaximinUnderBoundaries) {
  const PriorSpec p = toy_prior();
  const CriterionGrid g = CriterionGrid::tensor(Box::unit(2), 30);
  const Eigen::MatrixXd pool = sobol_pool(2048, Box::unit(2), 2);
  const auto b = BoundaryConfig::perpendicular(models::toy_boundary_k(), models::toy_boundary_l());
  const Design a = greedy_v_optimal(10, g, pool, p, b, Box::unit(2), 2);
  EXPECT_EQ(a.points, greedy_v_optimal(10, g, pool, p, b, Box::unit(2), 2).points);
  const Design lhc = maximin_lhc(10, 2, 2, 1000);
  EXPECT_LE(v_criterion(a.points, g, p, b), v_criterion(lhc.points, g, p, b));
  EXPECT_THROW(greedy_v_optimal(3000, g, pool, p, b, Box::unit(2), 2), InvalidParameter);
}

TEST(Greedy, RefinementDoesNotWorsenCriterion) {
  const PriorSpec p = toy_prior();
  const CriterionGrid g = CriterionGrid::tensor(Box::unit(2), 20);
  const Eigen::MatrixXd pool = sobol_pool(256, Box::unit(2), 3);
  const auto b = BoundaryConfig::single(models::toy_boundary_k());
  GreedyOptions opts;
  const Design plain = greedy_v_optimal(5, g, pool, p, b, Box::unit(2), 3, opts);
  opts.refine_sweeps = 3;
  const Design refined = greedy_v_optimal(5, g, pool, p, b, Box::unit(2), 3, opts);
  EXPECT_LE(v_criterion(refined.points, g, p, b), v_criterion(plain.points, g, p, b) + 1e-12);
}

TEST(DesignMethod, NamesRoundTrip) {
  for (auto m : {DesignMethod::kLhc, DesignMethod::kMaximinLhc, DesignMethod::kWarpedLhc,
                 DesignMethod::kGreedyVOpt, DesignMethod::kWarpedGreedyVOpt}) {
    EXPECT_EQ(design_method_from_string(to_string(m)), m);
  }
  EXPECT_THROW(design_method_from_string("sobol"), ConfigError);
}

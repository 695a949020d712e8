#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "kbemu/errors.hpp"
#include "kbemu/kernel.hpp"

using namespace kbemu;

namespace {

// Reference values computed with 30-digit arithmetic (mpmath).
constexpr double kExpM025 = 0.778800783071404868245170266978;
constexpr double kExpM05 = 0.606530659712633423603799534991;
constexpr double kR_02_03_04 = 0.495665752732395914272470474623;
constexpr double kRatio_05_1_04 = 0.209207521625645646955060592755;
constexpr double kWarp_05_04 = 0.252450237073217186427301776752;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x[i++] = e;
  return x;
}

}  // namespace

TEST(Corr1d, Examples) {
  EXPECT_EQ(corr_1d(0.0, 0.4), 1.0);
  EXPECT_NEAR(corr_1d(0.4, 0.4), std::exp(-1.0), 1e-16);
  EXPECT_NEAR(corr_1d(0.2, 0.4), kExpM025, 1e-15);
  EXPECT_EQ(corr_1d(0.3, 0.7), corr_1d(-0.3, 0.7));
  EXPECT_LT(corr_1d(1e-3, 0.4), 1.0);
}

TEST(Corr1d, RejectsBadTheta) {
  EXPECT_THROW(corr_1d(0.1, 0.0), InvalidParameter);
  EXPECT_THROW(corr_1d(0.1, -1.0), InvalidParameter);
  EXPECT_THROW(corr_1d(0.1, std::numeric_limits<double>::quiet_NaN()), InvalidParameter);
  EXPECT_THROW(corr_1d(0.1, std::numeric_limits<double>::infinity()), InvalidParameter);
}

TEST(CorrProduct, Examples) {
  const KernelSpec k = KernelSpec::isotropic(0.4, 2);
  EXPECT_EQ(corr_product(vec({0.3, 0.9}), vec({0.3, 0.9}), k), 1.0);
  EXPECT_NEAR(corr_product(vec({0, 0}), vec({0.2, 0}), k), kExpM025, 1e-15);
  EXPECT_NEAR(corr_product(vec({0, 0}), vec({0.2, 0.2}), k), kExpM05, 1e-15);
  EXPECT_NEAR(corr_product(vec({0, 0}), vec({0.2, 0.2}), k),
              corr_1d(0.2, 0.4) * corr_1d(0.2, 0.4), 1e-15);
}

TEST(CorrProduct, ShapeMismatch) {
  const KernelSpec k = KernelSpec::isotropic(0.4, 2);
  EXPECT_THROW(corr_product(vec({0, 0, 0}), vec({0, 0, 0}), k), ShapeError);
  EXPECT_THROW(corr_product(vec({0, 0}), vec({0}), k), ShapeError);
}

TEST(KernelSpec, Validate) {
  EXPECT_THROW(KernelSpec::gaussian({0.4, 0.0}).validate(), InvalidParameter);
  EXPECT_THROW(KernelSpec::gaussian({}).validate(), InvalidParameter);
  EXPECT_NO_THROW(KernelSpec::gaussian({0.4, 2.0}).validate());
}

TEST(UpdatedCorr, Examples) {
  EXPECT_EQ(updated_corr_component(0.0, 0.37, 0.4), 0.0);
  const double r = corr_1d(0.3, 0.4);
  EXPECT_NEAR(updated_corr_component(0.3, 0.3, 0.4), 1.0 - r * r, 1e-15);
  EXPECT_NEAR(updated_corr_component(0.2, 0.3, 0.4), kR_02_03_04, 1e-15);
  EXPECT_EQ(updated_corr_component(0.2, 0.3, 0.4), updated_corr_component(0.3, 0.2, 0.4));
}

TEST(RatioCorr, Examples) {
  EXPECT_NEAR(ratio_corr_component(1.0, 1.0, 0.4), 1.0, 1e-15);
  EXPECT_EQ(ratio_corr_component(0.0, 1.0, 0.4), 0.0);
  EXPECT_NEAR(ratio_corr_component(0.5, 1.0, 0.4), kRatio_05_1_04, 1e-14);
  EXPECT_THROW(ratio_corr_component(0.5, 0.0, 0.4), DegenerateConfiguration);
}

TEST(WarpIntegral, Examples) {
  EXPECT_EQ(warp_integral(0.0, 0.4), 0.0);
  EXPECT_NEAR(warp_integral(0.5, 0.4), kWarp_05_04, 1e-15);
  const double theta = 0.4;
  EXPECT_NEAR(warp_integral(20 * theta, theta), 20 * theta - theta * std::sqrt(M_PI / 8), 1e-14);
  EXPECT_THROW(warp_integral(-0.1, 0.4), DomainError);
  EXPECT_THROW(warp_integral_quadrature(-0.1, 0.4), DomainError);
}

TEST(WarpIntegral, QuadratureAgreesWithClosedForm) {
  for (double theta : {0.1, 0.4, 1.3, 5.0}) {
    for (int i = 0; i <= 100; ++i) {
      const double a = 3.0 * i / 100.0;
      EXPECT_NEAR(warp_integral_quadrature(a, theta), warp_integral(a, theta), 1e-10)
          << "a=" << a << " theta=" << theta;
    }
  }
  EXPECT_NEAR(warp_integral_quadrature(0.5, 0.4), kWarp_05_04, 1e-12);
}

TEST(WarpIntegral, IncreasingWithDerivativeOneMinusR2) {
  const double theta = 0.4, h = 1e-5;
  double prev = warp_integral(0.0, theta);
  for (int i = 1; i <= 200; ++i) {
    const double a = 0.01 * i;
    const double v = warp_integral(a, theta);
    EXPECT_GT(v, prev);
    prev = v;
    const double fd = (warp_integral(a + h, theta) - warp_integral(a - h, theta)) / (2 * h);
    const double r = corr_1d(a, theta);
    EXPECT_NEAR(fd, 1.0 - r * r, 1e-6);
  }
}

TEST(KernelProperties, ProductSymmetricAndPsd) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0), t(0.1, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 4;
    std::vector<double> thetas(d);
    for (auto& th : thetas) th = t(rng);
    const KernelSpec k = KernelSpec::gaussian(thetas);
    const int m = 20;
    Eigen::MatrixXd pts(m, d);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j) pts(i, j) = u(rng);
    Eigen::MatrixXd g(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        g(i, j) = corr_product(pts.row(i).transpose(), pts.row(j).transpose(), k);
      }
    }
    EXPECT_EQ((g - g.transpose()).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff());
  }
}

TEST(KernelProperties, UpdatedComponentPsd) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (double theta : {0.2, 0.4, 1.0}) {
    const int m = 20;
    std::vector<double> a(m);
    for (auto& v : a) v = u(rng);
    Eigen::MatrixXd g(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) g(i, j) = updated_corr_component(a[i], a[j], theta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff());
  }
}

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "kbemu/errors.hpp"
#include "kbemu/models.hpp"
#include "kbemu/ode.hpp"

using namespace kbemu;
using namespace kbemu::models;

namespace {

constexpr double kToyQuarter = -1.34441508912858079;  // toy_f(0.25, 0.25), mpmath
constexpr double kExpM1 = 0.367879441171442321595523770161;

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd x(2);
  x << a, b;
  return x;
}

ArabidopsisSpec random_spec(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> rate(0.05, 2.0), init(0.0, 1.0);
  ArabidopsisSpec s;
  for (auto& r : s.rates) r = rate(rng);
  for (auto& c : s.initial_state) c = init(rng);
  s.t_end = 2.0;
  return s;
}

}  // namespace

TEST(Toy, Examples) {
  EXPECT_NEAR(toy_f(vec2(0.0, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(toy_f(vec2(0.25, 0.25)), kToyQuarter, 1e-14);
  EXPECT_NEAR(toy_f(vec2(0.0, 0.25)), -1.9, 1e-15);
  EXPECT_THROW(toy_f(vec2(1.1, 0.5)), DomainError);
  EXPECT_THROW(toy_f(Eigen::VectorXd::Zero(3)), ShapeError);
}

TEST(Toy, BoundariesMatchTheSimulator) {
  const AxisBoundary k = toy_boundary_k(), l = toy_boundary_l(), k1 = toy_boundary_k_far();
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    EXPECT_NEAR(k.evaluate(vec2(0.0, t)), toy_f(vec2(0.0, t)), 1e-15);
    EXPECT_NEAR(l.evaluate(vec2(t, 0.0)), toy_f(vec2(t, 0.0)), 1e-15);
    EXPECT_NEAR(k1.evaluate(vec2(1.0, t)), toy_f(vec2(1.0, t)), 1e-15);
  }
  EXPECT_THROW(k.evaluate(vec2(0.5, 0.5)), MisuseError);
}

TEST(Dopri5, ExponentialDecay) {
  OdeStats stats;
  const auto y = integrate_dopri5(
      [](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; }, 0.0, 1.0,
      {1.0}, {}, &stats);
  EXPECT_NEAR(y[0], kExpM1, 1e-9);
  EXPECT_GT(stats.accepted, 0u);
}

TEST(Dopri5, HarmonicOscillator) {
  const auto y = integrate_dopri5(
      [](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
      },
      0.0, 2.0, {1.0, 0.0});
  EXPECT_NEAR(y[0], std::cos(2.0), 1e-8);
  EXPECT_NEAR(y[1], -std::sin(2.0), 1e-8);
}

TEST(Dopri5, BlowUpIsReported) {
  auto rhs = [](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0] * y[0]; };
  EXPECT_THROW(integrate_dopri5(rhs, 0.0, 2.0, {1.0}), StiffnessError);
  OdeOptions tight;
  tight.max_steps = 3;
  EXPECT_THROW(integrate_dopri5(rhs, 0.0, 0.9, {1.0}, tight), StiffnessError);
}

TEST(Arabidopsis, Names) {
  EXPECT_EQ(kRateNames[k6a], "k6a");
  EXPECT_EQ(kSpeciesNames[kPLSp], "PLSp");
  EXPECT_EQ(rate_from_name("k1_v23"), k1_v23);
  EXPECT_EQ(species_from_name("Ra*"), kRaStar);
  EXPECT_FALSE(rate_from_name("k99").has_value());
  EXPECT_EQ(kVariedRates[kAxisK6], k6);
  EXPECT_EQ(kVariedRates[kAxisK8], k8);
}

TEST(Arabidopsis, ZeroStateAuxinProduction) {
  Rates rates{};
  rates[k1a] = 0.3;
  rates[k2] = 0.5;
  const State d = arabidopsis_rhs(State{}, rates);
  EXPECT_NEAR(d[kAuxin], 0.8, 1e-15);
  rates[k1] = 1.7;  // inhibition by X vanishes at X = 0
  EXPECT_NEAR(arabidopsis_rhs(State{}, rates)[kAuxin], 0.8, 1e-15);
  for (std::size_t s = 1; s < kNumSpecies; ++s) EXPECT_EQ(d[s], 0.0) << kSpeciesNames[s];
}

TEST(Arabidopsis, ConservedPairs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    State s;
    Rates r;
    for (auto& v : s) v = u(rng);
    for (auto& v : r) v = u(rng);
    const State d = arabidopsis_rhs(s, r);
    EXPECT_NEAR(d[kRa] + d[kRaStar], 0.0, 1e-12);
    EXPECT_NEAR(d[kRe] + d[kReStar], 0.0, 1e-12);
    EXPECT_NEAR(d[kCTR1] + d[kCTR1Star], 0.0, 1e-12);
    EXPECT_EQ(d[kIAA], 0.0);
    EXPECT_EQ(d[kCytokinin], 0.0);
    EXPECT_EQ(d[kACC], 0.0);
  }
}

TEST(Arabidopsis, ConservedAlongTrajectory) {
  std::mt19937_64 rng(8);
  const ArabidopsisSpec s = random_spec(rng);
  const State y = integrate(s);
  EXPECT_NEAR(y[kRa] + y[kRaStar], s.initial(kRa) + s.initial(kRaStar), 1e-8);
  EXPECT_NEAR(y[kRe] + y[kReStar], s.initial(kRe) + s.initial(kReStar), 1e-8);
  EXPECT_NEAR(y[kCTR1] + y[kCTR1Star], s.initial(kCTR1) + s.initial(kCTR1Star), 1e-8);
}

TEST(Arabidopsis, ZeroRatesLeaveStateUnchanged) {
  ArabidopsisSpec s;
  for (std::size_t i = 0; i < kNumSpecies; ++i) s.initial_state[i] = 0.1 * (i + 1);
  const State y = integrate(s);
  for (std::size_t i = 0; i < kNumSpecies; ++i) EXPECT_EQ(y[i], s.initial_state[i]);
}

TEST(Arabidopsis, SelfConvergence) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const ArabidopsisSpec s = random_spec(rng);
    OdeOptions loose, tight;
    tight.rtol = loose.rtol / 2;
    tight.atol = loose.atol / 2;
    const double a = integrate(s, loose)[kPLSp], b = integrate(s, tight)[kPLSp];
    EXPECT_LT(std::abs(a - b), 1e-6 * std::max(1.0, std::abs(b)));
  }
}

TEST(Arabidopsis, SpecValidation) {
  ArabidopsisSpec s;
  EXPECT_NO_THROW(s.validate());
  s.rate(k4) = -1.0;
  EXPECT_THROW(s.validate(), InvalidParameter);
  s.rate(k4) = 0.0;
  s.t_end = 0.0;
  EXPECT_THROW(s.validate(), InvalidParameter);
}

TEST(ArabidopsisBoundary, ClosedFormExamples) {
  ArabidopsisSpec s;
  s.initial(kPLSp) = 1.0;
  s.rate(k9) = 0.5;
  s.t_end = 2.0;
  EXPECT_NEAR(plsp_boundary_k8(s), kExpM1, 1e-15);

  s.rate(k7) = 0.5;
  s.rate(k8) = 1.0;
  s.initial(kPLSm) = 1.0;
  // equal decay rates: e^-1 + k8 PLSm0 t e^-1
  EXPECT_NEAR(plsp_boundary_k6(s), 3.0 * kExpM1, 1e-14);
  s.initial(kPLSp) = 0.0;
  EXPECT_NEAR(plsp_boundary_k6(s), 2.0 * kExpM1, 1e-14);

  EXPECT_THROW(plsp_boundary_k8(s), MisuseError);
  s.rate(k6) = 0.1;
  EXPECT_THROW(plsp_boundary_k6(s), MisuseError);
}

TEST(ArabidopsisBoundary, NearEqualRatesAreContinuous) {
  ArabidopsisSpec s;
  s.initial(kPLSp) = 0.4;
  s.initial(kPLSm) = 0.7;
  s.rate(k8) = 1.3;
  s.rate(k9) = 0.5;
  s.rate(k7) = 0.5;
  const double at = plsp_boundary_k6(s);
  s.rate(k7) = 0.5 + 1e-7;
  EXPECT_NEAR(plsp_boundary_k6(s), at, 1e-7);
  s.rate(k7) = 0.5 + 1e-10;
  EXPECT_NEAR(plsp_boundary_k6(s), at, 1e-9);
}

TEST(ArabidopsisBoundary, AgreesWithIntegration) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    ArabidopsisSpec s = random_spec(rng);
    s.rate(k8) = 0.0;
    EXPECT_NEAR(plsp_boundary_k8(s), integrate(s)[kPLSp], 1e-6);
    s = random_spec(rng);
    s.rate(k6) = 0.0;
    EXPECT_NEAR(plsp_boundary_k6(s), integrate(s)[kPLSp], 1e-6);
  }
}

TEST(InputTransform, Examples) {
  const auto t = input_transform({0.0, 0.0, 20.0, 10.0, 2.5, 0.25});
  EXPECT_EQ(t[0], -1.0);
  EXPECT_EQ(t[kAxisK6], -1.0);
  EXPECT_EQ(t[2], 1.0);
  EXPECT_EQ(t[3], 1.0);
  EXPECT_NEAR(t[kAxisK8], 0.0, 1e-15);
  EXPECT_NEAR(t[5], 0.0, 1e-15);
  EXPECT_THROW(input_transform({11.0, 0, 0, 0, 0, 0}), DomainError);
  EXPECT_THROW(input_transform_inverse(Eigen::VectorXd::Constant(6, 1.5)), DomainError);
  EXPECT_THROW(input_transform_inverse(Eigen::VectorXd::Zero(5)), ShapeError);
  EXPECT_EQ(input_transform_inverse(Eigen::VectorXd::Constant(6, -1.0))[kAxisK6], 0.0);
}

TEST(InputTransform, RoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd s(6);
    for (auto& v : s) v = u(rng);
    const Eigen::VectorXd back = input_transform(input_transform_inverse(s));
    EXPECT_LT((back - s).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ArabidopsisModel, BoundariesMatchModel) {
  ArabidopsisSpec base;
  std::mt19937_64 rng(17);
  base = random_spec(rng);
  const ArabidopsisModel model(base);
  const AxisBoundary b6 = model.boundary_k6(), b8 = model.boundary_k8();
  EXPECT_EQ(b6.axis(), kAxisK6);
  EXPECT_EQ(b8.axis(), kAxisK8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd x(6);
    for (auto& v : x) v = u(rng);
    x[kAxisK6] = -1.0;
    EXPECT_NEAR(b6.evaluate(x), model(x), 1e-6);
    for (auto& v : x) v = u(rng);
    x[kAxisK8] = -1.0;
    EXPECT_NEAR(b8.evaluate(x), model(x), 1e-6);
  }
  EXPECT_THROW(b6.evaluate(Eigen::VectorXd::Zero(6)), MisuseError);
}

TEST(Registry, Builtin) {
  const EvaluatorRegistry plain = EvaluatorRegistry::builtin();
  EXPECT_TRUE(plain.contains("toy2d.K"));
  EXPECT_FALSE(plain.contains("arabidopsis.k6"));
  EXPECT_THROW(plain.boundary("nope"), ConfigError);
  EXPECT_THROW(plain.boundary("toy2d.K", 1, 0.0), ConfigError);
  const AxisBoundary k = plain.boundary("toy2d.K", 0, 0.0);
  EXPECT_NEAR(k.evaluate(vec2(0.0, 0.25)), -1.9, 1e-15);

  const ArabidopsisModel model(ArabidopsisSpec{});
  const EvaluatorRegistry full = EvaluatorRegistry::builtin(&model);
  EXPECT_TRUE(full.contains("arabidopsis.k8"));
  EXPECT_EQ(full.boundary("arabidopsis.k8").axis(), kAxisK8);
}

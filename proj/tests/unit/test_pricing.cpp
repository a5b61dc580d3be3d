#include <gtest/gtest.h>

#include <cmath>

#include "klasian/pricing.hpp"
#include "klasian/random.hpp"

using namespace klasian;

TEST(Payoff, Examples) {
  auto spec = AsianPayoffSpec::uniform(95.0, 3);
  EXPECT_NEAR(asian_payoff(Eigen::Vector3d(90.0, 100.0, 110.0), spec), 5.0, 1e-12);
  spec.strike = 100.0;
  EXPECT_EQ(asian_payoff(Eigen::Vector3d(100.0, 100.0, 100.0), spec), 0.0);
  spec.strike = 0.0;
  EXPECT_NEAR(asian_payoff(Eigen::Vector3d(1.0, 2.0, 6.0), spec), 3.0, 1e-12);
  EXPECT_THROW(asian_payoff(Eigen::Vector2d(1.0, 2.0), spec), std::invalid_argument);
}

TEST(Payoff, SpecValidation) {
  auto spec = AsianPayoffSpec::uniform(100.0, 4);
  spec.weights(0) = 0.5;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  EXPECT_THROW(AsianPayoffSpec::uniform(100.0, 0), std::invalid_argument);
}

TEST(Payoff, LipschitzInWeights) {
  RandomStream s(1, 0);
  auto spec = AsianPayoffSpec::uniform(100.0, 8);
  for (int i = 0; i < 8; ++i) spec.weights(i) = (i + 1) / 36.0;
  for (int trial = 0; trial < 10000; ++trial) {
    Eigen::VectorXd x(8), y(8);
    for (int i = 0; i < 8; ++i) {
      x(i) = 80.0 + 40.0 * s.uniform();
      y(i) = 80.0 + 40.0 * s.uniform();
    }
    ASSERT_LE(std::abs(asian_payoff(x, spec) - asian_payoff(y, spec)),
              spec.weights.dot((x - y).cwiseAbs()) + 1e-12);
  }
}

TEST(Baseline, EuropeanMean) {
  const GbmParams p{100.0, 0.05, 0.2};
  const auto e = price_baseline(p, AsianPayoffSpec::uniform(0.0, 1), 200000, 3);
  EXPECT_NEAR(e.value, 100.0 * std::exp(0.05), 3.0 * e.std_error);
  EXPECT_EQ(e.n_outer, 200000u);
  EXPECT_EQ(e.n_inner, 1u);
  EXPECT_EQ(e.method, Method::baseline);
}

TEST(Baseline, DegenerateDiffusion) {
  const GbmParams p{100.0, 0.05, 1e-12};
  const auto e = price_baseline(p, AsianPayoffSpec::uniform(100.0, 4), 100, 3);
  double expected = 0.0;
  for (int i = 1; i <= 4; ++i) expected += 100.0 * std::exp(0.05 * i / 4.0) / 4.0;
  EXPECT_NEAR(e.value, expected - 100.0, 1e-8);
  EXPECT_LT(e.std_error, 1e-8);
}

TEST(Baseline, WorkerCountInvariant) {
  const GbmParams p{100.0, 0.05, 0.2};
  const auto spec = AsianPayoffSpec::uniform(100.0, 16);
  const auto a = price_baseline(p, spec, 5000, 9, {1, 1.0});
  const auto b = price_baseline(p, spec, 5000, 9, {4, 1.0});
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_THROW(price_baseline(p, spec, 1, 9), std::invalid_argument);
}

TEST(Baseline, DiscountFactor) {
  const GbmParams p{100.0, 0.05, 0.2};
  const auto spec = AsianPayoffSpec::uniform(100.0, 8);
  const auto a = price_baseline(p, spec, 2000, 9, {1, 1.0});
  const auto b = price_baseline(p, spec, 2000, 9, {1, 0.5});
  EXPECT_DOUBLE_EQ(b.value, 0.5 * a.value);
}

TEST(GeometricClosedForm, FrozenValues) {
  const GbmParams p{100.0, 0.05, 0.2};
  EXPECT_NEAR(geometric_asian_closed_form(p, TimeGrid::uniform_monitoring(64), 100.0), 5.908600267254523, 1e-10);
  EXPECT_NEAR(geometric_asian_closed_form(p, TimeGrid::uniform_monitoring(4), 90.0), 14.001959820395802, 1e-10);
}

TEST(GeometricClosedForm, Limits) {
  const GbmParams tiny{100.0, 0.05, 1e-9};
  const auto grid = TimeGrid::uniform_monitoring(4);
  const double drift = tiny.effective_drift();
  EXPECT_NEAR(geometric_asian_closed_form(tiny, grid, 90.0), 100.0 * std::exp(drift * 0.625) - 90.0, 1e-6);
  const GbmParams p{100.0, 0.05, 0.2};
  // K -> 0 leaves E[A_G] = exp(m + v/2).
  double v = 0.0;
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) v += std::min(i, j) / 4.0;
  v *= 0.04 / 16.0;
  const double m = std::log(100.0) + p.effective_drift() * 0.625;
  EXPECT_NEAR(geometric_asian_closed_form(p, grid, 1e-12), std::exp(m + 0.5 * v), 1e-9);
}

TEST(GeometricClosedForm, MatchesMonteCarlo) {
  const GbmParams p{100.0, 0.05, 0.2};
  const auto spec = AsianPayoffSpec::uniform(100.0, 16, AverageKind::geometric);
  const auto mc = price_baseline(p, spec, 400000, 5);
  const double cf = geometric_asian_closed_form(p, TimeGrid::uniform_monitoring(16), 100.0);
  EXPECT_NEAR(mc.value, cf, 3.0 * mc.std_error);
}

TEST(Subsample, GridSize) {
  EXPECT_EQ(subsample_grid_size(0.05), 400);
  EXPECT_EQ(subsample_grid_size(0.1), 100);
  EXPECT_EQ(subsample_grid_size(0.125), 64);
  EXPECT_EQ(subsample_grid_size(0.3), 12);
  EXPECT_THROW(subsample_grid_size(1e-5), std::invalid_argument);
  EXPECT_THROW(subsample_grid_size(0.0), std::invalid_argument);
}

TEST(Subsample, DegenerateRiemannSum) {
  const GbmParams p{100.0, 0.05, 1e-12};
  const auto e = price_subsample(p, AsianPayoffSpec::uniform(0.0, 64), 0.1, 50, 1);
  double riemann = 0.0;
  for (int k = 1; k <= 100; ++k) riemann += 100.0 * std::exp(0.05 * k / 100.0) / 100.0;
  EXPECT_NEAR(e.value, riemann, 1e-8);
  // Against the integral the right-endpoint sum is O(1/M) off.
  EXPECT_NEAR(e.value, 100.0 * (std::exp(0.05) - 1.0) / 0.05, 100.0 * 0.05 * std::exp(0.05) / 100.0);
  EXPECT_EQ(e.grid_points, 100);
}

TEST(Subsample, MatchesBaselineWhenGridRefines) {
  const GbmParams p{100.0, 0.05, 0.2};
  const auto spec = AsianPayoffSpec::uniform(100.0, 16);
  const auto base = price_baseline(p, spec, 200000, 2);
  const auto sub = price_subsample(p, spec, 0.25, 200000, 2);  // M = 16 = T
  EXPECT_NEAR(base.value, sub.value, 3.0 * std::hypot(base.std_error, sub.std_error));
  EXPECT_NE(base.value, sub.value);
}

TEST(KlNested, DefaultSizing) {
  EXPECT_EQ(default_nested_samples(0.05), 1600u);
  EXPECT_EQ(default_nested_samples(0.1), 400u);
}

TEST(KlNested, DegenerateDiffusion) {
  const GbmParams p{100.0, 0.05, 1e-10};
  const auto spec = AsianPayoffSpec::uniform(0.0, 64);
  NestedOptions uniform;
  uniform.inner = InnerEstimator::uniform_average;
  const auto e = price_kl_nested(p, spec, 0.1, 50, 50, 0, 1, uniform);
  // Inner average of a deterministic path: close to (e^mu - 1)/mu within sampling of t.
  EXPECT_NEAR(e.value, 100.0 * (std::exp(0.05) - 1.0) / 0.05, 0.5);
  NestedOptions rate;
  const auto r = price_kl_nested(p, spec, 0.1, 50, 400, 0, 1, rate);
  EXPECT_NEAR(r.value, 100.0 * (std::exp(0.05) - 1.0) / 0.05, 1.0);
  EXPECT_EQ(r.truncation, 21);
}

TEST(KlNested, InnerEstimatorsAgree) {
  const GbmParams p{100.0, 0.05, 0.2};
  const auto spec = AsianPayoffSpec::uniform(100.0, 64);
  const auto base = price_baseline(p, spec, 200000, 7);
  for (auto inner : {InnerEstimator::acceptance_rate, InnerEstimator::uniform_average,
                     InnerEstimator::rejection_average}) {
    NestedOptions opts;
    opts.inner = inner;
    const auto e = price_kl_nested(p, spec, 0.1, 4000, 400, 0, 7, opts);
    EXPECT_NEAR(e.value, base.value, 3.0 * std::hypot(e.std_error, base.std_error) + 1.0);
    EXPECT_EQ(e.n_outer, 4000u);
    EXPECT_EQ(e.n_inner, 400u);
  }
}

TEST(KlNested, WorkerCountInvariantAndValidation) {
  const GbmParams p{100.0, 0.05, 0.2};
  const auto spec = AsianPayoffSpec::uniform(100.0, 64);
  const auto a = price_kl_nested(p, spec, 0.2, 300, 50, 0, 4, {}, {1, 1.0});
  const auto b = price_kl_nested(p, spec, 0.2, 300, 50, 0, 4, {}, {3, 1.0});
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.proposals, b.proposals);
  EXPECT_THROW(price_kl_nested(p, spec, 0.2, 1, 50, 0, 4), std::invalid_argument);
  EXPECT_THROW(price_kl_nested(p, spec, 0.2, 50, 1, 0, 4), std::invalid_argument);
}

TEST(Method, Names) {
  EXPECT_EQ(to_string(Method::baseline), "baseline");
  EXPECT_EQ(to_string(Method::kl_nested), "kl-nested");
  EXPECT_EQ(to_string(Method::subsample), "subsample");
  EXPECT_EQ(to_string(Method::geometric_closed_form), "geometric-cf");
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "klasian/klcore.hpp"
#include "klasian/process.hpp"
#include "klasian/random.hpp"

using namespace klasian;

constexpr double kPi = std::numbers::pi;

TEST(KlEigen, Eigenvalues) {
  EXPECT_NEAR(kl_eigenvalue<double>(1), 0.40528473456935109, 1e-16);
  EXPECT_NEAR(kl_eigenvalue<double>(2), 0.045031637174372343, 1e-16);
  EXPECT_NEAR(kl_eigenvalue<double>(10), 0.0011226723949289504, 1e-17);
  EXPECT_THROW(kl_eigenvalue<double>(0), std::invalid_argument);
}

TEST(KlEigen, MonotoneAndBoundedConstant) {
  for (int k = 1; k < 10000; ++k) {
    ASSERT_LT(kl_eigenvalue<double>(k + 1), kl_eigenvalue<double>(k));
    const double g = kl_lipschitz_constant<double>(k);
    ASSERT_NEAR(kl_eigenvalue<double>(k) * g * g, 2.0, 1e-13);
  }
  EXPECT_NEAR(KlBasis<double>(50).bounded_eigenfunction_constant(), 2.0, 1e-13);
}

TEST(KlEigen, Eigenfunctions) {
  EXPECT_EQ(kl_eigenfunction<double>(1, 0.0), 0.0);
  EXPECT_NEAR(kl_eigenfunction<double>(1, 0.5), 1.0, 1e-15);
  EXPECT_NEAR(kl_eigenfunction<double>(3, 1.0), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(kl_eigenfunction<double>(1, 1.5), std::domain_error);
  EXPECT_THROW(kl_eigenfunction<double>(1, -0.1), std::domain_error);
}

TEST(TailBound, ClosedAndPartial) {
  EXPECT_NEAR(tail_variance_bound(1).closed, 2.0 / (kPi * kPi), 1e-15);
  EXPECT_NEAR(tail_variance_bound(100).closed, 0.0020264236728467555, 1e-15);
  for (int L : {1, 10, 100}) {
    const auto b = tail_variance_bound(L);
    // The partial sum stops 1e6 terms in; the remainder is about 2 / (pi^2 1e6).
    EXPECT_NEAR(b.partial_sum, tail_variance_exact(L), 2.1e-7);
    EXPECT_LE(b.partial_sum, b.closed);
  }
  EXPECT_NEAR(tail_variance_exact(1), 0.18943053086129783, 1e-14);
  EXPECT_LT(tail_variance_bound(200).closed, tail_variance_bound(100).closed);
}

TEST(TruncationIndex, FrozenValues) {
  EXPECT_EQ(truncation_index_bm(1.0), 1);
  EXPECT_EQ(truncation_index_bm(0.5), 1);
  EXPECT_EQ(truncation_index_bm(0.1), 21);
  EXPECT_EQ(truncation_index_bm(0.05), 82);
  EXPECT_EQ(truncation_index_bm(0.02), 507);
  EXPECT_THROW(truncation_index_bm(0.0), std::invalid_argument);
  const int L = truncation_index_bm(0.1);
  EXPECT_LE(tail_variance_exact(L), 0.01);
  EXPECT_GT(tail_variance_exact(L - 1), 0.01);
}

TEST(Wiener, Examples) {
  WienerCoefficients<double> c;
  c.a = Eigen::VectorXd::Zero(4);
  c.a(0) = 1.0;
  for (double t : {0.0, 0.3, 0.77, 1.0}) {
    EXPECT_NEAR(wiener_eval(c, t), t, 1e-15);
    EXPECT_NEAR(wiener_eval_horner(c, t), t, 1e-15);
  }
  c.a.setZero();
  c.a(1) = 1.0;
  EXPECT_NEAR(wiener_eval(c, 0.5), 0.45015815807855303, 1e-15);
  EXPECT_NEAR(wiener_eval_horner(c, 0.5), 0.45015815807855303, 1e-15);
  EXPECT_THROW(wiener_eval(c, 1.01), std::domain_error);
}

TEST(Wiener, HornerMatchesDirect) {
  RandomStream s(5, 0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    WienerCoefficients<double> c;
    c.clip_bound = 10.0;
    c.a = Eigen::VectorXd(257);
    for (Eigen::Index k = 0; k < c.a.size(); ++k) c.a(k) = 20.0 * s.uniform() - 10.0;
    const double t = s.uniform();
    const double d = wiener_eval(c, t);
    worst = std::max(worst, std::abs(wiener_eval_horner(c, t) - d) / (1.0 + std::abs(d)));
    ASSERT_EQ(wiener_eval_horner(c, 0.0), 0.0);
    ASSERT_EQ(wiener_eval_horner(c, 1.0), c.a(0));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Wiener, FloatScalar) {
  WienerCoefficients<float> c;
  c.a = Eigen::VectorXf::Zero(3);
  c.a(1) = 1.0f;
  EXPECT_NEAR(wiener_eval_horner(c, 0.5f), 0.4501582f, 1e-6f);
}

TEST(Wiener, PolynomialAndLipschitz) {
  RandomStream s(6, 0);
  const auto c = sample_coefficients(s, 40);
  const WienerPolynomial<double> p(c);
  double max_slope = 0.0;
  const int n = 4000;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    ASSERT_NEAR(p(t), wiener_eval(c, t), 1e-12);
    if (i > 0) max_slope = std::max(max_slope, std::abs(p(t) - p(t - 1.0 / n)) * n);
  }
  EXPECT_LE(max_slope, p.lipschitz_bound());
}

TEST(Wiener, Validation) {
  WienerCoefficients<double> c;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.a = Eigen::VectorXd::Constant(3, 9.0);
  EXPECT_THROW(c.validate(), std::domain_error);
}

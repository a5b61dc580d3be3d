#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "klasian/qsim.hpp"

using namespace klasian;
using namespace klasian::qsim;

TEST(GaussianRegister, TwoPoints) {
  const auto amps = prepare_gaussian_register(1, 2.0);
  ASSERT_EQ(amps.size(), 2);
  EXPECT_NEAR(amps(0) * amps(0), 0.11920292202211756, 1e-15);  // v = -A
  EXPECT_NEAR(amps.squaredNorm(), 1.0, 1e-15);
}

TEST(GaussianRegister, UnitVariance) {
  const auto p = prepare_gaussian_register(6, 8.0).cwiseAbs2().eval();
  double mean = 0.0, second = 0.0;
  for (int c = 0; c < 64; ++c) {
    const double v = gaussian_grid_value(c, 6, 8.0);
    mean += p(c) * v;
    second += p(c) * v * v;
  }
  EXPECT_NEAR(second - mean * mean, 1.0, 0.02);
  // Symmetric around code N/2: p(x) = p(-x).
  for (int x = 1; x < 32; ++x) EXPECT_NEAR(p(32 + x), p(32 - x), 1e-15);
  EXPECT_THROW(prepare_gaussian_register(0, 1.0), std::invalid_argument);
  EXPECT_THROW(prepare_gaussian_register(9, 1.0), std::invalid_argument);
}

TEST(Layout, Guard) {
  EXPECT_EQ(RegisterLayout::semidigital(2, 1, 4, 8).total_qubits(), 14);
  EXPECT_THROW(RegisterLayout::semidigital(4, 5, 4, 8), std::length_error);
  EXPECT_THROW(RegisterLayout::semidigital(2, 1, 4, 0), std::invalid_argument);
  EXPECT_EQ(RegisterLayout::quantized_subsample(2, 2).total_qubits(), 5);
}

TEST(Codec, RoundTripAndSaturation) {
  auto codec = FixedPointCodec::covering(8, 255.0);
  EXPECT_EQ(codec.scale(), 1.0);
  for (double v = 0.0; v <= 255.0; v += 0.37) EXPECT_LE(std::abs(codec.quantize(v) - v), 0.5 * codec.scale());
  EXPECT_EQ(codec.saturation_count(), 0u);
  EXPECT_EQ(codec.encode(300.0), 255u);
  EXPECT_EQ(codec.encode(-3.0), 0u);
  EXPECT_EQ(codec.saturation_count(), 2u);
  EXPECT_THROW(FixedPointCodec(0, 1.0), std::invalid_argument);
}

TEST(Semidigital, SingleTimeDeterministicValue) {
  const GbmParams p{100.0, 0.05, 1e-12};
  const auto layout = RegisterLayout::semidigital(2, 0, 1, 8);
  auto codec = FixedPointCodec::covering(8, 200.0);
  const auto s = build_semidigital_state(layout, p, 0, 1, codec, 4.0);
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
  const auto expected = codec.encode(100.0 * std::exp(p.effective_drift()));
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (std::norm(s.amplitudes()(i)) > 0.0) EXPECT_EQ(s.value_code(static_cast<std::uint64_t>(i)), expected);
}

TEST(Rotation, ExtremeValues) {
  const GbmParams p{100.0, 0.0, 1e-12};
  const auto layout = RegisterLayout::semidigital(1, 0, 2, 4);
  // Codec whose only representable values are 0 and 100 * k.
  auto codec = FixedPointCodec(4, 100.0);
  const auto s = build_semidigital_state(layout, p, 0, 2, codec, 4.0);
  const auto full = attach_value_rotation(s, 100.0);
  EXPECT_NEAR(exact_success_probability(full), 1.0, 1e-12);
  EXPECT_NEAR(exact_success_probability(full, {1, 1}), 0.0, 1e-12);
  EXPECT_NEAR(exact_success_probability(full, {0, 0}), 1.0, 1e-12);
  EXPECT_THROW(attach_value_rotation(s, 50.0), std::domain_error);

  const auto zero_state = build_semidigital_state(layout, GbmParams{1.0, 0.0, 1e-12}, 0, 2, codec, 4.0);
  const auto none = attach_value_rotation(zero_state, 100.0);
  EXPECT_NEAR(exact_success_probability(none), 0.0, 1e-12);
  EXPECT_THROW(exact_success_probability(none, {2, 0}), std::invalid_argument);
}

TEST(Rotation, Completeness) {
  const GbmParams p{100.0, 0.05, 0.2};
  const auto layout = RegisterLayout::semidigital(2, 1, 4, 8);
  const double gmax = g_max_bound(p, 1, 4.0).value;
  const auto s = attach_value_rotation(build_semidigital_state(layout, p, 1, 4, FixedPointCodec::covering(8, gmax), 4.0), gmax);
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
  EXPECT_NEAR(exact_success_probability(s, {1, 0}) + exact_success_probability(s, {1, 1}), 1.0, 1e-12);
}

TEST(QuantizedSubsample, StrikeAboveEverything) {
  const GbmParams p{100.0, 0.05, 0.2};
  const auto layout = RegisterLayout::quantized_subsample(2, 2);
  const double gmax = 200.0;
  const auto s = build_quantized_subsample_state(layout, p, 2, 1e6, gmax, FixedPointCodec::covering(8, gmax), 2.0);
  EXPECT_EQ(exact_success_probability(s), 0.0);
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
}

TEST(QuantizedSubsample, DeterministicRiemannMean) {
  const GbmParams p{100.0, 0.05, 1e-12};
  const auto layout = RegisterLayout::quantized_subsample(2, 3);
  const double gmax = 200.0;
  auto codec = FixedPointCodec::covering(16, gmax);
  const auto s = build_quantized_subsample_state(layout, p, 3, 0.0, gmax, codec, 2.0);
  double riemann = 0.0;
  for (int i = 1; i <= 3; ++i) riemann += 100.0 * std::exp(p.effective_drift() * i / 3.0) / 3.0;
  EXPECT_NEAR(exact_success_probability(s) * gmax, riemann, 0.5 * codec.scale() + 1e-9);
  EXPECT_THROW(build_quantized_subsample_state(layout, p, 3, 0.0, 50.0, codec, 2.0), std::domain_error);
}

TEST(Mle, Extremes) {
  RandomStream s(1, 0);
  EXPECT_EQ(mle_amplitude_estimate(0.0, 50, {0, 1, 2}, s), 0.0);
  EXPECT_NEAR(mle_amplitude_estimate(1.0, 50, {0, 1, 2}, s), 1.0, 1e-12);
  EXPECT_THROW(mle_amplitude_estimate(1.5, 50, {0}, s), std::invalid_argument);
  EXPECT_THROW(mle_amplitude_estimate(0.5, 50, {-1}, s), std::invalid_argument);
  EXPECT_EQ(oracle_calls(100, {0, 1, 2, 4, 8}), 3500u);
}

TEST(Mle, DepthZeroIsProportion) {
  double total = 0.0;
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    RandomStream a(2, trial), b(2, trial);
    const double est = mle_amplitude_estimate(0.3, 400, {0}, a);
    std::uint64_t hits = 0;
    for (int i = 0; i < 400; ++i)
      if (b.uniform() < std::pow(std::sin(std::asin(std::sqrt(0.3))), 2)) ++hits;
    ASSERT_NEAR(est, hits / 400.0, 1e-6);
    total += est;
  }
  EXPECT_NEAR(total / 200, 0.3, 4.0 * std::sqrt(0.3 * 0.7 / 400 / 200));
}

TEST(Csv, Dump) {
  const auto layout = RegisterLayout::quantized_subsample(1, 1);
  const auto s = build_quantized_subsample_state(layout, GbmParams{}, 1, 100.0, 200.0,
                                                 FixedPointCodec::covering(8, 200.0), 2.0);
  std::ostringstream out;
  write_probability_csv(s, out);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "basis,coeff0,ancilla,probability");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  EXPECT_GE(rows, 2);
}

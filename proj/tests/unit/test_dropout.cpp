#include <gtest/gtest.h>

#include <random>

#include "ibnet/dropout.hpp"
#include "ibnet/error.hpp"

namespace ibnet {
namespace {

TEST(SampleMask, Degenerate) {
  std::mt19937_64 rng(1);
  const auto before = rng;
  EXPECT_EQ(sample_mask(1.0, rng, 5).values, std::vector<std::uint8_t>(5, 1));
  EXPECT_EQ(sample_mask(0.0, rng, 5).values, std::vector<std::uint8_t>(5, 0));
  EXPECT_EQ(rng, before);
  EXPECT_THROW(sample_mask(1.2, rng, 1), ContractError);
}

TEST(SampleMask, EmpiricalMean) {
  std::mt19937_64 rng(2);
  const auto m = sample_mask(0.5, rng, 10000);
  double mean = 0.0;
  for (auto v : m.values) mean += v;
  mean /= 10000.0;
  EXPECT_GE(mean, 0.48);
  EXPECT_LE(mean, 0.52);
}

TEST(DropoutForward, Cases) {
  const NeuronParams p;
  const auto k = ModelKind::of(ModelTag::Tanh);
  const std::vector<double> w{0.4, -0.3}, x{0.5, 0.2};
  const auto plain = forward(k, w, 0.1, x, p);
  EXPECT_EQ(dropout_forward(k, w, 0.1, x, p, {{0}, 0.5}, 0), plain);
  EXPECT_EQ(dropout_forward(k, w, 0.1, x, p, {{0}, 0.5}, 1)[0], 0.0);
  EXPECT_EQ(dropout_forward(k, w, 0.1, x, p, {{1}, 0.5}, 1), plain);
}

TEST(DropoutCorrection, Cases) {
  const auto k = ModelKind::of(ModelTag::Sigmoid);
  const std::vector<double> y{0.8}, in{0.7};
  EXPECT_EQ(dropout_correction(k, y, std::nullopt, in, {{0}, 0.5}).value, 0.0);
  EXPECT_EQ(dropout_correction(k, y, std::nullopt, in, {{1}, 0.5}).value,
            correction_factor(k, y, std::nullopt, in).value);
  const auto kr = ModelKind::of(ModelTag::Sigmoid, true);
  const std::vector<double> e{0.3};
  for (std::uint8_t m : {0, 1}) {
    EXPECT_DOUBLE_EQ(dropout_correction(kr, y, std::span<const double>(e), std::vector{0.0}, {{m}, 0.5}).value, 0.5);
  }
}

TEST(DropoutConvUpdate, Cases) {
  NeuronParams p;
  p.mu = 0.1;
  const auto k = ModelKind::conv(2, 2);
  const std::vector<double> w{0.5, -0.5}, x{1.0, 2.0, 3.0, 4.0}, err{0.3, -0.2};
  const auto y = forward(k, w, 0.0, x, p);
  const CorrectionFactor cf{0.1, err};
  const auto plain = update_weights(k, {w, 0.0, x, y}, cf, 1, p).weights;
  EXPECT_EQ(dropout_conv_update(k, w, x, {{1, 1}, 0.5}, err, 1, p), plain);
  EXPECT_EQ(dropout_conv_update(k, w, x, {{0, 0}, 0.5}, err, 1, p), w);
  const auto half = dropout_conv_update(k, w, x, {{1, 0}, 0.5}, err, 1, p);
  EXPECT_DOUBLE_EQ(half[0], 0.5 - 0.1 * 1.0 * 0.3);
  EXPECT_DOUBLE_EQ(half[1], -0.5 - 0.1 * 3.0 * 0.3);
}

}  // namespace
}  // namespace ibnet

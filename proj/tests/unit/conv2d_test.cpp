// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "cuenet/layers/conv2d.hpp"
#include "cuenet/parallel.hpp"
#include "../common/oracles.hpp"
#include "test_util.hpp"

namespace cuenet::layers {
namespace {

using testing::numeric_derivative;
using testing::random_tensor;
using testing::rel_err;

using oracle::naive_conv;

TEST(Conv2dForward, DeltaKernelIsIdentity) {
  Conv2d<double> conv(1, 1);
  conv.weight.at(0, 0, 1, 1) = 1.0;
  SplitMix64 rng(1);
  const auto x = random_tensor<double>({1, 5, 7}, rng);
  EXPECT_EQ(conv2d_forward(conv, x), x);
}

TEST(Conv2dForward, OnesKernelIsBoxSum) {
  Conv2d<double> conv(1, 1);
  conv.weight.fill(1.0);
  const auto out = conv2d_forward(conv, Tensor<double>({1, 5, 5}, 2.5));
  for (std::size_t y = 1; y < 4; ++y)
    for (std::size_t x = 1; x < 4; ++x) EXPECT_EQ(out.at(0, y, x), 22.5);
  EXPECT_EQ(out.at(0, 0, 0), 10.0);
}

TEST(Conv2dForward, RejectsChannelMismatch) {
  Conv2d<double> conv(2, 3);
  EXPECT_THROW(conv2d_forward(conv, Tensor<double>({3, 4, 4})), ShapeError);
  EXPECT_THROW(conv2d_forward(conv, Tensor<double>({2, 4})), ShapeError);
}

TEST(Conv2dForward, MatchesNaiveOracleBitForBit) {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t ci = 1 + rng.below(4), co = 1 + rng.below(4), h = 1 + rng.below(9), w = 1 + rng.below(9);
    Conv2d<double> conv(ci, co);
    conv.weight = random_tensor<double>(conv.weight.dims(), rng);
    conv.bias = random_tensor<double>(conv.bias.dims(), rng);
    const auto x = random_tensor<double>({ci, h, w}, rng);
    ASSERT_EQ(conv2d_forward(conv, x), naive_conv(conv.weight, conv.bias, x))
        << "trial " << trial << " shape " << ci << "->" << co << " " << h << "x" << w;
  }
}

TEST(Conv2dForward, ThreadCountDoesNotChangeResults) {
  SplitMix64 rng(5);
  Conv2d<float> conv(3, 8);
  conv.init_kaiming(rng);
  const auto x = random_tensor<float>({3, 12, 16}, rng);
  const auto up = random_tensor<float>({8, 12, 16}, rng);
  set_worker_threads(1);
  const auto one = conv2d_forward(conv, x);
  const auto [g1, p1] = conv2d_backward(conv, up);
  set_worker_threads(3);
  const auto three = conv2d_forward(conv, x);
  const auto [g3, p3] = conv2d_backward(conv, up);
  set_worker_threads(1);
  EXPECT_EQ(one, three);
  EXPECT_EQ(g1, g3);
  EXPECT_EQ(p1.weight, p3.weight);
  EXPECT_EQ(p1.bias, p3.bias);
}

TEST(Conv2dBackward, RequiresCache) {
  Conv2d<double> conv(1, 1);
  EXPECT_THROW(conv2d_backward(conv, Tensor<double>({1, 3, 3})), StateError);
}

TEST(Conv2dBackward, ZeroUpstreamGivesZeroGrads) {
  SplitMix64 rng(3);
  Conv2d<double> conv(2, 3);
  conv.init_kaiming(rng);
  conv2d_forward(conv, random_tensor<double>({2, 4, 5}, rng));
  const auto [gin, g] = conv2d_backward(conv, Tensor<double>({3, 4, 5}));
  EXPECT_EQ(gin, Tensor<double>({2, 4, 5}));
  EXPECT_EQ(g.weight, Tensor<double>(conv.weight.dims()));
  EXPECT_EQ(g.bias, Tensor<double>({3}));
}

TEST(Conv2dBackward, DeltaKernelPassesUpstreamThrough) {
  Conv2d<double> conv(1, 1);
  conv.weight.at(0, 0, 1, 1) = 1.0;
  SplitMix64 rng(4);
  conv2d_forward(conv, random_tensor<double>({1, 6, 5}, rng));
  const auto up = random_tensor<double>({1, 6, 5}, rng);
  EXPECT_EQ(conv2d_backward(conv, up).first, up);
}

TEST(Conv2dBackward, MatchesFiniteDifferencesEverywhere) {
  SplitMix64 rng(6);
  for (int trial = 0; trial < 4; ++trial) {
    const std::size_t ci = 1 + rng.below(3), co = 1 + rng.below(3), h = 2 + rng.below(5), w = 2 + rng.below(5);
    Conv2d<double> conv(ci, co);
    conv.weight = random_tensor<double>(conv.weight.dims(), rng);
    conv.bias = random_tensor<double>(conv.bias.dims(), rng);
    auto x = random_tensor<double>({ci, h, w}, rng);
    const auto r = random_tensor<double>({co, h, w}, rng);
    const auto loss = [&] {
      Conv2d<double> probe = conv;
      const auto y = probe.forward(x);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * r.data()[i];
      return s;
    };
    conv2d_forward(conv, x);
    const auto [gin, g] = conv2d_backward(conv, r);
    for (std::size_t i = 0; i < conv.weight.size(); ++i)
      EXPECT_LT(rel_err(g.weight.data()[i], numeric_derivative(&conv.weight.data()[i], loss), 1e-8), 1e-5);
    for (std::size_t i = 0; i < conv.bias.size(); ++i)
      EXPECT_LT(rel_err(g.bias.data()[i], numeric_derivative(&conv.bias.data()[i], loss), 1e-8), 1e-5);
    for (std::size_t i = 0; i < x.size(); ++i)
      EXPECT_LT(rel_err(gin.data()[i], numeric_derivative(&x.data()[i], loss), 1e-8), 1e-5);
  }
}

TEST(Conv2dBackward, AccumulatesAcrossCalls) {
  SplitMix64 rng(7);
  Conv2d<double> conv(2, 2);
  conv.init_kaiming(rng);
  const auto x = random_tensor<double>({2, 4, 4}, rng);
  const auto up = random_tensor<double>({2, 4, 4}, rng);
  conv.forward(x);
  conv.backward(up);
  const auto once = conv.grad_weight;
  conv.forward(x);
  conv.backward(up);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_DOUBLE_EQ(conv.grad_weight.data()[i], 2 * once.data()[i]);
  conv.zero_grad();
  EXPECT_EQ(conv.grad_weight, Tensor<double>(once.dims()));
}

}  // namespace
}  // namespace cuenet::layers

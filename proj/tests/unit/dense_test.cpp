// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "cuenet/layers/activation.hpp"
#include "cuenet/layers/dense.hpp"
#include "cuenet/loss.hpp"
#include "../common/oracles.hpp"
#include "test_util.hpp"

namespace cuenet::layers {
namespace {

using testing::numeric_derivative;
using testing::random_tensor;
using testing::rel_err;

TEST(Sigmoid, SymmetryAndLimits) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(50.0), 1.0, 1e-9);
  EXPECT_NEAR(sigmoid(-50.0), 0.0, 1e-9);
  EXPECT_TRUE(std::isfinite(sigmoid(-1000.0)));
  EXPECT_TRUE(std::isfinite(sigmoid(1000.0)));
  for (double z = -10; z <= 10; z += 0.5) {
    EXPECT_GT(sigmoid(z), 0.0);
    EXPECT_LT(sigmoid(z), 1.0);
    EXPECT_GT(sigmoid_prime(z), 0.0);
    EXPECT_LE(sigmoid_prime(z), 0.25);
  }
}

TEST(Sigmoid, DerivativeMatchesCentralDifference) {
  const double z = 0.3, h = 1e-5;
  const double fd = (sigmoid(z + h) - sigmoid(z - h)) / (2 * h);
  EXPECT_LT(rel_err(sigmoid_prime(z), fd), 1e-8);
}

TEST(Relu, ForwardAndBackward) {
  EXPECT_EQ(relu_forward(Tensor<double>({3}, {-2, 0, 3})), (Tensor<double>({3}, {0, 0, 3})));
  const Tensor<double> pos({3}, {0.1, 2, 5});
  EXPECT_EQ(relu_forward(pos), pos);
  EXPECT_EQ(relu_backward(Tensor<double>({2}, {-1, 2}), Tensor<double>({2}, {5, 7})), (Tensor<double>({2}, {0, 7})));
}

TEST(Relu, RepeatedForwardOverwritesCache) {
  Relu<double> r;
  EXPECT_THROW(r.backward(Tensor<double>({2})), StateError);
  r.forward(Tensor<double>({2}, {1, -1}));
  r.forward(Tensor<double>({2}, {-1, 1}));
  EXPECT_EQ(r.backward(Tensor<double>({2}, {3, 4})), (Tensor<double>({2}, {0, 4})));
}

TEST(DenseForward, Examples) {
  DenseLayer<double> id(Tensor<double>({2, 2}, {1, 0, 0, 1}), Tensor<double>({2}), Activation::identity);
  const Tensor<double> a({2}, {0.3, -4});
  EXPECT_EQ(dense_forward(id, a), a);

  DenseLayer<double> zero(Tensor<double>({3, 2}), Tensor<double>({3}), Activation::sigmoid);
  EXPECT_EQ(dense_forward(zero, a), (Tensor<double>({3}, {0.5, 0.5, 0.5})));
  EXPECT_THROW(dense_forward(zero, Tensor<double>({3})), ShapeError);
}

TEST(DenseBackwardOutput, Examples) {
  DenseLayer<double> layer(Tensor<double>({1, 1}, {1}), Tensor<double>({1}), Activation::sigmoid);
  EXPECT_THROW(dense_backward_output(layer, Tensor<double>({1}), Tensor<double>({1}), LossKind::quadratic),
               StateError);
  const auto out = dense_forward(layer, Tensor<double>({1}, {0.4}));
  EXPECT_EQ(dense_backward_output(layer, out, out, LossKind::quadratic), Tensor<double>({1}));
  EXPECT_THROW(dense_backward_output(layer, out, Tensor<double>({2}), LossKind::quadratic), ShapeError);

  // a = 0.8 needs z = logit(0.8); then sigma'(z) = 0.16 and delta = 0.8 * 0.16.
  DenseLayer<double> single(Tensor<double>({1, 1}, {1}), Tensor<double>({1}, {std::log(4.0)}), Activation::sigmoid);
  const auto a = dense_forward(single, Tensor<double>({1}, {0.0}));
  EXPECT_NEAR(a.at(0), 0.8, 1e-15);
  EXPECT_NEAR(dense_backward_output(single, a, Tensor<double>({1}, {0.0}), LossKind::quadratic).at(0), 0.128, 1e-15);
}

TEST(DenseBackwardOutput, MatchesFiniteDifferenceInWeightedInput) {
  SplitMix64 rng(21);
  DenseLayer<double> layer(random_tensor<double>({4, 3}, rng), random_tensor<double>({4}, rng));
  const auto x = random_tensor<double>({3}, rng);
  const auto y = random_tensor<double>({4}, rng, 0, 1);
  const auto a = dense_forward(layer, x);
  const auto delta = dense_backward_output(layer, a, y, LossKind::quadratic);
  Tensor<double> z = *layer.z;
  for (std::size_t j = 0; j < 4; ++j) {
    const double fd = numeric_derivative(&z.data()[j], [&] { return quadratic_loss(sigmoid(z), y); });
    EXPECT_LT(rel_err(delta.at(j), fd), 1e-6);
  }
}

TEST(DenseBackwardHidden, Examples) {
  const Tensor<double> eye({2, 2}, {1, 0, 0, 1});
  const Tensor<double> d({2}, {0.3, -0.7});
  EXPECT_EQ(dense_backward_hidden(eye, d, Tensor<double>({2}, {1, 2}), Activation::identity), d);
  EXPECT_EQ(dense_backward_hidden(eye, Tensor<double>({2}), Tensor<double>({2}, {1, 2}), Activation::sigmoid),
            Tensor<double>({2}));
  EXPECT_THROW(dense_backward_hidden(eye, d, Tensor<double>({3}), Activation::identity), ShapeError);
}

TEST(DenseBackwardHidden, MatchesFiniteDifferenceLayerByLayer) {
  SplitMix64 rng(8);
  auto net = DenseNet<double>::random({3, 4, 3, 2}, Activation::sigmoid, rng);
  const auto x = random_tensor<double>({3}, rng);
  const auto y = random_tensor<double>({2}, rng, 0, 1);
  const auto out = net.forward(x);
  auto& L = net.layers();
  std::vector<Tensor<double>> deltas(3, Tensor<double>({1}));
  deltas[2] = dense_backward_output(L[2], out, y, LossKind::quadratic);
  deltas[1] = dense_backward_hidden(L[2].weights, deltas[2], *L[1].z, Activation::sigmoid);
  deltas[0] = dense_backward_hidden(L[1].weights, deltas[1], *L[0].z, Activation::sigmoid);
  for (std::size_t l = 0; l < 3; ++l) {
    Tensor<double> z = *L[l].z;
    const auto loss_from_z = [&] {
      Tensor<double> a = sigmoid(z);
      for (std::size_t m = l + 1; m < 3; ++m) a = sigmoid(add(matvec(L[m].weights, a), L[m].bias));
      return quadratic_loss(a, y);
    };
    for (std::size_t j = 0; j < z.size(); ++j) {
      EXPECT_LT(rel_err(deltas[l].at(j), numeric_derivative(&z.data()[j], loss_from_z)), 1e-6)
          << "layer " << l << " neuron " << j;
    }
  }
}

TEST(DenseParamGrads, Examples) {
  const auto g = dense_param_grads(Tensor<double>({2}, {1, 2}), Tensor<double>({1}, {3}));
  EXPECT_EQ(g.weight, (Tensor<double>({2, 1}, {3, 6})));
  EXPECT_EQ(g.bias, (Tensor<double>({2}, {1, 2})));
  const auto z = dense_param_grads(Tensor<double>({2}, {1, 2}), Tensor<double>({3}));
  EXPECT_EQ(z.weight, Tensor<double>({2, 3}));
  EXPECT_EQ(z.bias, (Tensor<double>({2}, {1, 2})));
  EXPECT_THROW(dense_param_grads(Tensor<double>({2, 1}), Tensor<double>({3})), ShapeError);
}

TEST(DenseParamGrads, MatchesFiniteDifferenceOnRandomLayer) {
  SplitMix64 rng(12);
  DenseNet<double> net({DenseLayer<double>(random_tensor<double>({3, 2}, rng), random_tensor<double>({3}, rng))});
  const auto x = random_tensor<double>({2}, rng);
  const auto y = random_tensor<double>({3}, rng, 0, 1);
  const auto grads = net.gradients(x, y, LossKind::quadratic);
  const auto loss = [&] { return net.loss(x, y, LossKind::quadratic); };
  auto& layer = net.layers()[0];
  for (std::size_t i = 0; i < 6; ++i)
    EXPECT_LT(rel_err(grads[0].weight.data()[i], numeric_derivative(&layer.weights.data()[i], loss)), 1e-6);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_LT(rel_err(grads[0].bias.data()[i], numeric_derivative(&layer.bias.data()[i], loss)), 1e-6);
}

TEST(DenseNet, HandComputedTwoThreeTwoFixture) {
  oracle::HandFixture f;
  EXPECT_NEAR(f.net.loss(f.x, f.y, LossKind::quadratic), f.loss, 1e-15);
  const auto out = f.net.forward(f.x);
  EXPECT_NEAR(out.at(0), f.output[0], 1e-15);
  EXPECT_NEAR(out.at(1), f.output[1], 1e-15);

  const auto g = f.net.gradients(f.x, f.y, LossKind::quadratic);
  std::vector<double> got;
  for (const auto& layer : g) {
    got.insert(got.end(), layer.weight.begin(), layer.weight.end());
    got.insert(got.end(), layer.bias.begin(), layer.bias.end());
  }
  const auto expected = oracle::HandFixture::expected_gradients();
  ASSERT_EQ(got.size(), 17u);
  ASSERT_EQ(expected.size(), 17u);
  for (std::size_t i = 0; i < 17; ++i) EXPECT_NEAR(got[i], expected[i], 1e-10) << "parameter " << i;
  EXPECT_EQ(f.net.parameter_count(), 17u);
}

}  // namespace
}  // namespace cuenet::layers

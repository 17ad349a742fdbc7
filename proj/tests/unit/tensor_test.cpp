// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "cuenet/layers/activation.hpp"
#include "cuenet/tensor.hpp"
#include "test_util.hpp"

namespace cuenet {
namespace {

using testing::random_tensor;

TEST(TensorNew, FillsEveryElement) {
  const auto z = tensor_new<double>({2, 2}, 0.0);
  EXPECT_EQ(z.dims(), (Dims{2, 2}));
  for (double v : z) EXPECT_EQ(v, 0.0);

  const auto c = tensor_new<double>({3}, 1.5);
  EXPECT_EQ(c, (Tensor<double>({3}, {1.5, 1.5, 1.5})));

  EXPECT_EQ(tensor_new<float>({2, 3, 4}, 0.0f).size(), 24u);
}

TEST(TensorNew, RejectsEmptyOrZeroDims) {
  EXPECT_THROW(tensor_new<double>({}, 0.0), ShapeError);
  EXPECT_THROW(tensor_new<double>({2, 0}, 0.0), ShapeError);
  EXPECT_THROW(Tensor<double>({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(Tensor, IndexingIsChecked) {
  Tensor<int> t({2, 3});
  t.at(1, 2) = 7;
  EXPECT_EQ(t[5], 7);
  EXPECT_THROW(t.at(2, 0), IndexError);
  EXPECT_THROW(t.at(0, 3), IndexError);
  EXPECT_THROW(t[6], IndexError);
  EXPECT_THROW(t.at(0), IndexError);
}

TEST(Tensor, FlatOffsetRoundTripsThroughCoordinates) {
  Tensor<float> t({3, 4, 5});
  const Dims strides = t.strides();
  EXPECT_EQ(strides, (Dims{20, 5, 1}));
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    const Dims c = t.coords(flat);
    EXPECT_EQ(c[0] * strides[0] + c[1] * strides[1] + c[2] * strides[2], flat);
    EXPECT_EQ(t.offset(c), flat);
  }
}

TEST(Hadamard, Examples) {
  const Tensor<double> a({3}, {1, 2, 3});
  EXPECT_EQ(hadamard(a, Tensor<double>({3}, {4, 5, 6})), (Tensor<double>({3}, {4, 10, 18})));
  EXPECT_EQ(hadamard(a, tensor_new<double>({3}, 1.0)), a);
  EXPECT_EQ(hadamard(a, tensor_new<double>({3}, 0.0)), tensor_new<double>({3}, 0.0));
  EXPECT_THROW(hadamard(a, tensor_new<double>({4}, 1.0)), ShapeError);
  EXPECT_THROW(hadamard(a, tensor_new<double>({3, 1}, 1.0)), ShapeError);
}

TEST(Matvec, Examples) {
  const Tensor<double> eye({2, 2}, {1, 0, 0, 1});
  EXPECT_EQ(matvec(eye, Tensor<double>({2}, {3, 7})), (Tensor<double>({2}, {3, 7})));
  const Tensor<double> w({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(matvec(w, Tensor<double>({2}, {1, 1})), (Tensor<double>({2}, {3, 7})));
  EXPECT_THROW(matvec(w, Tensor<double>({3}, {1, 1, 1})), ShapeError);
}

template <typename T>
double matvec_oracle_error(std::uint64_t seed) {
  SplitMix64 rng(seed);
  const std::size_t rows = 1 + rng.below(8), cols = 1 + rng.below(8);
  const auto w = random_tensor<T>({rows, cols}, rng);
  const auto a = random_tensor<T>({cols}, rng);
  const auto got = matvec(w, a);
  double worst = 0.0;
  for (std::size_t j = 0; j < rows; ++j) {
    long double acc = 0.0L;
    for (std::size_t k = 0; k < cols; ++k) acc += static_cast<long double>(w.at(j, k)) * a.at(k);
    double scale = 0.0;
    for (std::size_t k = 0; k < cols; ++k) scale += std::abs(static_cast<double>(w.at(j, k)) * a.at(k));
    worst = std::max(worst, std::abs(static_cast<double>(acc) - static_cast<double>(got.at(j))) / std::max(scale, 1e-30));
  }
  return worst;
}

TEST(Matvec, AgreesWithNaiveLoopOracle) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    EXPECT_LT(matvec_oracle_error<float>(seed), 1e-6) << "seed " << seed;
    EXPECT_LT(matvec_oracle_error<double>(seed), 1e-12) << "seed " << seed;
  }
  SplitMix64 rng(5);
  const auto w = random_tensor<double>({5, 4}, rng);
  const auto a = random_tensor<double>({4}, rng);
  const auto got = matvec(w, a);
  for (std::size_t j = 0; j < 5; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < 4; ++k) acc += w.at(j, k) * a.at(k);
    EXPECT_DOUBLE_EQ(got.at(j), acc);
  }
}

TEST(Transpose2d, Examples) {
  const Tensor<int> w({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(transpose2d(w), (Tensor<int>({2, 2}, {1, 3, 2, 4})));
  SplitMix64 rng(3);
  const auto r = random_tensor<double>({3, 5}, rng);
  EXPECT_EQ(transpose2d(r).dims(), (Dims{5, 3}));
  EXPECT_EQ(transpose2d(transpose2d(r)), r);
  EXPECT_THROW(transpose2d(Tensor<int>({2, 2, 2})), ShapeError);
}

TEST(MapElementwise, Examples) {
  const Tensor<double> a({2}, {1, -2});
  EXPECT_EQ(map_elementwise(a, [](double v) { return -v; }), (Tensor<double>({2}, {-1, 2})));
  EXPECT_EQ(map_elementwise(a, [](double v) { return v; }), a);
  const auto half = map_elementwise(tensor_new<double>({4}, 0.0), [](double v) { return layers::sigmoid(v); });
  for (double v : half) EXPECT_EQ(v, 0.5);
}

TEST(Tensor, ElementwiseOpsCommuteWithTranspose) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_tensor<double>({1 + rng.below(5), 1 + rng.below(5)}, rng);
    Tensor<double> b(a.dims());
    for (auto& v : b) v = rng.uniform(-1, 1);
    EXPECT_EQ(transpose2d(hadamard(a, b)), hadamard(transpose2d(a), transpose2d(b)));
    const auto f = [](double v) { return std::exp(v) - v * v; };
    EXPECT_EQ(transpose2d(map_elementwise(a, f)), map_elementwise(transpose2d(a), f));
  }
}

TEST(Shape2D, RejectsZeroExtents) {
  EXPECT_THROW(Shape2D(0, 4, 1), ShapeError);
  EXPECT_THROW(Shape2D(4, 4, 0), ShapeError);
  const Shape2D s(180, 240, 3);
  EXPECT_EQ(s.chw(), (Dims{3, 180, 240}));
  EXPECT_EQ(s.pixels(), 43200u);
}

}  // namespace
}  // namespace cuenet

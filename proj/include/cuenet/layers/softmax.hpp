// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "cuenet/error.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet::layers {

/// Softmax over all pixels of a single-channel [1,H,W] map, computed with max
/// subtraction.
template <typename T>
Tensor<T> spatial_softmax_forward(const Tensor<T>& input) {
  if (input.rank() != 3 || input.dim(0) != 1) {
    throw ShapeError("spatial softmax expects [1,H,W], got " + dims_to_string(input.dims()));
  }
  const T peak = *std::max_element(input.begin(), input.end());
  Tensor<T> out(input.dims());
  // Accumulate the normaliser in double so float maps still sum to 1 within 1e-6.
  double total = 0.0;
  for (std::size_t i = 0; i < input.size(); ++i) {
    const T e = std::exp(input.data()[i] - peak);
    out.data()[i] = e;
    total += static_cast<double>(e);
  }
  const double inv = 1.0 / total;
  for (auto& v : out) v = static_cast<T>(static_cast<double>(v) * inv);
  return out;
}

/// Jacobian-vector product: out (.) (upstream - sum(upstream (.) out)).
template <typename T>
Tensor<T> spatial_softmax_backward(const Tensor<T>& output, const Tensor<T>& upstream) {
  Tensor<T>::require_same_dims(output, upstream, "spatial_softmax_backward");
  double dot = 0.0;
  for (std::size_t i = 0; i < output.size(); ++i)
    dot += static_cast<double>(upstream.data()[i]) * static_cast<double>(output.data()[i]);
  const T d = static_cast<T>(dot);
  Tensor<T> grad(output.dims());
  for (std::size_t i = 0; i < output.size(); ++i) grad.data()[i] = output.data()[i] * (upstream.data()[i] - d);
  return grad;
}

template <typename T>
class SpatialSoftmax {
public:
  Tensor<T> forward(const Tensor<T>& input) {
    Tensor<T> out = spatial_softmax_forward(input);
    output_ = out;
    return out;
  }
  Tensor<T> backward(const Tensor<T>& upstream) const {
    if (!output_) throw StateError("softmax backward called without a cached forward");
    return spatial_softmax_backward(*output_, upstream);
  }
  void clear_cache() { output_.reset(); }

private:
  std::optional<Tensor<T>> output_;
};

}  // namespace cuenet::layers

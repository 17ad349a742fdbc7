// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>

#include "cuenet/error.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet::layers {

enum class Activation { identity, sigmoid, relu };

/// Logistic function, branching on sign so exp never overflows.
template <typename T>
T sigmoid(T z) {
  if (z >= T{0}) return T{1} / (T{1} + std::exp(-z));
  const T e = std::exp(z);
  return e / (T{1} + e);
}

template <typename T>
T sigmoid_prime(T z) {
  const T s = sigmoid(z);
  return s * (T{1} - s);
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& z) {
  return map_elementwise(z, [](T v) { return sigmoid(v); });
}

template <typename T>
Tensor<T> sigmoid_prime(const Tensor<T>& z) {
  return map_elementwise(z, [](T v) { return sigmoid_prime(v); });
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& z) {
  return map_elementwise(z, [](T v) { return v > T{0} ? v : T{0}; });
}

/// Passes upstream where z > 0, zero elsewhere (subgradient 0 at the kink).
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& z, const Tensor<T>& upstream) {
  Tensor<T>::require_same_dims(z, upstream, "relu_backward");
  Tensor<T> out(z.dims());
  for (std::size_t i = 0; i < z.size(); ++i) out.data()[i] = z.data()[i] > T{0} ? upstream.data()[i] : T{0};
  return out;
}

template <typename T>
T activate(Activation act, T z) {
  switch (act) {
    case Activation::sigmoid: return sigmoid(z);
    case Activation::relu: return z > T{0} ? z : T{0};
    case Activation::identity: break;
  }
  return z;
}

template <typename T>
T activate_prime(Activation act, T z) {
  switch (act) {
    case Activation::sigmoid: return sigmoid_prime(z);
    case Activation::relu: return z > T{0} ? T{1} : T{0};
    case Activation::identity: break;
  }
  return T{1};
}

template <typename T>
Tensor<T> activate(Activation act, const Tensor<T>& z) {
  return map_elementwise(z, [act](T v) { return activate(act, v); });
}

template <typename T>
Tensor<T> activate_prime(Activation act, const Tensor<T>& z) {
  return map_elementwise(z, [act](T v) { return activate_prime(act, v); });
}

/// ReLU as a network stage. Each forward overwrites the cache.
template <typename T>
class Relu {
public:
  Tensor<T> forward(const Tensor<T>& z) {
    cache_ = z;
    return relu_forward(z);
  }

  Tensor<T> backward(const Tensor<T>& upstream) const {
    if (!cache_) throw StateError("relu backward called without a cached forward");
    Tensor<T> grad = relu_backward(*cache_, upstream);
    if (flip_backward_sign) grad *= T{-1};
    return grad;
  }

  void clear_cache() { cache_.reset(); }
  const std::optional<Tensor<T>>& cached_input() const { return cache_; }

  /// Test hook: negates the backward result so gradient checks can prove they
  /// catch a wrong derivative.
  bool flip_backward_sign = false;

private:
  std::optional<Tensor<T>> cache_;
};

}  // namespace cuenet::layers

// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <span>

#include "cuenet/tensor.hpp"

namespace cuenet {

enum class LossKind { l1, quadratic };

/// Sum of absolute per-element differences.
template <typename T>
T l1_loss(const Tensor<T>& output, const Tensor<T>& label) {
  Tensor<T>::require_same_dims(output, label, "l1_loss");
  T acc{};
  for (std::size_t i = 0; i < output.size(); ++i) acc += std::abs(label.data()[i] - output.data()[i]);
  return acc;
}

/// d/d output of l1_loss: -sign(label - output), 0 where they are equal.
template <typename T>
Tensor<T> l1_loss_grad(const Tensor<T>& output, const Tensor<T>& label) {
  Tensor<T>::require_same_dims(output, label, "l1_loss_grad");
  Tensor<T> g(output.dims());
  for (std::size_t i = 0; i < output.size(); ++i) {
    const T d = label.data()[i] - output.data()[i];
    g.data()[i] = d > T{0} ? T{-1} : (d < T{0} ? T{1} : T{0});
  }
  return g;
}

/// 0.5 * sum (y - a)^2 for one sample.
template <typename T>
T quadratic_loss(const Tensor<T>& a, const Tensor<T>& y) {
  Tensor<T>::require_same_dims(a, y, "quadratic_loss");
  T acc{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const T d = y.data()[i] - a.data()[i];
    acc += d * d;
  }
  return acc / T{2};
}

/// Gradient of quadratic_loss with respect to a: exactly a - y.
template <typename T>
Tensor<T> quadratic_loss_grad(const Tensor<T>& a, const Tensor<T>& y) {
  Tensor<T>::require_same_dims(a, y, "quadratic_loss_grad");
  return subtract(a, y);
}

template <typename T>
T loss_value(LossKind kind, const Tensor<T>& a, const Tensor<T>& y) {
  return kind == LossKind::l1 ? l1_loss(a, y) : quadratic_loss(a, y);
}

template <typename T>
Tensor<T> loss_grad(LossKind kind, const Tensor<T>& a, const Tensor<T>& y) {
  return kind == LossKind::l1 ? l1_loss_grad(a, y) : quadratic_loss_grad(a, y);
}

/// Average of per-sample losses over a batch.
template <typename T>
T mean_loss(std::span<const T> per_sample) {
  if (per_sample.empty()) return T{};
  T acc{};
  for (T v : per_sample) acc += v;
  return acc / static_cast<T>(per_sample.size());
}

}  // namespace cuenet

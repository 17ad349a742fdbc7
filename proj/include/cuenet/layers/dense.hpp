// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "cuenet/error.hpp"
#include "cuenet/layers/activation.hpp"
#include "cuenet/loss.hpp"
#include "cuenet/random.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet::layers {

/// Parameter gradients of one layer, shaped like the parameters. For batch
/// normalization `weight` holds the scale gradient and `bias` the shift.
template <typename T>
struct LayerGrads {
  Tensor<T> weight;
  Tensor<T> bias;
};

/// Fully connected layer a = act(w a_prev + b); w is [n_out, n_in].
template <typename T>
struct DenseLayer {
  Tensor<T> weights;
  Tensor<T> bias;
  Activation activation = Activation::sigmoid;
  std::optional<Tensor<T>> z;       // weighted input of the last forward
  std::optional<Tensor<T>> a_prev;  // input of the last forward

  DenseLayer(Tensor<T> w, Tensor<T> b, Activation act = Activation::sigmoid)
      : weights(std::move(w)), bias(std::move(b)), activation(act) {
    if (weights.rank() != 2 || bias.rank() != 1 || weights.dim(0) != bias.dim(0)) {
      throw ShapeError("dense layer needs w [n_out,n_in] and b [n_out], got " + dims_to_string(weights.dims()) +
                       " and " + dims_to_string(bias.dims()));
    }
  }

  std::size_t inputs() const { return weights.dim(1); }
  std::size_t outputs() const { return weights.dim(0); }
};

template <typename T>
Tensor<T> dense_forward(DenseLayer<T>& layer, const Tensor<T>& a_prev) {
  if (a_prev.rank() != 1 || a_prev.dim(0) != layer.inputs()) {
    throw ShapeError("dense_forward: expected input [" + std::to_string(layer.inputs()) + "], got " +
                     dims_to_string(a_prev.dims()));
  }
  Tensor<T> z = matvec(layer.weights, a_prev);
  z += layer.bias;
  Tensor<T> a = activate(layer.activation, z);
  layer.z = std::move(z);
  layer.a_prev = a_prev;
  return a;
}

/// Output error: delta_L = grad_a L (.) act'(z_L).
template <typename T>
Tensor<T> dense_backward_output(const DenseLayer<T>& layer, const Tensor<T>& a_out, const Tensor<T>& label,
                                LossKind loss) {
  if (!layer.z) throw StateError("dense_backward_output called before dense_forward");
  if (label.dims() != a_out.dims() || a_out.dims() != layer.z->dims()) {
    throw ShapeError("dense_backward_output: label/output dims disagree");
  }
  return hadamard(loss_grad(loss, a_out, label), activate_prime(layer.activation, *layer.z));
}

/// Hidden error: delta_l = (w_{l+1}^T delta_{l+1}) (.) act'(z_l).
template <typename T>
Tensor<T> dense_backward_hidden(const Tensor<T>& w_next, const Tensor<T>& delta_next, const Tensor<T>& z_this,
                                Activation act = Activation::sigmoid) {
  Tensor<T> back = matvec(transpose2d(w_next), delta_next);
  if (back.dims() != z_this.dims()) throw ShapeError("dense_backward_hidden: w_next columns must match z_this");
  return hadamard(back, activate_prime(act, z_this));
}

/// dL/db_j = delta_j and dL/dw_jk = a_prev_k * delta_j.
template <typename T>
LayerGrads<T> dense_param_grads(const Tensor<T>& delta, const Tensor<T>& a_prev) {
  if (delta.rank() != 1 || a_prev.rank() != 1) throw ShapeError("dense_param_grads expects rank-1 tensors");
  const std::size_t rows = delta.dim(0), cols = a_prev.dim(0);
  Tensor<T> dw({rows, cols});
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t k = 0; k < cols; ++k) dw.data()[j * cols + k] = a_prev.data()[k] * delta.data()[j];
  return {std::move(dw), delta};
}

/// Stack of dense layers trained with the classic four-equation backprop.
template <typename T>
class DenseNet {
public:
  explicit DenseNet(std::vector<DenseLayer<T>> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ShapeError("DenseNet needs at least one layer");
    for (std::size_t l = 1; l < layers_.size(); ++l) {
      if (layers_[l].inputs() != layers_[l - 1].outputs()) throw ShapeError("DenseNet layer sizes do not chain");
    }
  }

  /// Fan-in scaled normal weights, zero biases.
  static DenseNet random(const std::vector<std::size_t>& sizes, Activation act, SplitMix64& rng) {
    std::vector<DenseLayer<T>> layers;
    for (std::size_t l = 1; l < sizes.size(); ++l) {
      Tensor<T> w({sizes[l], sizes[l - 1]});
      const double scale = std::sqrt(2.0 / static_cast<double>(sizes[l - 1]));
      for (auto& v : w) v = static_cast<T>(rng.normal() * scale);
      layers.emplace_back(std::move(w), Tensor<T>({sizes[l]}), act);
    }
    return DenseNet(std::move(layers));
  }

  Tensor<T> forward(const Tensor<T>& x) {
    Tensor<T> a = x;
    for (auto& layer : layers_) a = dense_forward(layer, a);
    return a;
  }

  /// Runs forward then backpropagates; returns per-layer parameter grads.
  std::vector<LayerGrads<T>> gradients(const Tensor<T>& x, const Tensor<T>& y, LossKind loss) {
    const Tensor<T> out = forward(x);
    std::vector<LayerGrads<T>> grads(layers_.size(), LayerGrads<T>{Tensor<T>({1}), Tensor<T>({1})});
    Tensor<T> delta = dense_backward_output(layers_.back(), out, y, loss);
    for (std::size_t l = layers_.size(); l-- > 0;) {
      grads[l] = dense_param_grads(delta, *layers_[l].a_prev);
      if (l > 0) delta = dense_backward_hidden(layers_[l].weights, delta, *layers_[l - 1].z, layers_[l - 1].activation);
    }
    return grads;
  }

  T loss(const Tensor<T>& x, const Tensor<T>& y, LossKind kind) { return loss_value(kind, forward(x), y); }

  std::vector<DenseLayer<T>>& layers() { return layers_; }
  const std::vector<DenseLayer<T>>& layers() const { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
    return n;
  }

private:
  std::vector<DenseLayer<T>> layers_;
};

}  // namespace cuenet::layers

// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "cuenet/error.hpp"
#include "cuenet/layers/dense.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet::layers {

enum class Phase { train, eval };

/// Which statistics normalise a channel outside training.
enum class NormStatistics {
  per_sample,  // mean/variance of the current H x W plane, running stats untouched
  running,     // exponential running averages collected during training
};

template <typename T>
struct BatchNormParams {
  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  T epsilon = T(1e-5);
  T momentum = T(0.1);

  explicit BatchNormParams(std::size_t channels)
      : gamma({channels}, T{1}), beta({channels}, T{0}), running_mean({channels}, T{0}), running_var({channels}, T{1}) {}

  std::size_t channels() const { return gamma.dim(0); }
};

/// Normalisation over each channel's spatial plane. With batch size 1 this is
/// the only non-degenerate statistic, so training always uses the plane's own
/// mean and (biased) variance and folds them into the running averages.
template <typename T>
class BatchNorm {
public:
  explicit BatchNorm(std::size_t channels) : params(channels), grad_gamma({channels}), grad_beta({channels}) {}

  Tensor<T> forward(const Tensor<T>& input, Phase phase, NormStatistics eval_stats = NormStatistics::running) {
    if (input.rank() != 3 || input.dim(0) != params.channels()) {
      throw ShapeError("batchnorm expects [" + std::to_string(params.channels()) + ",H,W], got " +
                       dims_to_string(input.dims()));
    }
    const std::size_t c = input.dim(0), n = input.dim(1) * input.dim(2);
    const bool sample_stats = phase == Phase::train || eval_stats == NormStatistics::per_sample;
    Cache cache{Tensor<T>(input.dims()), std::vector<T>(c), sample_stats};
    Tensor<T> out(input.dims());
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T* x = input.data() + ch * n;
      double mean, var;
      if (sample_stats) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        mean = s / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (x[i] - mean) * (x[i] - mean);
        var = ss / static_cast<double>(n);
        if (phase == Phase::train) {
          const double m = params.momentum;
          params.running_mean.data()[ch] = static_cast<T>((1.0 - m) * params.running_mean.data()[ch] + m * mean);
          params.running_var.data()[ch] = static_cast<T>((1.0 - m) * params.running_var.data()[ch] + m * var);
        }
      } else {
        mean = params.running_mean.data()[ch];
        var = params.running_var.data()[ch];
      }
      const T inv_std = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(params.epsilon)));
      const T mu = static_cast<T>(mean);
      const T g = params.gamma.data()[ch], b = params.beta.data()[ch];
      T* xh = cache.normalized.data() + ch * n;
      T* y = out.data() + ch * n;
      for (std::size_t i = 0; i < n; ++i) {
        xh[i] = (x[i] - mu) * inv_std;
        y[i] = g * xh[i] + b;
      }
      cache.inv_std[ch] = inv_std;
    }
    cache_ = std::move(cache);
    return out;
  }

  Tensor<T> backward(const Tensor<T>& upstream) { return backward_into(upstream, grad_gamma, grad_beta); }

  /// Exact gradient of the normalisation, including the dependence of the
  /// plane statistics on the input when they were computed from it.
  Tensor<T> backward_into(const Tensor<T>& upstream, Tensor<T>& dgamma, Tensor<T>& dbeta) const {
    if (!cache_) throw StateError("batchnorm backward called without a cached forward");
    const Tensor<T>& xhat = cache_->normalized;
    Tensor<T>::require_same_dims(xhat, upstream, "batchnorm backward");
    const std::size_t c = xhat.dim(0), n = xhat.dim(1) * xhat.dim(2);
    Tensor<T> grad(xhat.dims());
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T* dy = upstream.data() + ch * n;
      const T* xh = xhat.data() + ch * n;
      T sum_dy{0}, sum_dy_xh{0};
      for (std::size_t i = 0; i < n; ++i) {
        sum_dy += dy[i];
        sum_dy_xh += dy[i] * xh[i];
      }
      dgamma.data()[ch] += sum_dy_xh;
      dbeta.data()[ch] += sum_dy;
      const T scale = params.gamma.data()[ch] * cache_->inv_std[ch];
      T* dx = grad.data() + ch * n;
      if (cache_->sample_stats) {
        const T inv_n = T{1} / static_cast<T>(n);
        const T mean_dy = sum_dy * inv_n, mean_dy_xh = sum_dy_xh * inv_n;
        for (std::size_t i = 0; i < n; ++i) dx[i] = scale * (dy[i] - mean_dy - xh[i] * mean_dy_xh);
      } else {
        for (std::size_t i = 0; i < n; ++i) dx[i] = scale * dy[i];
      }
    }
    return grad;
  }

  void zero_grad() {
    grad_gamma.fill(T{0});
    grad_beta.fill(T{0});
  }
  void clear_cache() { cache_.reset(); }

  BatchNormParams<T> params;
  Tensor<T> grad_gamma;
  Tensor<T> grad_beta;

private:
  struct Cache {
    Tensor<T> normalized;
    std::vector<T> inv_std;
    bool sample_stats;
  };
  std::optional<Cache> cache_;
};

template <typename T>
Tensor<T> batchnorm_forward(BatchNorm<T>& layer, const Tensor<T>& input, Phase phase,
                            NormStatistics eval_stats = NormStatistics::running) {
  return layer.forward(input, phase, eval_stats);
}

template <typename T>
std::pair<Tensor<T>, LayerGrads<T>> batchnorm_backward(const BatchNorm<T>& layer, const Tensor<T>& upstream) {
  LayerGrads<T> grads{Tensor<T>(layer.params.gamma.dims()), Tensor<T>(layer.params.beta.dims())};
  Tensor<T> grad_in = layer.backward_into(upstream, grads.weight, grads.bias);
  return {std::move(grad_in), std::move(grads)};
}

}  // namespace cuenet::layers

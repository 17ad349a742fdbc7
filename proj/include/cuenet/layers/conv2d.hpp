// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "cuenet/error.hpp"
#include "cuenet/layers/dense.hpp"
#include "cuenet/parallel.hpp"
#include "cuenet/random.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet::layers {

namespace detail {

/// Copies a [C,H,W] tensor into a zero-bordered [C,H+2p,W+2p] buffer.
template <typename T>
std::vector<T> pad_planes(const Tensor<T>& x, std::size_t pad) {
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t ph = h + 2 * pad, pw = w + 2 * pad;
  std::vector<T> out(c * ph * pw, T{0});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y) {
      const T* src = x.data() + (ch * h + y) * w;
      std::copy(src, src + w, out.data() + (ch * ph + y + pad) * pw + pad);
    }
  return out;
}

/// Accumulates a same-size correlation over a flattened padded plane of row
/// stride `stride`: out[j] += sum_{a,b} k[a,b] * in[j + a*stride + b] for
/// j < n. Row-end positions j % stride >= w are scratch and get discarded by
/// the caller. Each output element adds its K*K terms in row-major tap order;
/// nothing is reassociated.
template <typename T, int K>
void correlate_flat(const T* __restrict__ in, std::size_t stride, const T* __restrict__ k, T* __restrict__ out,
                    std::size_t n) {
  T taps[K * K];
  for (int t = 0; t < K * K; ++t) taps[t] = k[t];
  const T* rows[K];
  for (int a = 0; a < K; ++a) rows[a] = in + a * stride;
  for (std::size_t j = 0; j < n; ++j) {
    T acc = out[j];
    for (int a = 0; a < K; ++a)
      for (int b = 0; b < K; ++b) acc += taps[a * K + b] * rows[a][j + b];
    out[j] = acc;
  }
}

inline constexpr std::size_t kLanes = 16;

/// grad[a,b] += sum_j up[j] * in[j + a*stride + b], where `up` shares the
/// padded row stride and is zero on scratch positions. Partial sums live in
/// fixed lanes and are reduced in a fixed order.
template <typename T, int K>
void weight_grad_flat(const T* __restrict__ in, std::size_t stride, const T* __restrict__ up, T* __restrict__ grad,
                      std::size_t n) {
  const T* rows[K];
  for (int a = 0; a < K; ++a) rows[a] = in + a * stride;
  for (int a = 0; a < K; ++a)
    for (int b = 0; b < K; ++b) {
      T lanes[kLanes] = {};
      const T* __restrict__ r = rows[a] + b;
      std::size_t j = 0;
      for (; j + kLanes <= n; j += kLanes)
        for (std::size_t l = 0; l < kLanes; ++l) lanes[l] += up[j + l] * r[j + l];
      for (std::size_t l = 0; j < n; ++j, ++l) lanes[l] += up[j] * r[j];
      T s{0};
      for (std::size_t l = 0; l < kLanes; ++l) s += lanes[l];
      grad[a * K + b] += s;
    }
}

template <typename T>
void correlate_dispatch(std::size_t kernel, const T* in, std::size_t stride, const T* k, T* out, std::size_t n) {
  switch (kernel) {
    case 1: correlate_flat<T, 1>(in, stride, k, out, n); return;
    case 3: correlate_flat<T, 3>(in, stride, k, out, n); return;
    case 5: correlate_flat<T, 5>(in, stride, k, out, n); return;
    default: throw ShapeError("unsupported kernel size " + std::to_string(kernel));
  }
}

template <typename T>
void weight_grad_dispatch(std::size_t kernel, const T* in, std::size_t stride, const T* up, T* grad, std::size_t n) {
  switch (kernel) {
    case 1: weight_grad_flat<T, 1>(in, stride, up, grad, n); return;
    case 3: weight_grad_flat<T, 3>(in, stride, up, grad, n); return;
    case 5: weight_grad_flat<T, 5>(in, stride, up, grad, n); return;
    default: throw ShapeError("unsupported kernel size " + std::to_string(kernel));
  }
}

}  // namespace detail

/// Same-size 2-D cross-correlation: stride 1, zero padding (k-1)/2 per side,
/// per-output-channel bias. Kernels are [out_ch, in_ch, k, k] with odd k.
template <typename T>
class Conv2d {
public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel = 3)
      : weight({out_channels, in_channels, kernel, kernel}),
        bias({out_channels}),
        grad_weight(weight.dims()),
        grad_bias(bias.dims()) {
    if (kernel != 1 && kernel != 3 && kernel != 5) throw ShapeError("kernel size must be 1, 3 or 5");
  }

  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t out_channels() const { return weight.dim(0); }
  std::size_t kernel() const { return weight.dim(2); }
  std::size_t padding() const { return (kernel() - 1) / 2; }

  /// Kaiming fan-in normal weights, zero bias.
  void init_kaiming(SplitMix64& rng) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(in_channels() * kernel() * kernel()));
    for (auto& v : weight) v = static_cast<T>(rng.normal() * stddev);
    bias.fill(T{0});
  }

  Tensor<T> forward(const Tensor<T>& input) {
    check_input(input);
    const std::size_t h = input.dim(1), w = input.dim(2), k = kernel(), p = padding();
    const std::size_t cin = in_channels();
    const std::size_t pw = w + 2 * p, plane = (h + 2 * p) * pw, n = (h - 1) * pw + w;
    const std::vector<T> padded = detail::pad_planes(input, p);
    Tensor<T> out({out_channels(), h, w});
    parallel_for(out_channels(), [&](std::size_t co) {
      std::vector<T> acc(h * pw, T{0});
      for (std::size_t ci = 0; ci < cin; ++ci) {
        detail::correlate_dispatch(k, padded.data() + ci * plane, pw, weight.data() + (co * cin + ci) * k * k,
                                   acc.data(), n);
      }
      const T b = bias.data()[co];
      T* dst = out.data() + co * h * w;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) dst[y * w + x] = acc[y * pw + x] + b;
    });
    cache_ = input;
    return out;
  }

  /// Accumulates parameter gradients into grad_weight/grad_bias and returns
  /// the gradient with respect to the cached input.
  Tensor<T> backward(const Tensor<T>& upstream, bool need_input_grad = true) {
    return backward_into(upstream, grad_weight, grad_bias, need_input_grad);
  }

  /// With need_input_grad == false only parameter gradients are computed and a
  /// zero tensor of the input dims is returned.
  Tensor<T> backward_into(const Tensor<T>& upstream, Tensor<T>& gw, Tensor<T>& gb, bool need_input_grad = true) const {
    if (!cache_) throw StateError("conv2d backward called without a cached forward");
    const Tensor<T>& input = *cache_;
    const std::size_t h = input.dim(1), w = input.dim(2), k = kernel(), p = padding();
    const std::size_t cin = in_channels(), cout = out_channels();
    if (upstream.dims() != Dims{cout, h, w}) {
      throw ShapeError("conv2d backward: upstream " + dims_to_string(upstream.dims()) + " does not match output");
    }
    const std::size_t pw = w + 2 * p, plane = (h + 2 * p) * pw, n = (h - 1) * pw + w;

    // Upstream re-laid with the padded row stride, zero on scratch columns.
    std::vector<T> up_strided(cout * h * pw, T{0});
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t y = 0; y < h; ++y) {
        const T* src = upstream.data() + (co * h + y) * w;
        std::copy(src, src + w, up_strided.data() + (co * h + y) * pw);
      }

    const std::vector<T> padded_in = detail::pad_planes(input, p);
    parallel_for(cout, [&](std::size_t co) {
      const T* up = upstream.data() + co * h * w;
      T s{0};
      for (std::size_t i = 0; i < h * w; ++i) s += up[i];
      gb.data()[co] += s;
      const T* ups = up_strided.data() + co * h * pw;
      for (std::size_t ci = 0; ci < cin; ++ci) {
        detail::weight_grad_dispatch(k, padded_in.data() + ci * plane, pw, ups, gw.data() + (co * cin + ci) * k * k,
                                     n);
      }
    });

    Tensor<T> grad_in({cin, h, w});
    if (!need_input_grad) return grad_in;

    // Input gradient: full correlation of upstream with 180-degree rotated kernels.
    const std::vector<T> padded_up = detail::pad_planes(upstream, p);
    parallel_for(cin, [&](std::size_t ci) {
      std::vector<T> flipped(k * k);
      std::vector<T> acc(h * pw, T{0});
      for (std::size_t co = 0; co < cout; ++co) {
        const T* src = weight.data() + (co * cin + ci) * k * k;
        for (std::size_t t = 0; t < k * k; ++t) flipped[t] = src[k * k - 1 - t];
        detail::correlate_dispatch(k, padded_up.data() + co * plane, pw, flipped.data(), acc.data(), n);
      }
      T* dst = grad_in.data() + ci * h * w;
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) dst[y * w + x] = acc[y * pw + x];
    });
    return grad_in;
  }

  void zero_grad() {
    grad_weight.fill(T{0});
    grad_bias.fill(T{0});
  }

  bool has_cache() const { return cache_.has_value(); }
  void clear_cache() { cache_.reset(); }

  Tensor<T> weight;
  Tensor<T> bias;
  Tensor<T> grad_weight;
  Tensor<T> grad_bias;

private:
  void check_input(const Tensor<T>& input) const {
    if (input.rank() != 3) throw ShapeError("conv2d expects [C,H,W], got " + dims_to_string(input.dims()));
    if (input.dim(0) != in_channels()) {
      throw ShapeError("conv2d channel mismatch: layer expects " + std::to_string(in_channels()) + ", input has " +
                       std::to_string(input.dim(0)));
    }
  }

  std::optional<Tensor<T>> cache_;
};

template <typename T>
Tensor<T> conv2d_forward(Conv2d<T>& layer, const Tensor<T>& input) {
  return layer.forward(input);
}

/// Backward pass returning fresh gradients; the layer's own accumulators are
/// left untouched.
template <typename T>
std::pair<Tensor<T>, LayerGrads<T>> conv2d_backward(const Conv2d<T>& layer, const Tensor<T>& upstream) {
  LayerGrads<T> grads{Tensor<T>(layer.weight.dims()), Tensor<T>(layer.bias.dims())};
  Tensor<T> grad_in = layer.backward_into(upstream, grads.weight, grads.bias);
  return {std::move(grad_in), std::move(grads)};
}

}  // namespace cuenet::layers

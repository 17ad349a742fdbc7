// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cuenet/error.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet::layers {

namespace detail {
inline void require_even_chw(const Dims& d, const char* op) {
  if (d.size() != 3) throw ShapeError(std::string(op) + " expects [C,H,W], got " + dims_to_string(d));
  if (d[1] % 2 != 0 || d[2] % 2 != 0) {
    throw ShapeError(std::string(op) + " needs even H and W, got " + dims_to_string(d));
  }
}
}  // namespace detail

/// Flat input offsets of each pooled maximum, plus the input dims they index.
struct PoolIndices {
  Dims input_dims;
  std::vector<std::size_t> argmax;
};

/// 2x2 max pooling, stride 2. Ties resolve to the first element in row-major
/// block order.
template <typename T>
std::pair<Tensor<T>, PoolIndices> maxpool2x2_forward(const Tensor<T>& input) {
  detail::require_even_chw(input.dims(), "maxpool2x2");
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t oh = h / 2, ow = w / 2;
  Tensor<T> out({c, oh, ow});
  PoolIndices idx{input.dims(), std::vector<std::size_t>(out.size())};
  const T* src = input.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        const std::size_t base = (ch * h + 2 * y) * w + 2 * x;
        const std::size_t cand[4] = {base, base + 1, base + w, base + w + 1};
        std::size_t best = cand[0];
        for (int i = 1; i < 4; ++i)
          if (src[cand[i]] > src[best]) best = cand[i];
        const std::size_t o = (ch * oh + y) * ow + x;
        out.data()[o] = src[best];
        idx.argmax[o] = best;
      }
  return {std::move(out), std::move(idx)};
}

template <typename T>
Tensor<T> maxpool2x2_backward(const PoolIndices& indices, const Tensor<T>& upstream) {
  if (indices.argmax.size() != upstream.size() || indices.input_dims.size() != 3 ||
      upstream.dims() != Dims{indices.input_dims[0], indices.input_dims[1] / 2, indices.input_dims[2] / 2}) {
    throw StateError("maxpool2x2_backward: indices do not belong to this upstream gradient");
  }
  Tensor<T> grad(indices.input_dims);
  for (std::size_t o = 0; o < upstream.size(); ++o) grad.data()[indices.argmax[o]] += upstream.data()[o];
  return grad;
}

/// Mean of each disjoint 2x2 block.
template <typename T>
Tensor<T> avgpool2x2(const Tensor<T>& input) {
  detail::require_even_chw(input.dims(), "avgpool2x2");
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  Tensor<T> out({c, h / 2, w / 2});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h / 2; ++y)
      for (std::size_t x = 0; x < w / 2; ++x) {
        const T* p = input.data() + (ch * h + 2 * y) * w + 2 * x;
        out.at(ch, y, x) = (p[0] + p[1] + p[w] + p[w + 1]) / T{4};
      }
  return out;
}

template <typename T>
class MaxPool2x2 {
public:
  Tensor<T> forward(const Tensor<T>& input) {
    auto [out, idx] = maxpool2x2_forward(input);
    indices_ = std::move(idx);
    return out;
  }
  Tensor<T> backward(const Tensor<T>& upstream) const {
    if (!indices_) throw StateError("maxpool backward called without a cached forward");
    return maxpool2x2_backward(*indices_, upstream);
  }
  void clear_cache() { indices_.reset(); }
  const std::optional<PoolIndices>& cached_indices() const { return indices_; }

private:
  std::optional<PoolIndices> indices_;
};

/// Nearest-neighbour 2x upsampling: every pixel becomes a 2x2 block.
template <typename T>
Tensor<T> upsample2x2_forward(const Tensor<T>& input) {
  if (input.rank() != 3) throw ShapeError("upsample2x2 expects [C,H,W], got " + dims_to_string(input.dims()));
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  Tensor<T> out({c, 2 * h, 2 * w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < 2 * h; ++y) {
      const T* src = input.data() + (ch * h + y / 2) * w;
      T* dst = out.data() + (ch * 2 * h + y) * 2 * w;
      for (std::size_t x = 0; x < 2 * w; ++x) dst[x] = src[x / 2];
    }
  return out;
}

/// Sums the upstream gradient over each 2x2 block.
template <typename T>
Tensor<T> upsample2x2_backward(const Tensor<T>& upstream) {
  detail::require_even_chw(upstream.dims(), "upsample2x2_backward");
  const std::size_t c = upstream.dim(0), h = upstream.dim(1) / 2, w = upstream.dim(2) / 2;
  Tensor<T> grad({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const T* p = upstream.data() + (ch * 2 * h + 2 * y) * 2 * w + 2 * x;
        grad.at(ch, y, x) = p[0] + p[1] + p[2 * w] + p[2 * w + 1];
      }
  return grad;
}

template <typename T>
class Upsample2x2 {
public:
  Tensor<T> forward(const Tensor<T>& input) { return upsample2x2_forward(input); }
  Tensor<T> backward(const Tensor<T>& upstream) const { return upsample2x2_backward(upstream); }
  void clear_cache() {}
};

}  // namespace cuenet::layers

// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cuenet/error.hpp"

namespace cuenet {

using Dims = std::vector<std::size_t>;

inline std::string dims_to_string(const Dims& dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ',';
    os << dims[i];
  }
  os << ']';
  return os.str();
}

/// Image geometry: height x width pixels with a channel count.
struct Shape2D {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  Shape2D() = default;
  Shape2D(std::size_t h, std::size_t w, std::size_t c) : height(h), width(w), channels(c) {
    if (h == 0 || w == 0 || c == 0) throw ShapeError("Shape2D requires strictly positive extents");
  }

  std::size_t pixels() const noexcept { return height * width; }
  Dims chw() const { return {channels, height, width}; }
  friend bool operator==(const Shape2D&, const Shape2D&) = default;
};

/// Dense row-major n-dimensional array. Rank is always >= 1; a scalar is a
/// rank-1 tensor of dims [1].
template <typename T>
class Tensor {
public:
  using value_type = T;

  explicit Tensor(Dims dims, T fill = T{}) : dims_(std::move(dims)) {
    data_.assign(checked_size(dims_), fill);
  }

  Tensor(Dims dims, std::vector<T> data) : dims_(std::move(dims)), data_(std::move(data)) {
    if (data_.size() != checked_size(dims_)) {
      throw ShapeError("data length " + std::to_string(data_.size()) + " does not match dims " +
                       dims_to_string(dims_));
    }
  }

  Tensor(Dims dims, std::initializer_list<T> values) : Tensor(std::move(dims), std::vector<T>(values)) {}

  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t axis) const {
    if (axis >= dims_.size()) throw IndexError("axis " + std::to_string(axis) + " out of range");
    return dims_[axis];
  }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  T& operator[](std::size_t flat) {
    check_flat(flat);
    return data_[flat];
  }
  const T& operator[](std::size_t flat) const {
    check_flat(flat);
    return data_[flat];
  }

  template <typename... Idx>
  T& at(Idx... idx) {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  template <typename... Idx>
  const T& at(Idx... idx) const {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  /// Row-major flat offset of a coordinate; every component is range-checked.
  std::size_t offset(std::span<const std::size_t> coords) const {
    if (coords.size() != dims_.size()) {
      throw IndexError("expected " + std::to_string(dims_.size()) + " coordinates, got " +
                       std::to_string(coords.size()));
    }
    std::size_t flat = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (coords[k] >= dims_[k]) {
        throw IndexError("coordinate " + std::to_string(coords[k]) + " out of range for axis " +
                         std::to_string(k) + " of " + dims_to_string(dims_));
      }
      flat = flat * dims_[k] + coords[k];
    }
    return flat;
  }
  std::size_t offset(std::initializer_list<std::size_t> coords) const {
    return offset(std::span<const std::size_t>(coords.begin(), coords.size()));
  }

  Dims coords(std::size_t flat) const {
    check_flat(flat);
    Dims out(dims_.size());
    for (std::size_t k = dims_.size(); k-- > 0;) {
      out[k] = flat % dims_[k];
      flat /= dims_[k];
    }
    return out;
  }

  Dims strides() const {
    Dims s(dims_.size(), 1);
    for (std::size_t k = dims_.size(); k-- > 1;) s[k - 1] = s[k] * dims_[k];
    return s;
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  Tensor reshaped(Dims dims) const {
    if (checked_size(dims) != data_.size()) {
      throw ShapeError("cannot reshape " + dims_to_string(dims_) + " to " + dims_to_string(dims));
    }
    return Tensor(std::move(dims), data_);
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(), [](T v) { return static_cast<U>(v); });
    return Tensor<U>(dims_, std::move(out));
  }

  /// In-place accumulation; requires exclusive access.
  Tensor& operator+=(const Tensor& other) {
    require_same_dims(*this, other, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  Tensor& operator*=(T scale) {
    for (auto& v : data_) v *= scale;
    return *this;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) { return a.dims_ == b.dims_ && a.data_ == b.data_; }

  static void require_same_dims(const Tensor& a, const Tensor& b, const char* op) {
    if (a.dims_ != b.dims_) {
      throw ShapeError(std::string(op) + ": dims " + dims_to_string(a.dims_) + " vs " + dims_to_string(b.dims_));
    }
  }

private:
  static std::size_t checked_size(const Dims& dims) {
    if (dims.empty()) throw ShapeError("rank-0 tensors are not allowed");
    std::size_t n = 1;
    for (auto d : dims) {
      if (d == 0) throw ShapeError("tensor dims must be positive, got " + dims_to_string(dims));
      n *= d;
    }
    return n;
  }

  void check_flat(std::size_t flat) const {
    if (flat >= data_.size()) {
      throw IndexError("flat index " + std::to_string(flat) + " out of range for size " +
                       std::to_string(data_.size()));
    }
  }

  Dims dims_;
  std::vector<T> data_;
};

template <typename T>
Tensor<T> tensor_new(Dims dims, T fill) {
  return Tensor<T>(std::move(dims), fill);
}

template <typename T>
Tensor<T> hadamard(const Tensor<T>& a, const Tensor<T>& b) {
  Tensor<T>::require_same_dims(a, b, "hadamard");
  Tensor<T> out(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  Tensor<T> out = a;
  out += b;
  return out;
}

template <typename T>
Tensor<T> subtract(const Tensor<T>& a, const Tensor<T>& b) {
  Tensor<T>::require_same_dims(a, b, "subtract");
  Tensor<T> out(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  return out;
}

/// result[j] = sum_k w[j,k] * a[k]
template <typename T>
Tensor<T> matvec(const Tensor<T>& w, const Tensor<T>& a) {
  if (w.rank() != 2 || a.rank() != 1) throw ShapeError("matvec expects a rank-2 matrix and a rank-1 vector");
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  if (a.dim(0) != cols) {
    throw ShapeError("matvec inner dimension mismatch: " + dims_to_string(w.dims()) + " x " +
                     dims_to_string(a.dims()));
  }
  Tensor<T> out({rows});
  for (std::size_t j = 0; j < rows; ++j) {
    T acc{};
    const T* row = w.data() + j * cols;
    for (std::size_t k = 0; k < cols; ++k) acc += row[k] * a.data()[k];
    out.data()[j] = acc;
  }
  return out;
}

template <typename T>
Tensor<T> transpose2d(const Tensor<T>& w) {
  if (w.rank() != 2) throw ShapeError("transpose2d expects rank 2, got " + dims_to_string(w.dims()));
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  Tensor<T> out({cols, rows});
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t k = 0; k < cols; ++k) out.data()[k * rows + j] = w.data()[j * cols + k];
  return out;
}

template <typename T, typename F>
Tensor<T> map_elementwise(const Tensor<T>& a, F&& f) {
  Tensor<T> out(a.dims());
  std::transform(a.begin(), a.end(), out.begin(), std::forward<F>(f));
  return out;
}

template <typename T>
T sum(const Tensor<T>& a) {
  return std::accumulate(a.begin(), a.end(), T{});
}

}  // namespace cuenet

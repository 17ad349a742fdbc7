// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>

#include "cuenet/error.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet {

/// Pixel coordinates: x along the width, y along the height.
struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

namespace data {

/// Gaussian blob around `center`, normalised so the map sums to 1.
template <typename T = float>
Tensor<T> gaussian_heatmap(Point center, double sigma, std::size_t height, std::size_t width) {
  if (!(sigma > 0.0)) throw DataError(DataErrorKind::out_of_range, "heatmap sigma must be positive");
  if (center.x < 0.0 || center.y < 0.0 || center.x > static_cast<double>(width - 1) ||
      center.y > static_cast<double>(height - 1)) {
    throw DataError(DataErrorKind::center_out_of_bounds, "heatmap center outside the frame");
  }
  std::vector<double> v(height * width);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  double total = 0.0;
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const double dx = static_cast<double>(x) - center.x, dy = static_cast<double>(y) - center.y;
      const double e = std::exp(-(dx * dx + dy * dy) * inv);
      v[y * width + x] = e;
      total += e;
    }
  Tensor<T> out({1, height, width});
  for (std::size_t i = 0; i < v.size(); ++i) out.data()[i] = static_cast<T>(v[i] / total);
  return out;
}

}  // namespace data
}  // namespace cuenet

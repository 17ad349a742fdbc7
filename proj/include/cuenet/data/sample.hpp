// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "cuenet/data/heatmap.hpp"
#include "cuenet/error.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet::data {

inline constexpr double kDefaultSigma = 2.0;

/// One training example: a [C,H,W] frame stack in [0,1], the ball center in
/// the newest frame and the heatmap label derived from it.
struct Sample {
  Tensor<float> frames;
  Point center;
  Tensor<float> label;
  std::int64_t frame_index = 0;
  /// Second ball, present only in multi-object sequences.
  std::optional<Point> second_center;

  std::size_t channels() const { return frames.dim(0); }
  std::size_t height() const { return frames.dim(1); }
  std::size_t width() const { return frames.dim(2); }
};

/// Builds a sample and its label; rejects centers outside the frame.
inline Sample make_sample(Tensor<float> frames, Point center, double sigma, std::int64_t frame_index,
                          std::optional<Point> second_center = std::nullopt) {
  if (frames.rank() != 3) throw ShapeError("sample frames must be [C,H,W], got " + dims_to_string(frames.dims()));
  const std::size_t h = frames.dim(1), w = frames.dim(2);
  Tensor<float> label = gaussian_heatmap<float>(center, sigma, h, w);
  return Sample{std::move(frames), center, std::move(label), frame_index, second_center};
}

}  // namespace cuenet::data

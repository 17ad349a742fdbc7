// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "cuenet/data/sample.hpp"
#include "cuenet/error.hpp"
#include "cuenet/random.hpp"

namespace cuenet::data {

/// Ranges for random photometric and geometric perturbation.
struct AugmentParams {
  double max_rotation_deg = 5.0;
  double max_brightness = 0.15;
  double contrast_min = 0.8;
  double contrast_max = 1.25;
  double label_sigma = kDefaultSigma;

  void validate() const {
    if (max_rotation_deg < 0.0 || max_brightness < 0.0) throw ConfigError("augmentation ranges must be nonnegative");
    if (!(contrast_min > 0.0) || contrast_max < contrast_min) {
      throw ConfigError("contrast range must satisfy 0 < min <= max");
    }
  }
};

/// One concrete perturbation.
struct AugmentDraw {
  double rotation_deg = 0.0;
  double brightness = 0.0;
  double contrast = 1.0;
  bool is_identity() const { return rotation_deg == 0.0 && brightness == 0.0 && contrast == 1.0; }
};

inline AugmentDraw draw_augment(const AugmentParams& params, std::uint64_t seed) {
  params.validate();
  SplitMix64 rng(seed);
  AugmentDraw d;
  d.rotation_deg = rng.uniform(-params.max_rotation_deg, params.max_rotation_deg);
  d.brightness = rng.uniform(-params.max_brightness, params.max_brightness);
  // Log-uniform so that x0.8 and x1.25 are equally likely.
  d.contrast = std::exp(rng.uniform(std::log(params.contrast_min), std::log(params.contrast_max)));
  return d;
}

namespace detail {

/// Rotation about the frame center by `deg` (image axes, y down).
struct Rotation {
  double cx, cy, c, s;
  Rotation(double deg, std::size_t h, std::size_t w)
      : cx((static_cast<double>(w) - 1.0) / 2.0),
        cy((static_cast<double>(h) - 1.0) / 2.0),
        c(std::cos(deg * std::numbers::pi / 180.0)),
        s(std::sin(deg * std::numbers::pi / 180.0)) {}

  Point forward(Point p) const {
    const double dx = p.x - cx, dy = p.y - cy;
    return {snap(cx + c * dx - s * dy), snap(cy + s * dx + c * dy)};
  }
  Point inverse(Point p) const {
    const double dx = p.x - cx, dy = p.y - cy;
    return {snap(cx + c * dx + s * dy), snap(cy - s * dx + c * dy)};
  }
  // Right-angle rotations land on the pixel grid up to rounding noise.
  static double snap(double v) {
    const double r = std::round(v);
    return std::abs(v - r) < 1e-9 ? r : v;
  }
};

inline bool inside(Point p, std::size_t h, std::size_t w) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= static_cast<double>(w) - 1.0 && p.y <= static_cast<double>(h) - 1.0;
}

}  // namespace detail

/// Applies rotation (bilinear, zero fill), brightness offset and contrast
/// about the mean, identically to every channel, then clamps to [0,1]. The
/// centers are rotated with the image and the label is regenerated. Throws
/// if a rotated center leaves the frame.
inline Sample apply_augment(const Sample& sample, const AugmentDraw& draw, double label_sigma) {
  if (draw.is_identity()) return sample;
  if (!(draw.contrast > 0.0)) throw ConfigError("contrast factor must be positive");
  const std::size_t c = sample.channels(), h = sample.height(), w = sample.width();
  Tensor<float> frames = sample.frames;
  Point center = sample.center;
  std::optional<Point> second = sample.second_center;

  if (draw.rotation_deg != 0.0) {
    const detail::Rotation rot(draw.rotation_deg, h, w);
    center = rot.forward(center);
    if (!detail::inside(center, h, w)) {
      throw DataError(DataErrorKind::center_out_of_bounds, "rotation moves the ball center outside the frame");
    }
    if (second) {
      second = rot.forward(*second);
      if (!detail::inside(*second, h, w)) {
        throw DataError(DataErrorKind::center_out_of_bounds, "rotation moves the second ball outside the frame");
      }
    }
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const Point src = rot.inverse({static_cast<double>(x), static_cast<double>(y)});
        const double fx = std::floor(src.x), fy = std::floor(src.y);
        const double ax = src.x - fx, ay = src.y - fy;
        const auto x0 = static_cast<long>(fx), y0 = static_cast<long>(fy);
        for (std::size_t ch = 0; ch < c; ++ch) {
          const float* plane = sample.frames.data() + ch * h * w;
          auto px = [&](long xx, long yy) -> double {
            if (xx < 0 || yy < 0 || xx >= static_cast<long>(w) || yy >= static_cast<long>(h)) return 0.0;
            return plane[static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx)];
          };
          double v = (1 - ax) * (1 - ay) * px(x0, y0);
          if (ax != 0.0) v += ax * (1 - ay) * px(x0 + 1, y0);
          if (ay != 0.0) v += (1 - ax) * ay * px(x0, y0 + 1);
          if (ax != 0.0 && ay != 0.0) v += ax * ay * px(x0 + 1, y0 + 1);
          frames.data()[(ch * h + y) * w + x] = static_cast<float>(v);
        }
      }
  }

  if (draw.brightness != 0.0 || draw.contrast != 1.0) {
    double mean = 0.0;
    for (float v : frames) mean += static_cast<double>(v) + draw.brightness;
    mean /= static_cast<double>(frames.size());
    for (auto& v : frames) {
      const double shifted = static_cast<double>(v) + draw.brightness;
      v = static_cast<float>(std::clamp((shifted - mean) * draw.contrast + mean, 0.0, 1.0));
    }
  }

  return make_sample(std::move(frames), center, label_sigma, sample.frame_index, second);
}

inline Sample augment(const Sample& sample, const AugmentParams& params, std::uint64_t seed) {
  return apply_augment(sample, draw_augment(params, seed), params.label_sigma);
}

}  // namespace cuenet::data

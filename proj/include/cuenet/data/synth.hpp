// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "cuenet/data/pgm.hpp"
#include "cuenet/data/sample.hpp"
#include "cuenet/error.hpp"
#include "cuenet/random.hpp"

namespace cuenet::data {

/// Parameters of a rendered labyrinth sequence. Distances are in pixels and
/// speeds in pixels per frame.
struct SynthConfig {
  std::size_t width = 240;
  std::size_t height = 180;
  std::size_t length = 500;
  double ball_radius = 4.0;
  double min_speed = 1.0;
  double max_speed = 4.0;
  /// Per-frame chance that the ball picks a new velocity.
  double turn_probability = 0.05;
  std::uint64_t layout_seed = 1;
  std::uint64_t seed = 1;
  /// Per-frame chance that a new hand-like occluder enters (at most two at once).
  double occluder_probability = 0.0;
  bool shadow = false;
  /// Frames per full revolution of the shadow sweep.
  double shadow_period = 240.0;
  double shadow_depth = 0.65;
  double noise = 0.02;
  bool two_balls = false;
  double min_ball_separation = 10.0;
  double label_sigma = kDefaultSigma;

  void validate() const {
    if (ball_radius < 1.0) throw DataError(DataErrorKind::infeasible_config, "ball radius must be >= 1");
    if (width == 0 || height == 0 || length == 0) {
      throw DataError(DataErrorKind::infeasible_config, "frame dims and length must be positive");
    }
    const double r = std::ceil(ball_radius);
    if (2.0 * r + 2.0 > static_cast<double>(std::min(width, height))) {
      throw DataError(DataErrorKind::infeasible_config, "ball does not fit inside the frame");
    }
    if (min_speed < 0.0 || max_speed < 1.0 || max_speed < min_speed) {
      throw DataError(DataErrorKind::infeasible_config, "speed range must satisfy 0 <= min <= max, max >= 1");
    }
    if (occluder_probability < 0.0 || occluder_probability > 1.0 || turn_probability < 0.0 ||
        turn_probability > 1.0) {
      throw DataError(DataErrorKind::infeasible_config, "probabilities must lie in [0,1]");
    }
    if (two_balls && 2.0 * (2.0 * r + 2.0) + min_ball_separation > static_cast<double>(width + height)) {
      throw DataError(DataErrorKind::infeasible_config, "frame too small for two separated balls");
    }
  }
};

namespace detail {

struct IntVec {
  long x = 0;
  long y = 0;
};

/// Integer velocity with min <= |v| <= max.
inline IntVec draw_velocity(SplitMix64& rng, double min_speed, double max_speed) {
  const long lim = static_cast<long>(std::floor(max_speed));
  for (;;) {
    const IntVec v{static_cast<long>(rng.below(static_cast<std::uint64_t>(2 * lim + 1))) - lim,
                   static_cast<long>(rng.below(static_cast<std::uint64_t>(2 * lim + 1))) - lim};
    const double speed = std::hypot(static_cast<double>(v.x), static_cast<double>(v.y));
    if (speed >= std::max(min_speed, 0.5) && speed <= max_speed) return v;
  }
}

/// Moves along one axis, reflecting off [lo, hi].
inline long reflect_step(long pos, long& vel, long lo, long hi) {
  long next = pos + vel;
  if (next < lo) {
    next = 2 * lo - next;
    vel = -vel;
  } else if (next > hi) {
    next = 2 * hi - next;
    vel = -vel;
  }
  return std::clamp(next, lo, hi);
}

struct Ball {
  IntVec pos;
  IntVec vel;
};

struct Occluder {
  double x, y, w, h;
  double vx, vy;
  int frames_left;
  float intensity;
};

/// Static board: shaded floor, raised walls and dark holes.
inline std::vector<float> render_board(const SynthConfig& cfg) {
  const std::size_t w = cfg.width, h = cfg.height;
  SplitMix64 rng(cfg.layout_seed);
  std::vector<float> board(w * h);
  const double fx = rng.uniform(0.5, 2.0), fy = rng.uniform(0.5, 2.0), ph = rng.uniform(0.0, 6.3);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double u = static_cast<double>(x) / static_cast<double>(w), v = static_cast<double>(y) / static_cast<double>(h);
      board[y * w + x] = static_cast<float>(0.40 + 0.05 * std::sin(2 * std::numbers::pi * (fx * u + fy * v) + ph));
    }
  const double scale = static_cast<double>(std::min(w, h));
  const long thickness = std::max(1L, std::lround(cfg.ball_radius / 2.0));
  const int walls = 6;
  for (int i = 0; i < walls; ++i) {
    const bool horizontal = rng.below(2) == 0;
    const double len = rng.uniform(0.2, 0.5) * scale;
    const long x0 = static_cast<long>(rng.below(w)), y0 = static_cast<long>(rng.below(h));
    const long x1 = horizontal ? x0 + static_cast<long>(len) : x0 + thickness;
    const long y1 = horizontal ? y0 + thickness : y0 + static_cast<long>(len);
    for (long y = y0; y < std::min<long>(y1, static_cast<long>(h)); ++y)
      for (long x = x0; x < std::min<long>(x1, static_cast<long>(w)); ++x)
        board[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = 0.68f;
  }
  const int holes = 5;
  const double hole_r = cfg.ball_radius * 1.5;
  for (int i = 0; i < holes; ++i) {
    const double cx = rng.uniform(0.0, static_cast<double>(w)), cy = rng.uniform(0.0, static_cast<double>(h));
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        if (std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cy) <= hole_r) board[y * w + x] = 0.08f;
  }
  return board;
}

/// Shaded disc: brightest at the center, anti-aliased rim.
inline void draw_ball(std::vector<float>& img, std::size_t w, std::size_t h, IntVec c, double r) {
  const long reach = static_cast<long>(std::ceil(r)) + 1;
  for (long y = c.y - reach; y <= c.y + reach; ++y)
    for (long x = c.x - reach; x <= c.x + reach; ++x) {
      if (x < 0 || y < 0 || x >= static_cast<long>(w) || y >= static_cast<long>(h)) continue;
      const double d = std::hypot(static_cast<double>(x - c.x), static_cast<double>(y - c.y));
      const double cover = std::clamp(r + 0.5 - d, 0.0, 1.0);
      if (cover <= 0.0) continue;
      const double shade = 0.97 - 0.25 * std::min(1.0, (d / r) * (d / r));
      float& px = img[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
      px = static_cast<float>(cover * shade + (1.0 - cover) * px);
    }
}

}  // namespace detail

/// Deterministic labyrinth sequence of single-channel frames with exact
/// integer ball centers. Optional hand-like occluders never cover a ball, and
/// the optional shadow is a soft half-plane sweeping around the board. Pixel
/// values are quantised to k/255 so an exported dataset loads back exactly.
inline std::vector<Sample> synth_sequence(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t w = cfg.width, h = cfg.height;
  const std::vector<float> board = detail::render_board(cfg);
  SplitMix64 rng(cfg.seed);
  SplitMix64 noise_rng = SplitMix64::derive(cfg.seed, 0x6E6F697365ULL);
  const long margin = static_cast<long>(std::ceil(cfg.ball_radius));
  const long lo_x = margin, hi_x = static_cast<long>(w) - 1 - margin;
  const long lo_y = margin, hi_y = static_cast<long>(h) - 1 - margin;

  auto spawn = [&]() {
    return detail::Ball{{lo_x + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi_x - lo_x + 1))),
                         lo_y + static_cast<long>(rng.below(static_cast<std::uint64_t>(hi_y - lo_y + 1)))},
                        detail::draw_velocity(rng, cfg.min_speed, cfg.max_speed)};
  };
  auto dist = [](detail::IntVec a, detail::IntVec b) {
    return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
  };

  std::vector<detail::Ball> balls{spawn()};
  if (cfg.two_balls) {
    detail::Ball second = spawn();
    for (int tries = 0; dist(second.pos, balls[0].pos) < cfg.min_ball_separation && tries < 10000; ++tries)
      second = spawn();
    if (dist(second.pos, balls[0].pos) < cfg.min_ball_separation) {
      throw DataError(DataErrorKind::infeasible_config, "cannot place two separated balls");
    }
    balls.push_back(second);
  }

  std::vector<detail::Occluder> occluders;
  const double shadow_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<Sample> out;
  out.reserve(cfg.length);
  std::vector<float> img(w * h);

  for (std::size_t t = 0; t < cfg.length; ++t) {
    if (t > 0) {
      std::vector<detail::Ball> next = balls;
      for (auto& b : next) {
        if (rng.uniform() < cfg.turn_probability) b.vel = detail::draw_velocity(rng, cfg.min_speed, cfg.max_speed);
        b.pos.x = detail::reflect_step(b.pos.x, b.vel.x, lo_x, hi_x);
        b.pos.y = detail::reflect_step(b.pos.y, b.vel.y, lo_y, hi_y);
      }
      if (next.size() == 2 && dist(next[0].pos, next[1].pos) < cfg.min_ball_separation) {
        // Collision: both balls stay put this frame and bounce back.
        for (auto& b : balls) b.vel = {-b.vel.x, -b.vel.y};
      } else {
        balls = next;
      }
    }

    img = board;
    for (const auto& b : balls) detail::draw_ball(img, w, h, b.pos, cfg.ball_radius);

    if (cfg.occluder_probability > 0.0) {
      if (occluders.size() < 2 && rng.uniform() < cfg.occluder_probability) {
        const double ow = rng.uniform(0.2, 0.35) * static_cast<double>(w);
        const double oh = rng.uniform(0.25, 0.45) * static_cast<double>(h);
        const bool from_left = rng.below(2) == 0;
        const double speed = rng.uniform(0.3, 1.0) * std::max(1.0, static_cast<double>(w) / 120.0);
        occluders.push_back({from_left ? -ow * 0.5 : static_cast<double>(w) - ow * 0.5,
                             rng.uniform(-0.1, 0.8) * static_cast<double>(h), ow, oh, from_left ? speed : -speed,
                             rng.uniform(-0.3, 0.3), static_cast<int>(rng.below(60)) + 30,
                             static_cast<float>(rng.uniform(0.7, 0.9))});
      }
      const double keep_out = cfg.ball_radius + 1.5;
      for (auto& o : occluders) {
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t x = 0; x < w; ++x) {
            const double fx = static_cast<double>(x), fy = static_cast<double>(y);
            if (fx < o.x || fx >= o.x + o.w || fy < o.y || fy >= o.y + o.h) continue;
            bool near_ball = false;
            for (const auto& b : balls)
              near_ball = near_ball || std::hypot(fx - static_cast<double>(b.pos.x),
                                                  fy - static_cast<double>(b.pos.y)) <= keep_out;
            if (near_ball) continue;
            // Knuckle-like ridges so the occluder is not a flat block.
            const double ridge = 0.06 * std::sin(0.9 * (fx - o.x));
            img[y * w + x] = static_cast<float>(o.intensity + ridge);
          }
        o.x += o.vx;
        o.y += o.vy;
        --o.frames_left;
      }
      std::erase_if(occluders, [](const detail::Occluder& o) { return o.frames_left <= 0; });
    }

    if (cfg.shadow) {
      const double angle = shadow_phase + 2.0 * std::numbers::pi * static_cast<double>(t) / cfg.shadow_period;
      const double ca = std::cos(angle), sa = std::sin(angle);
      const double cx = static_cast<double>(w) / 2.0, cy = static_cast<double>(h) / 2.0;
      const double span = 0.25 * std::hypot(static_cast<double>(w), static_cast<double>(h));
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          const double s = ((static_cast<double>(x) - cx) * ca + (static_cast<double>(y) - cy) * sa) / span;
          const double dark = cfg.shadow_depth / (1.0 + std::exp(-4.0 * s));
          img[y * w + x] = static_cast<float>(img[y * w + x] * (1.0 - dark));
        }
    }

    Tensor<float> frame({1, h, w});
    for (std::size_t i = 0; i < w * h; ++i) {
      const double n = cfg.noise > 0.0 ? cfg.noise * noise_rng.normal() : 0.0;
      frame.data()[i] = dequantize(quantize_unit(static_cast<float>(img[i] + n)));
    }
    const Point c0{static_cast<double>(balls[0].pos.x), static_cast<double>(balls[0].pos.y)};
    std::optional<Point> c1;
    if (balls.size() == 2) c1 = Point{static_cast<double>(balls[1].pos.x), static_cast<double>(balls[1].pos.y)};
    out.push_back(make_sample(std::move(frame), c0, cfg.label_sigma, static_cast<std::int64_t>(t), c1));
  }
  return out;
}

}  // namespace cuenet::data

// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "cuenet/data/sample.hpp"
#include "cuenet/error.hpp"
#include "cuenet/network.hpp"

namespace cuenet::data {

/// Separates a recorded RGB frame into its intensity (red) and event (green)
/// planes; blue carries nothing and is dropped.
inline std::pair<Tensor<float>, Tensor<float>> split_channels(const Tensor<float>& rgb) {
  if (rgb.rank() != 3 || rgb.dim(0) != 3) {
    throw ShapeError("split_channels expects [3,H,W], got " + dims_to_string(rgb.dims()));
  }
  const std::size_t h = rgb.dim(1), w = rgb.dim(2), n = h * w;
  Tensor<float> aps({1, h, w}), dvs({1, h, w});
  std::copy(rgb.data(), rgb.data() + n, aps.data());
  std::copy(rgb.data() + n, rgb.data() + 2 * n, dvs.data());
  return {std::move(aps), std::move(dvs)};
}

namespace detail {
inline Tensor<float> concat_single_channel(const Sample& a, const Sample& b, const Sample& c) {
  for (const Sample* s : {&a, &b, &c}) {
    if (s->channels() != 1) throw ShapeError("frame stacking needs single-channel frames");
    if (s->frames.dims() != a.frames.dims()) throw ShapeError("stacked frames differ in size");
  }
  const std::size_t n = a.frames.size();
  Tensor<float> out({3, a.height(), a.width()});
  std::copy(a.frames.begin(), a.frames.end(), out.data());
  std::copy(b.frames.begin(), b.frames.end(), out.data() + n);
  std::copy(c.frames.begin(), c.frames.end(), out.data() + 2 * n);
  return out;
}
}  // namespace detail

/// Three consecutive single-channel frames [t-2, t-1, t] become one 3-channel
/// sample; center, label and index come from frame t.
inline Sample stack_frames(std::span<const Sample> three) {
  if (three.size() != 3) throw ShapeError("stack_frames needs exactly three samples");
  if (three[1].frame_index != three[0].frame_index + 1 || three[2].frame_index != three[1].frame_index + 1) {
    throw DataError(DataErrorKind::non_consecutive, "stack_frames: frame indices " +
                                                        std::to_string(three[0].frame_index) + "," +
                                                        std::to_string(three[1].frame_index) + "," +
                                                        std::to_string(three[2].frame_index) + " are not consecutive");
  }
  const Sample& t = three[2];
  return Sample{detail::concat_single_channel(three[0], three[1], t), t.center, t.label, t.frame_index,
                t.second_center};
}

/// Stacks every frame of an index-ordered sequence with its two predecessors.
/// At the start of a run of consecutive indices the earliest frame is
/// repeated in place of missing predecessors.
inline std::vector<Sample> stack_sequence(std::span<const Sample> frames) {
  std::vector<Sample> out;
  out.reserve(frames.size());
  std::size_t run_start = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i > 0 && frames[i].frame_index != frames[i - 1].frame_index + 1) run_start = i;
    const std::size_t i1 = i >= run_start + 1 ? i - 1 : run_start;
    const std::size_t i2 = i >= run_start + 2 ? i - 2 : run_start;
    const Sample& t = frames[i];
    out.push_back(Sample{detail::concat_single_channel(frames[i2], frames[i1], t), t.center, t.label, t.frame_index,
                         t.second_center});
  }
  return out;
}

/// Network inputs for a version: single frames for V1, stacks for V2.
inline std::vector<Sample> prepare_inputs(std::span<const Sample> frames, CueNetVersion version) {
  if (version == CueNetVersion::v2) return stack_sequence(frames);
  for (const auto& s : frames)
    if (s.channels() != 1) throw ShapeError("V1 inputs must be single-channel frames");
  return {frames.begin(), frames.end()};
}

}  // namespace cuenet::data

// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cuenet/data/sample.hpp"
#include "cuenet/error.hpp"
#include "cuenet/network.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet {

/// Correct-classification radius at full 240x180 resolution.
inline constexpr double kFullScaleTolerance = 4.0;
/// Last histogram bin collects every PE >= this value.
inline constexpr std::size_t kHistogramOpenBin = 20;

struct Peak {
  std::size_t x = 0;
  std::size_t y = 0;
  double probability = 0.0;
  Point point() const { return {static_cast<double>(x), static_cast<double>(y)}; }
};

using PeakSet = std::vector<Peak>;

namespace detail {
template <typename T>
void require_heatmap(const Tensor<T>& h) {
  if (h.rank() != 3 || h.dim(0) != 1) throw ShapeError("heatmap must be [1,H,W], got " + dims_to_string(h.dims()));
}
}  // namespace detail

/// Global maximum; ties go to the first pixel in row-major order.
template <typename T>
Peak argmax_peak(const Tensor<T>& heatmap) {
  detail::require_heatmap(heatmap);
  const auto it = std::max_element(heatmap.begin(), heatmap.end());
  const auto flat = static_cast<std::size_t>(it - heatmap.begin());
  const std::size_t w = heatmap.dim(2);
  return {flat % w, flat / w, static_cast<double>(*it)};
}

/// Greedy non-maximum suppression: take the global maximum, suppress every
/// pixel within `min_separation` of it, repeat up to k times.
template <typename T>
PeakSet top_k_peaks(const Tensor<T>& heatmap, std::size_t k, double min_separation) {
  detail::require_heatmap(heatmap);
  if (k == 0) throw ConfigError("top_k_peaks needs k >= 1");
  if (min_separation < 0.0) throw ConfigError("top_k_peaks needs min_separation >= 0");
  const std::size_t h = heatmap.dim(1), w = heatmap.dim(2);
  std::vector<bool> suppressed(heatmap.size(), false);
  PeakSet peaks;
  const double r2 = min_separation * min_separation;
  while (peaks.size() < k) {
    std::size_t best = heatmap.size();
    for (std::size_t i = 0; i < heatmap.size(); ++i) {
      if (suppressed[i]) continue;
      if (best == heatmap.size() || heatmap.data()[i] > heatmap.data()[best]) best = i;
    }
    if (best == heatmap.size()) break;
    const std::size_t bx = best % w, by = best / w;
    peaks.push_back({bx, by, static_cast<double>(heatmap.data()[best])});
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double dx = static_cast<double>(x) - static_cast<double>(bx);
        const double dy = static_cast<double>(y) - static_cast<double>(by);
        if (dx * dx + dy * dy <= r2) suppressed[y * w + x] = true;
      }
    suppressed[best] = true;
  }
  return peaks;
}

/// Euclidean distance between predicted and true centers, in pixels.
inline double positioning_error(Point pred, Point truth) { return std::hypot(pred.x - truth.x, pred.y - truth.y); }

/// Tolerance for a network whose input is `resolution_ratio` times the full
/// frame width: floor(4 * ratio), never below 2 px.
inline double scaled_tolerance(double resolution_ratio) {
  return std::max(2.0, std::floor(kFullScaleTolerance * resolution_ratio + 1e-9));
}

struct PEReport {
  double tolerance = kFullScaleTolerance;
  std::vector<std::int64_t> frame_indices;
  std::vector<double> pe;
  std::vector<std::size_t> histogram = std::vector<std::size_t>(kHistogramOpenBin + 1, 0);
  std::size_t frames_evaluated = 0;
  std::size_t within_tolerance = 0;

  void add(std::int64_t frame_index, double error) {
    frame_indices.push_back(frame_index);
    pe.push_back(error);
    histogram[std::min<std::size_t>(static_cast<std::size_t>(std::floor(error)), kHistogramOpenBin)] += 1;
    ++frames_evaluated;
    if (error <= tolerance) ++within_tolerance;
  }

  /// Fraction of frames with PE <= tolerance.
  double accuracy() const {
    return frames_evaluated == 0 ? 0.0 : static_cast<double>(within_tolerance) / static_cast<double>(frames_evaluated);
  }

  double mean_pe() const {
    return pe.empty() ? 0.0 : std::accumulate(pe.begin(), pe.end(), 0.0) / static_cast<double>(pe.size());
  }

  double median_pe() const {
    if (pe.empty()) return 0.0;
    std::vector<double> v = pe;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  }

  /// Appends another shard; counts and histogram add, so merge order only
  /// affects the per-frame list order.
  PEReport& merge(const PEReport& other) {
    if (other.tolerance != tolerance) throw ConfigError("cannot merge PE reports with different tolerances");
    frame_indices.insert(frame_indices.end(), other.frame_indices.begin(), other.frame_indices.end());
    pe.insert(pe.end(), other.pe.begin(), other.pe.end());
    for (std::size_t i = 0; i < histogram.size(); ++i) histogram[i] += other.histogram[i];
    frames_evaluated += other.frames_evaluated;
    within_tolerance += other.within_tolerance;
    return *this;
  }

  /// `frame_index,pe` rows.
  std::string to_csv() const {
    std::ostringstream os;
    os << "frame_index,pe\n" << std::setprecision(9);
    for (std::size_t i = 0; i < pe.size(); ++i) os << frame_indices[i] << ',' << pe[i] << '\n';
    return os.str();
  }

  /// `frames,accuracy_at_4,mean_pe,median_pe` header and value line; the
  /// accuracy column is measured at this report's tolerance.
  std::string summary() const {
    std::ostringstream os;
    os << "frames,accuracy_at_4,mean_pe,median_pe\n" << std::setprecision(9);
    os << frames_evaluated << ',' << accuracy() << ',' << mean_pe() << ',' << median_pe() << '\n';
    return os.str();
  }

  /// Text bar chart of the unit-width PE histogram.
  std::string histogram_plot(std::size_t bar_width = 50) const {
    std::ostringstream os;
    const std::size_t peak = std::max<std::size_t>(1, *std::max_element(histogram.begin(), histogram.end()));
    for (std::size_t b = 0; b < histogram.size(); ++b) {
      std::ostringstream label;
      if (b == kHistogramOpenBin) {
        label << kHistogramOpenBin << "+";
      } else {
        label << b << "-" << b + 1;
      }
      os << std::setw(6) << label.str() << " | " << std::string(histogram[b] * bar_width / peak, '#') << ' '
         << histogram[b] << '\n';
    }
    return os.str();
  }
};

/// True if some assignment of peaks to truths puts every truth within
/// `tolerance` of its own peak.
inline bool all_recovered(const PeakSet& peaks, std::span<const Point> truths, double tolerance) {
  if (peaks.size() < truths.size()) return false;
  std::vector<std::size_t> order(peaks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  do {
    bool ok = true;
    for (std::size_t i = 0; i < truths.size() && ok; ++i)
      ok = positioning_error(peaks[order[i]].point(), truths[i]) <= tolerance;
    if (ok) return true;
  } while (std::next_permutation(order.begin(), order.end()));
  return false;
}

/// Scores the heatmap peak of `heatmap_of(sample)` against each true center.
template <typename HeatmapFn>
PEReport evaluate_with(HeatmapFn&& heatmap_of, std::span<const data::Sample> dataset, double tolerance) {
  if (dataset.empty()) throw DataError(DataErrorKind::empty_dataset, "cannot evaluate an empty dataset");
  PEReport report;
  report.tolerance = tolerance;
  for (const auto& s : dataset) report.add(s.frame_index, positioning_error(argmax_peak(heatmap_of(s)).point(), s.center));
  return report;
}

/// Runs the network in eval phase on every sample.
template <typename T>
PEReport evaluate(Network<T>& net, std::span<const data::Sample> dataset, double tolerance) {
  return evaluate_with([&](const data::Sample& s) { return net.forward(s.frames.template cast<T>(), Phase::eval); },
                       dataset, tolerance);
}

}  // namespace cuenet

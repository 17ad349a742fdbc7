// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "cuenet/data/sample.hpp"
#include "cuenet/error.hpp"
#include "cuenet/random.hpp"

namespace cuenet::data {

struct RegionGrid {
  std::size_t rows = 4;
  std::size_t cols = 4;
  std::size_t cells() const { return rows * cols; }
};

/// Row-major cell containing a point of an h x w frame.
inline std::size_t region_of(Point p, std::size_t height, std::size_t width, RegionGrid grid) {
  const auto row = std::min(grid.rows - 1, static_cast<std::size_t>(std::max(0.0, p.y) * static_cast<double>(grid.rows) /
                                                                    static_cast<double>(height)));
  const auto col = std::min(grid.cols - 1, static_cast<std::size_t>(std::max(0.0, p.x) * static_cast<double>(grid.cols) /
                                                                    static_cast<double>(width)));
  return row * grid.cols + col;
}

/// `count` distinct cells drawn with the seed.
inline std::set<std::size_t> choose_validation_cells(RegionGrid grid, std::size_t count, std::uint64_t seed) {
  if (count == 0 || count >= grid.cells()) {
    throw ConfigError("validation cell count must be between 1 and " + std::to_string(grid.cells() - 1));
  }
  std::vector<std::size_t> cells(grid.cells());
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  SplitMix64 rng(seed);
  shuffle_in_place(cells, rng);
  return {cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(count)};
}

struct DataSplit {
  std::vector<Sample> train;
  std::vector<Sample> validation;
};

/// Assigns each sample by the grid cell of its true center: cells in
/// `validation_cells` go to validation, all others to training.
inline DataSplit location_split(std::span<const Sample> samples, RegionGrid grid,
                                const std::set<std::size_t>& validation_cells) {
  if (grid.rows == 0 || grid.cols == 0) throw ConfigError("region grid needs at least one row and column");
  if (validation_cells.empty() || validation_cells.size() >= grid.cells() ||
      *validation_cells.rbegin() >= grid.cells()) {
    throw ConfigError("validation regions must be a nonempty proper subset of the grid");
  }
  DataSplit split;
  for (const auto& s : samples) {
    const std::size_t cell = region_of(s.center, s.height(), s.width(), grid);
    (validation_cells.count(cell) ? split.validation : split.train).push_back(s);
  }
  if (split.train.empty()) throw DataError(DataErrorKind::empty_split, "location split left the training set empty");
  if (split.validation.empty()) {
    throw DataError(DataErrorKind::empty_split, "location split left the validation set empty");
  }
  return split;
}

inline DataSplit location_split(std::span<const Sample> samples, RegionGrid grid, std::size_t validation_count,
                                std::uint64_t seed) {
  return location_split(samples, grid, choose_validation_cells(grid, validation_count, seed));
}

}  // namespace cuenet::data

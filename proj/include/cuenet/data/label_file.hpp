// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cuenet/error.hpp"

namespace cuenet::data {

struct PixelCoord {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// One labelled frame: `frame_index x y`, optionally followed by `x2 y2` for a
/// second ball.
struct LabelRecord {
  std::int64_t frame_index = 0;
  PixelCoord ball;
  std::optional<PixelCoord> second_ball;
  friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

struct LabelFile {
  std::vector<LabelRecord> records;
  friend bool operator==(const LabelFile&, const LabelFile&) = default;
};

struct FrameBounds {
  std::size_t width;
  std::size_t height;
};

/// Parses whitespace-separated records, skipping blank lines and `#`
/// comments. Frame indices must be strictly increasing; coordinates must be
/// nonnegative and, when bounds are given, inside the frame.
inline LabelFile parse_label_file(std::string_view text, std::optional<FrameBounds> bounds = std::nullopt) {
  LabelFile out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::vector<std::int64_t> fields;
    std::size_t i = 0;
    bool bad = false;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      std::int64_t v = 0;
      const char* begin = line.data() + i;
      const auto [ptr, ec] = std::from_chars(begin, line.data() + line.size(), v);
      const bool at_sep = ptr == line.data() + line.size() || *ptr == ' ' || *ptr == '\t' || *ptr == '\r';
      if (ec != std::errc{} || !at_sep) {
        bad = true;
        break;
      }
      fields.push_back(v);
      i = static_cast<std::size_t>(ptr - line.data());
    }
    if (!bad && fields.empty()) continue;
    if (bad || (fields.size() != 3 && fields.size() != 5)) {
      throw DataError(DataErrorKind::malformed_line,
                      "label line " + std::to_string(line_no) + ": expected 'frame_index x y [x2 y2]'", line_no);
    }
    LabelRecord rec{fields[0], {fields[1], fields[2]}, std::nullopt};
    if (fields.size() == 5) rec.second_ball = PixelCoord{fields[3], fields[4]};

    auto check = [&](const PixelCoord& c) {
      const bool negative = c.x < 0 || c.y < 0;
      const bool outside = bounds && (static_cast<std::size_t>(c.x) >= bounds->width ||
                                      static_cast<std::size_t>(c.y) >= bounds->height);
      if (negative || outside) {
        throw DataError(DataErrorKind::out_of_range,
                        "label line " + std::to_string(line_no) + ": coordinate outside the frame", line_no);
      }
    };
    if (rec.frame_index < 0) {
      throw DataError(DataErrorKind::out_of_range, "label line " + std::to_string(line_no) + ": negative frame index",
                      line_no);
    }
    check(rec.ball);
    if (rec.second_ball) check(*rec.second_ball);
    if (!out.records.empty() && rec.frame_index <= out.records.back().frame_index) {
      throw DataError(DataErrorKind::non_monotone_index,
                      "label line " + std::to_string(line_no) + ": frame index not strictly increasing", line_no);
    }
    out.records.push_back(rec);
  }
  return out;
}

inline std::string write_label_file(const LabelFile& file) {
  std::ostringstream os;
  for (const auto& r : file.records) {
    os << r.frame_index << ' ' << r.ball.x << ' ' << r.ball.y;
    if (r.second_ball) os << ' ' << r.second_ball->x << ' ' << r.second_ball->y;
    os << '\n';
  }
  return os.str();
}

}  // namespace cuenet::data

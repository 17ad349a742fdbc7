// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cuenet/data/label_file.hpp"
#include "cuenet/data/pgm.hpp"
#include "cuenet/data/sample.hpp"
#include "cuenet/error.hpp"

// Dataset directory layout:
//
//   meta.txt        key=value lines: width, height, channels
//   labels.txt      label records (see label_file.hpp)
//   frames/NNNN.pgm one binary 8-bit PGM per frame, index zero-padded to at
//                   least four digits; a C-channel frame stores its planes
//                   stacked vertically (image height C*H)

namespace cuenet::data {

struct DatasetMeta {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
};

struct LoadedDataset {
  DatasetMeta meta;
  std::vector<Sample> samples;
  /// Frames present on disk without a label record.
  std::size_t unlabeled_frames = 0;
};

inline std::string frame_filename(std::int64_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return digits + ".pgm";
}

inline std::string read_text_file(const std::filesystem::path& path, DataErrorKind missing_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(missing_kind, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(DataErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw DataError(DataErrorKind::io, "failed writing " + path.string());
}

inline DatasetMeta parse_meta(const std::string& text) {
  std::map<std::string, std::size_t> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(DataErrorKind::missing_meta, "meta.txt: expected key=value");
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    try {
      kv[trim(line.substr(0, eq))] = std::stoul(trim(line.substr(eq + 1)));
    } catch (const std::exception&) {
      throw DataError(DataErrorKind::missing_meta, "meta.txt: non-numeric value in '" + line + "'");
    }
  }
  for (const char* key : {"width", "height", "channels"})
    if (!kv.count(key) || kv[key] == 0) throw DataError(DataErrorKind::missing_meta, std::string("meta.txt lacks ") + key);
  return {kv["width"], kv["height"], kv["channels"]};
}

inline std::string format_meta(const DatasetMeta& m) {
  return "width=" + std::to_string(m.width) + "\nheight=" + std::to_string(m.height) +
         "\nchannels=" + std::to_string(m.channels) + "\n";
}

/// Writes frames, labels and meta. Pixel values are quantised to 8 bits and
/// centers rounded to integers.
inline void write_dataset(const std::filesystem::path& dir, std::span<const Sample> samples) {
  if (samples.empty()) throw DataError(DataErrorKind::empty_dataset, "nothing to write");
  std::error_code ec;
  std::filesystem::create_directories(dir / "frames", ec);
  if (ec) throw DataError(DataErrorKind::io, "cannot create " + (dir / "frames").string());
  const DatasetMeta meta{samples[0].width(), samples[0].height(), samples[0].channels()};
  LabelFile labels;
  for (const auto& s : samples) {
    if (s.frames.dims() != samples[0].frames.dims()) throw ShapeError("write_dataset: frames differ in size");
    write_pgm(dir / "frames" / frame_filename(s.frame_index), tensor_to_image(s.frames));
    LabelRecord rec{s.frame_index, {std::llround(s.center.x), std::llround(s.center.y)}, std::nullopt};
    if (s.second_center) rec.second_ball = PixelCoord{std::llround(s.second_center->x), std::llround(s.second_center->y)};
    labels.records.push_back(rec);
  }
  write_text_file(dir / "labels.txt", write_label_file(labels));
  write_text_file(dir / "meta.txt", format_meta(meta));
}

/// Loads every labelled frame in index order with pixel values in [0,1].
inline LoadedDataset load_dataset(const std::filesystem::path& dir, double label_sigma = kDefaultSigma) {
  if (!std::filesystem::is_directory(dir)) throw DataError(DataErrorKind::io, dir.string() + " is not a directory");
  if (!std::filesystem::exists(dir / "meta.txt")) {
    throw DataError(DataErrorKind::missing_meta, "missing " + (dir / "meta.txt").string());
  }
  LoadedDataset out;
  out.meta = parse_meta(read_text_file(dir / "meta.txt", DataErrorKind::missing_meta));
  if (!std::filesystem::exists(dir / "labels.txt")) {
    throw DataError(DataErrorKind::missing_labels, "missing " + (dir / "labels.txt").string());
  }
  const LabelFile labels = parse_label_file(read_text_file(dir / "labels.txt", DataErrorKind::missing_labels),
                                            FrameBounds{out.meta.width, out.meta.height});

  std::map<std::int64_t, std::filesystem::path> frames;
  if (std::filesystem::is_directory(dir / "frames")) {
    for (const auto& entry : std::filesystem::directory_iterator(dir / "frames")) {
      const auto name = entry.path().filename().string();
      if (entry.path().extension() != ".pgm") continue;
      const auto stem = entry.path().stem().string();
      if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
      frames[std::stoll(stem)] = entry.path();
    }
  }

  std::map<std::int64_t, const LabelRecord*> by_index;
  for (const auto& r : labels.records) {
    if (!frames.count(r.frame_index)) {
      throw DataError(DataErrorKind::dim_mismatch, "label for frame " + std::to_string(r.frame_index) + " has no frame file");
    }
    by_index[r.frame_index] = &r;
  }
  for (const auto& [index, path] : frames) {
    auto it = by_index.find(index);
    if (it == by_index.end()) {
      ++out.unlabeled_frames;
      continue;
    }
    const GrayImage img = read_pgm(path);
    if (img.width != out.meta.width || img.height != out.meta.height * out.meta.channels) {
      throw DataError(DataErrorKind::header_mismatch, path.string() + ": PGM is " + std::to_string(img.width) + "x" +
                                                          std::to_string(img.height) + ", meta.txt promises " +
                                                          std::to_string(out.meta.width) + "x" +
                                                          std::to_string(out.meta.height * out.meta.channels));
    }
    const LabelRecord& rec = *it->second;
    std::optional<Point> second;
    if (rec.second_ball) second = Point{static_cast<double>(rec.second_ball->x), static_cast<double>(rec.second_ball->y)};
    out.samples.push_back(make_sample(image_to_tensor(img, out.meta.channels),
                                      {static_cast<double>(rec.ball.x), static_cast<double>(rec.ball.y)}, label_sigma,
                                      index, second));
  }
  return out;
}

}  // namespace cuenet::data

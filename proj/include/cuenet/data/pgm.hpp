// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cuenet/error.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet::data {

/// 8-bit grayscale raster.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Binary P5 with a `\n`-terminated header and maxval 255.
inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

/// Accepts any whitespace/comment layout in the header; maxval must be 1..255.
inline GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes, const std::string& origin = "pgm") {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_space();
    std::size_t v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
      any = true;
    }
    if (!any) throw DataError(DataErrorKind::header_mismatch, origin + ": malformed PGM header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw DataError(DataErrorKind::unsupported_format, origin + ": not a binary (P5) PGM");
  }
  pos = 2;
  GrayImage img;
  img.width = read_uint();
  img.height = read_uint();
  const std::size_t maxval = read_uint();
  if (maxval > 255) throw DataError(DataErrorKind::unsupported_format, origin + ": only 8-bit PGM is supported");
  if (maxval == 0 || img.width == 0 || img.height == 0) {
    throw DataError(DataErrorKind::header_mismatch, origin + ": invalid PGM header values");
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw DataError(DataErrorKind::header_mismatch, origin + ": malformed PGM header");
  }
  ++pos;
  const std::size_t n = img.width * img.height;
  if (bytes.size() - pos < n) throw DataError(DataErrorKind::header_mismatch, origin + ": truncated PGM raster");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  if (maxval != 255) {
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(std::lround(p * 255.0 / static_cast<double>(maxval)));
  }
  return img;
}

inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  const auto bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(DataErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(DataErrorKind::io, "failed writing " + path.string());
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_pgm(bytes, path.string());
}

inline std::uint8_t quantize_unit(float v) {
  const float c = std::min(1.0f, std::max(0.0f, v));
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

inline float dequantize(std::uint8_t v) { return static_cast<float>(v) / 255.0f; }

/// Planes of a [C,H,W] tensor stacked vertically into a (C*H) x W image.
inline GrayImage tensor_to_image(const Tensor<float>& t) {
  if (t.rank() != 3) throw ShapeError("tensor_to_image expects [C,H,W]");
  GrayImage img{t.dim(2), t.dim(0) * t.dim(1), std::vector<std::uint8_t>(t.size())};
  for (std::size_t i = 0; i < t.size(); ++i) img.pixels[i] = quantize_unit(t.data()[i]);
  return img;
}

/// Inverse of tensor_to_image: splits a (C*H) x W image into C planes.
inline Tensor<float> image_to_tensor(const GrayImage& img, std::size_t channels) {
  if (channels == 0 || img.height % channels != 0) {
    throw DataError(DataErrorKind::header_mismatch, "image height is not a multiple of the channel count");
  }
  Tensor<float> t({channels, img.height / channels, img.width});
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = dequantize(img.pixels[i]);
  return t;
}

}  // namespace cuenet::data

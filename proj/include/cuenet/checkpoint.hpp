// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "cuenet/error.hpp"
#include "cuenet/network.hpp"

// Checkpoint layout, all integers and floats little-endian:
//
//   "CUE1"                      magic
//   u16 format version          (kCheckpointVersion)
//   u8  network version         1 or 2
//   u32 input height, u32 input width, u32 input channels
//   u32 stage count, u32 width[stage count]
//   u8  eval statistics         0 per-sample, 1 running
//   u32 tensor count
//   per tensor: u32 rank, u32 dims[rank], f32 values[prod(dims)]
//   u32 CRC-32 of every preceding byte

namespace cuenet {

inline constexpr char kCheckpointMagic[4] = {'C', 'U', 'E', '1'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

class ByteWriter {
public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
  void put(std::uint32_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
  ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return get(4); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::size_t remaining() const { return size_ - pos_; }

private:
  void need(std::size_t n) const {
    if (pos_ + n > size_) throw CheckpointError(CheckpointErrorKind::truncated, "checkpoint ends unexpectedly");
  }
  std::uint32_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint32_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(const std::uint8_t* p, std::size_t n) {
  return static_cast<std::uint32_t>(::crc32(::crc32(0L, Z_NULL, 0), p, static_cast<uInt>(n)));
}

}  // namespace detail

template <typename T>
std::vector<std::uint8_t> serialize_checkpoint(Network<T>& net) {
  const NetworkConfig& cfg = net.config();
  const Shape2D s = cfg.input_shape();
  detail::ByteWriter w;
  w.raw(kCheckpointMagic, 4);
  w.u16(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(cfg.version));
  w.u32(static_cast<std::uint32_t>(s.height));
  w.u32(static_cast<std::uint32_t>(s.width));
  w.u32(static_cast<std::uint32_t>(s.channels));
  w.u32(static_cast<std::uint32_t>(cfg.widths.size()));
  for (auto width : cfg.widths) w.u32(static_cast<std::uint32_t>(width));
  w.u8(cfg.eval_statistics == NormStatistics::running ? 1 : 0);
  auto tensors = net.state_tensors();
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (auto& [name, t] : tensors) {
    w.u32(static_cast<std::uint32_t>(t->rank()));
    for (auto d : t->dims()) w.u32(static_cast<std::uint32_t>(d));
    for (T v : *t) w.f32(static_cast<float>(v));
  }
  auto& bytes = w.bytes();
  const std::uint32_t crc = detail::crc32_of(bytes.data(), bytes.size());
  w.u32(crc);
  return std::move(bytes);
}

/// Rebuilds a network from checkpoint bytes. When `expected` is given, the
/// stored configuration must agree with it (version, input geometry, widths).
template <typename T>
Network<T> deserialize_checkpoint(const std::vector<std::uint8_t>& bytes,
                                  const std::optional<NetworkConfig>& expected = std::nullopt) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError(CheckpointErrorKind::bad_magic, "not a CueNet checkpoint (bad magic)");
  }
  if (bytes.size() < 10) throw CheckpointError(CheckpointErrorKind::truncated, "checkpoint too short");
  detail::ByteReader tail(bytes.data() + bytes.size() - 4, 4);
  const std::uint32_t stored_crc = tail.u32();
  if (detail::crc32_of(bytes.data(), bytes.size() - 4) != stored_crc) {
    throw CheckpointError(CheckpointErrorKind::crc_mismatch, "checkpoint CRC mismatch");
  }
  detail::ByteReader r(bytes.data() + 4, bytes.size() - 8);
  const std::uint16_t format = r.u16();
  if (format != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::config_incompatible,
                          "unsupported checkpoint format version " + std::to_string(format));
  }
  NetworkConfig cfg;
  const std::uint8_t version = r.u8();
  if (version != 1 && version != 2) {
    throw CheckpointError(CheckpointErrorKind::config_incompatible, "unknown network version in checkpoint");
  }
  cfg.version = static_cast<CueNetVersion>(version);
  cfg.height = r.u32();
  cfg.width = r.u32();
  const std::uint32_t channels = r.u32();
  const std::uint32_t n_widths = r.u32();
  if (n_widths > 64) throw CheckpointError(CheckpointErrorKind::config_incompatible, "implausible stage count");
  cfg.widths.assign(n_widths, 0);
  for (auto& v : cfg.widths) v = r.u32();
  cfg.eval_statistics = r.u8() == 1 ? NormStatistics::running : NormStatistics::per_sample;
  if (channels != input_channels(cfg.version)) {
    throw CheckpointError(CheckpointErrorKind::config_incompatible, "channel count disagrees with network version");
  }
  if (expected && !(*expected == cfg)) {
    throw CheckpointError(CheckpointErrorKind::config_incompatible,
                          "checkpoint holds a " + to_string(cfg.version) + " network with input " +
                              std::to_string(cfg.width) + "x" + std::to_string(cfg.height) + "x" +
                              std::to_string(channels) + ", incompatible with the requested configuration");
  }
  if (expected) cfg.eval_statistics = expected->eval_statistics;

  Network<T> net = [&] {
    try {
      return Network<T>::build(cfg, 0);
    } catch (const ConfigError& e) {
      throw CheckpointError(CheckpointErrorKind::config_incompatible, e.what());
    }
  }();
  auto tensors = net.state_tensors();
  if (r.u32() != tensors.size()) {
    throw CheckpointError(CheckpointErrorKind::config_incompatible, "tensor count does not match the network");
  }
  for (auto& [name, t] : tensors) {
    const std::uint32_t rank = r.u32();
    Dims dims(rank);
    for (auto& d : dims) d = r.u32();
    if (dims != t->dims()) {
      throw CheckpointError(CheckpointErrorKind::config_incompatible, "tensor " + name + " has dims " +
                                                                           dims_to_string(dims) + ", expected " +
                                                                           dims_to_string(t->dims()));
    }
    for (auto& v : *t) v = static_cast<T>(r.f32());
  }
  if (r.remaining() != 0) throw CheckpointError(CheckpointErrorKind::config_incompatible, "trailing checkpoint data");
  return net;
}

template <typename T>
void save_checkpoint(Network<T>& net, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointErrorKind::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointErrorKind::io, "failed writing " + path.string());
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename T = float>
Network<T> load_checkpoint(const std::filesystem::path& path,
                           const std::optional<NetworkConfig>& expected = std::nullopt) {
  return deserialize_checkpoint<T>(read_file_bytes(path), expected);
}

}  // namespace cuenet

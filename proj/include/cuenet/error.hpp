// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cuenet {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch or an invalid shape.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// Coordinate outside a tensor's extent.
class IndexError : public Error {
public:
  using Error::Error;
};

/// Operation called in the wrong state, e.g. backward without a cached forward.
class StateError : public Error {
public:
  using Error::Error;
};

/// Non-finite values or a failed numerical verification.
class NumericError : public Error {
public:
  using Error::Error;
};

/// Invalid user configuration (bad key, bad value, violated config invariant).
class ConfigError : public Error {
public:
  using Error::Error;
};

enum class DataErrorKind {
  io,
  malformed_line,
  non_monotone_index,
  out_of_range,
  missing_meta,
  missing_labels,
  header_mismatch,
  unsupported_format,
  dim_mismatch,
  empty_dataset,
  empty_split,
  non_consecutive,
  center_out_of_bounds,
  infeasible_config,
};

/// Problem with dataset contents or files.
class DataError : public Error {
public:
  DataError(DataErrorKind kind, const std::string& what, std::size_t line = 0)
      : Error(what), kind_(kind), line_(line) {}

  DataErrorKind kind() const noexcept { return kind_; }
  /// 1-based line number for text-format errors, 0 otherwise.
  std::size_t line() const noexcept { return line_; }

private:
  DataErrorKind kind_;
  std::size_t line_;
};

enum class CheckpointErrorKind { io, bad_magic, crc_mismatch, config_incompatible, truncated };

class CheckpointError : public Error {
public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  CheckpointErrorKind kind() const noexcept { return kind_; }

private:
  CheckpointErrorKind kind_;
};

}  // namespace cuenet

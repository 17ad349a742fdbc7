// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace cuenet {

/// Process-wide worker cap used by per-channel loops. Results never depend on
/// this value: every parallel loop writes disjoint outputs.
inline std::atomic<std::size_t>& worker_threads() {
  static std::atomic<std::size_t> n{1};
  return n;
}

inline void set_worker_threads(std::size_t n) { worker_threads() = std::max<std::size_t>(1, n); }

/// Runs body(i) for i in [0, count). Each index must write to storage that no
/// other index touches.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers = std::min(worker_threads().load(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  }
}

}  // namespace cuenet

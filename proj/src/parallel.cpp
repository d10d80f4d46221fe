// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace lva {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int n) { g_threads.store(std::max(1, n)); }

int num_threads() { return g_threads.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t min_per_thread) {
  const std::size_t want = std::min<std::size_t>(
      static_cast<std::size_t>(num_threads()), n / std::max<std::size_t>(1, min_per_thread));
  if (want <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(want - 1);
  const std::size_t chunk = (n + want - 1) / want;
  for (std::size_t t = 1; t < want; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([&body, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (std::size_t i = 0; i < std::min(n, chunk); ++i) body(i);
  for (auto& w : workers) w.join();
}

}  // namespace lva

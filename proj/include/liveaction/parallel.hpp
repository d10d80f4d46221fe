// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace lva {

void set_num_threads(int n);
int num_threads();

/// Runs body(i) for i in [0, n) split into contiguous chunks across the
/// configured thread count. Each index is processed by exactly one thread, so
/// callers that write disjoint outputs per index stay bitwise reproducible.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t min_per_thread = 1);

}  // namespace lva

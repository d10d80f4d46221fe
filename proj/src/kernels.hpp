// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

// Internal helpers shared by the inference layers and their gradients.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "liveaction/tensor.hpp"

namespace lva::detail {

/// Spatial extents padded on the left to three axes; padded axes have
/// extent 1 and a single kernel tap.
struct Grid {
  std::array<std::size_t, 3> e{1, 1, 1};
  std::array<std::size_t, 3> taps{1, 1, 1};
  std::size_t positions = 1;
  std::size_t tap_count = 1;
  // reflect[a][u][p]: source index on axis a for tap u at output position p.
  std::array<std::vector<std::vector<std::size_t>>, 3> reflect;
};

inline std::size_t reflect_index(long i, std::size_t n) {
  const long period = 2 * static_cast<long>(n);
  long m = i % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<long>(n) ? m : period - 1 - m);
}

inline Grid make_grid(const Shape& shape, std::size_t kernel) {
  Grid g;
  const std::size_t d = shape.size() - 1;
  for (std::size_t i = 0; i < d; ++i) {
    g.e[3 - d + i] = shape[1 + i];
    g.taps[3 - d + i] = kernel;
  }
  for (std::size_t a = 0; a < 3; ++a) {
    g.positions *= g.e[a];
    g.tap_count *= g.taps[a];
    const long half = static_cast<long>(g.taps[a] / 2);
    g.reflect[a].assign(g.taps[a], std::vector<std::size_t>(g.e[a]));
    for (std::size_t u = 0; u < g.taps[a]; ++u)
      for (std::size_t p = 0; p < g.e[a]; ++p)
        g.reflect[a][u][p] = reflect_index(static_cast<long>(p) + static_cast<long>(u) - half, g.e[a]);
  }
  return g;
}

/// Kernel side length k such that k^D == taps, or 0.
inline std::size_t kernel_side(std::size_t taps, std::size_t dims) {
  for (std::size_t k = 1; k <= taps; k += 2) {
    std::size_t p = 1;
    for (std::size_t i = 0; i < dims; ++i) p *= k;
    if (p == taps) return k;
    if (p > taps) break;
  }
  return 0;
}

template <typename T>
inline T gelu_scalar(T x) {
  return T(0.5) * x * (T(1) + std::erf(x * T(std::numbers::sqrt2 / 2)));
}

inline double gelu_grad_scalar(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

template <typename T>
inline T sigmoid_scalar(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

}  // namespace lva::detail

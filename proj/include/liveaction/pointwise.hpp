// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "liveaction/random.hpp"
#include "liveaction/tensor.hpp"

namespace lva {

/// Power-law compander y = sgn(x) * ((|x| + eps)^gamma - eps^gamma).
struct CompanderParams {
  double gamma = 0.4;
  double epsilon = 0.1;

  void validate() const;
};

/// Latents after the Laplacian CDF lie strictly inside (-127, 127).
inline constexpr double kLatentBound = 127.0;
/// Inverse CDF input clamp; keeps symbols of +-127 finite after decoding.
inline constexpr double kInverseClamp = 126.9999;

enum class QuantMode { Soft, Hard };

template <typename T>
inline T compand_scalar(T x, const CompanderParams& p) {
  const T g = static_cast<T>(p.gamma), e = static_cast<T>(p.epsilon);
  const T mag = std::pow(std::abs(x) + e, g) - std::pow(e, g);
  return x < T(0) ? -mag : mag;
}

template <typename T>
inline T compand_inverse_scalar(T y, const CompanderParams& p) {
  const T g = static_cast<T>(p.gamma), e = static_cast<T>(p.epsilon);
  const T mag = std::pow(std::abs(y) + std::pow(e, g), T(1) / g) - e;
  return y < T(0) ? -mag : mag;
}

template <typename T>
inline T latent_cdf_scalar(T z, T sigma) {
  // 1 - exp(-t) rounds to 1 for large t; stay one ulp inside the bound.
  const T mag = std::min(T(kLatentBound) * (T(1) - std::exp(-std::abs(z) / sigma)),
                         std::nextafter(T(kLatentBound), T(0)));
  return z < T(0) ? -mag : mag;
}

template <typename T>
inline T latent_cdf_inverse_scalar(T y, T sigma) {
  const T a = std::min(std::abs(y), T(kInverseClamp));
  const T mag = -sigma * std::log1p(-a / T(kLatentBound));
  return y < T(0) ? -mag : mag;
}

/// Rounds half away from zero.
template <typename T>
inline T quantize_hard_scalar(T y) {
  return std::round(y);
}

template <typename T>
BasicTensor<T> compand(const BasicTensor<T>& x, const CompanderParams& p);
template <typename T>
BasicTensor<T> compand_inverse(const BasicTensor<T>& y, const CompanderParams& p);

/// Per-channel Laplacian CDF; `sigma` holds one positive scale per channel.
template <typename T>
BasicTensor<T> latent_cdf(const BasicTensor<T>& z, std::span<const double> sigma);
/// Throws a domain error if any |y| exceeds 127.
template <typename T>
BasicTensor<T> latent_cdf_inverse(const BasicTensor<T>& y, std::span<const double> sigma);

template <typename T>
BasicTensor<T> quantize_hard(const BasicTensor<T>& y);
/// y + u with u ~ U[-1/2, 1/2] drawn from `rng` in element order.
template <typename T>
BasicTensor<T> quantize_soft(const BasicTensor<T>& y, Rng& rng);

void check_scales(std::span<const double> sigma, std::size_t channels);

}  // namespace lva

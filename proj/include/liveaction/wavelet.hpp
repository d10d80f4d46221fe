// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "liveaction/tensor.hpp"

namespace lva {

/// CDF 9/7 lifting constants.
namespace cdf97 {
inline constexpr double kAlpha = -1.586134342059924;
inline constexpr double kBeta = -0.052980118572961;
inline constexpr double kGamma = 0.882911075530934;
inline constexpr double kDelta = 0.443506852043971;
inline constexpr double kK = 1.230174104914001;
// Output scaling: the lowpass branch has DC gain sqrt(2) and the highpass
// branch is scaled reciprocally.
inline constexpr double kLowScale = 1.4142135623730951 / kK;
inline constexpr double kHighScale = kK / 1.4142135623730951;
}  // namespace cdf97

struct WptConfig {
  int levels = 1;  // J
  int dims = 1;    // D

  /// Validates the config against a (C, T1..TD) signal shape.
  void check(const Shape& signal_shape) const;
  Shape band_shape(const Shape& signal_shape) const;
};

/// Full wavelet packet analysis. Every level splits every band along each
/// spatio-temporal axis in order (axis 1, then 2, then 3). A channel c with
/// per-axis branch bits (b1, b2, b3), 0 = lowpass, becomes channel
/// c * 2^D + (b1 b2 b3 read as a binary number); levels nest the same way,
/// so after J levels the source channel is the most significant digit and
/// the first level's band the next.
///
/// Boundaries use whole-sample symmetric extension, which keeps the lifting
/// steps parity-preserving and exactly invertible.
template <typename T>
BasicTensor<T> wpt_forward(const BasicTensor<T>& x, const WptConfig& cfg);

template <typename T>
BasicTensor<T> wpt_inverse(const BasicTensor<T>& y, const WptConfig& cfg, const Shape& original_shape);

/// Transposes of the two linear maps above, used for reverse-mode gradients.
Tensor wpt_forward_adjoint(const Tensor& grad_bands, const WptConfig& cfg, const Shape& original_shape);
Tensor wpt_inverse_adjoint(const Tensor& grad_signal, const WptConfig& cfg);

}  // namespace lva

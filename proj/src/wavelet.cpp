// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/wavelet.hpp"

#include <vector>

#include "liveaction/parallel.hpp"

namespace lva {

namespace {

using namespace cdf97;

// Lifting primitives over split even (s) / odd (d) halves of length m.
// Neighbours beyond the ends mirror back onto the same parity.
template <typename T>
void predict(const T* s, T* d, std::size_t m, T a) {
  for (std::size_t i = 0; i < m; ++i) d[i] += a * (s[i] + s[i + 1 < m ? i + 1 : m - 1]);
}

template <typename T>
void update(T* s, const T* d, std::size_t m, T b) {
  for (std::size_t i = 0; i < m; ++i) s[i] += b * (d[i > 0 ? i - 1 : 0] + d[i]);
}

template <typename T>
void predict_t(T* gs, const T* gd, std::size_t m, T a) {
  for (std::size_t i = 0; i < m; ++i) {
    gs[i] += a * gd[i];
    gs[i + 1 < m ? i + 1 : m - 1] += a * gd[i];
  }
}

template <typename T>
void update_t(const T* gs, T* gd, std::size_t m, T b) {
  for (std::size_t i = 0; i < m; ++i) {
    gd[i > 0 ? i - 1 : 0] += b * gs[i];
    gd[i] += b * gs[i];
  }
}

template <typename T>
void scale(T* s, T* d, std::size_t m, T ls, T hs) {
  for (std::size_t i = 0; i < m; ++i) {
    s[i] *= ls;
    d[i] *= hs;
  }
}

enum class Kernel { Analysis, Synthesis, AnalysisAdjoint, SynthesisAdjoint };

// Split kernels take an interleaved line and produce (s, d); merge kernels
// the reverse. line/s/d are scratch buffers of length 2m, m, m.
template <typename T>
void split_line(Kernel k, const T* line, T* s, T* d, std::size_t m) {
  for (std::size_t i = 0; i < m; ++i) {
    s[i] = line[2 * i];
    d[i] = line[2 * i + 1];
  }
  if (k == Kernel::Analysis) {
    predict<T>(s, d, m, T(kAlpha));
    update<T>(s, d, m, T(kBeta));
    predict<T>(s, d, m, T(kGamma));
    update<T>(s, d, m, T(kDelta));
    scale<T>(s, d, m, T(kLowScale), T(kHighScale));
  } else {  // SynthesisAdjoint
    predict_t<T>(s, d, m, T(-kAlpha));
    update_t<T>(s, d, m, T(-kBeta));
    predict_t<T>(s, d, m, T(-kGamma));
    update_t<T>(s, d, m, T(-kDelta));
    scale<T>(s, d, m, T(1.0 / kLowScale), T(1.0 / kHighScale));
  }
}

template <typename T>
void merge_line(Kernel k, T* s, T* d, T* line, std::size_t m) {
  if (k == Kernel::Synthesis) {
    scale<T>(s, d, m, T(1.0 / kLowScale), T(1.0 / kHighScale));
    update<T>(s, d, m, T(-kDelta));
    predict<T>(s, d, m, T(-kGamma));
    update<T>(s, d, m, T(-kBeta));
    predict<T>(s, d, m, T(-kAlpha));
  } else {  // AnalysisAdjoint
    scale<T>(s, d, m, T(kLowScale), T(kHighScale));
    update_t<T>(s, d, m, T(kDelta));
    predict_t<T>(s, d, m, T(kGamma));
    update_t<T>(s, d, m, T(kBeta));
    predict_t<T>(s, d, m, T(kAlpha));
  }
  for (std::size_t i = 0; i < m; ++i) {
    line[2 * i] = s[i];
    line[2 * i + 1] = d[i];
  }
}

// Layout helper: for a tensor (C, E1..Er) and spatial axis a (1-based),
// lines along a are indexed by (c, outer, inner) with
// outer = product of extents between the channel axis and a, inner = product
// after a.
struct AxisGeometry {
  std::size_t channels, outer, len, inner;
};

AxisGeometry geometry(const Shape& shape, std::size_t axis) {
  AxisGeometry g{shape[0], 1, shape[axis], 1};
  for (std::size_t i = 1; i < axis; ++i) g.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) g.inner *= shape[i];
  return g;
}

// (C, ..., L, ...) -> (2C, ..., L/2, ...): channel c -> (2c low, 2c+1 high).
template <typename T>
BasicTensor<T> split_axis(const BasicTensor<T>& x, std::size_t axis, Kernel k) {
  const auto g = geometry(x.shape(), axis);
  const std::size_t m = g.len / 2;
  Shape out_shape = x.shape();
  out_shape[0] *= 2;
  out_shape[axis] = m;
  BasicTensor<T> y(out_shape);
  const std::size_t lines_per_channel = g.outer * g.inner;
  const T* src = x.data().data();
  T* dst = y.data().data();
  parallel_for(g.channels, [&](std::size_t c) {
    std::vector<T> line(2 * m), s(m), d(m);
    const T* in_c = src + c * g.outer * g.len * g.inner;
    T* lo_c = dst + (2 * c) * g.outer * m * g.inner;
    T* hi_c = dst + (2 * c + 1) * g.outer * m * g.inner;
    for (std::size_t l = 0; l < lines_per_channel; ++l) {
      const std::size_t o = l / g.inner, i = l % g.inner;
      for (std::size_t t = 0; t < g.len; ++t) line[t] = in_c[(o * g.len + t) * g.inner + i];
      split_line<T>(k, line.data(), s.data(), d.data(), m);
      for (std::size_t t = 0; t < m; ++t) {
        lo_c[(o * m + t) * g.inner + i] = s[t];
        hi_c[(o * m + t) * g.inner + i] = d[t];
      }
    }
  });
  return y;
}

// Inverse layout of split_axis.
template <typename T>
BasicTensor<T> merge_axis(const BasicTensor<T>& y, std::size_t axis, Kernel k) {
  const auto g = geometry(y.shape(), axis);
  const std::size_t m = g.len;
  const std::size_t channels = g.channels / 2;
  Shape out_shape = y.shape();
  out_shape[0] = channels;
  out_shape[axis] = 2 * m;
  BasicTensor<T> x(out_shape);
  const std::size_t lines_per_channel = g.outer * g.inner;
  const T* src = y.data().data();
  T* dst = x.data().data();
  parallel_for(channels, [&](std::size_t c) {
    std::vector<T> line(2 * m), s(m), d(m);
    const T* lo_c = src + (2 * c) * g.outer * m * g.inner;
    const T* hi_c = src + (2 * c + 1) * g.outer * m * g.inner;
    T* out_c = dst + c * g.outer * 2 * m * g.inner;
    for (std::size_t l = 0; l < lines_per_channel; ++l) {
      const std::size_t o = l / g.inner, i = l % g.inner;
      for (std::size_t t = 0; t < m; ++t) {
        s[t] = lo_c[(o * m + t) * g.inner + i];
        d[t] = hi_c[(o * m + t) * g.inner + i];
      }
      merge_line<T>(k, s.data(), d.data(), line.data(), m);
      for (std::size_t t = 0; t < 2 * m; ++t) out_c[(o * 2 * m + t) * g.inner + i] = line[t];
    }
  });
  return x;
}

template <typename T>
BasicTensor<T> analyze(const BasicTensor<T>& x, const WptConfig& cfg, Kernel k) {
  BasicTensor<T> cur = x;
  for (int level = 0; level < cfg.levels; ++level)
    for (int axis = 1; axis <= cfg.dims; ++axis) cur = split_axis(cur, static_cast<std::size_t>(axis), k);
  return cur;
}

template <typename T>
BasicTensor<T> synthesize(const BasicTensor<T>& y, const WptConfig& cfg, Kernel k) {
  BasicTensor<T> cur = y;
  for (int level = 0; level < cfg.levels; ++level)
    for (int axis = cfg.dims; axis >= 1; --axis) cur = merge_axis(cur, static_cast<std::size_t>(axis), k);
  return cur;
}

}  // namespace

void WptConfig::check(const Shape& signal_shape) const {
  check_signal_shape(signal_shape);
  if (dims < 1 || dims > 3) throw Error(ErrorCode::Config, "wavelet dims must be 1..3");
  if (levels < 1 || levels > 16) throw Error(ErrorCode::Config, "wavelet levels must be 1..16");
  if (signal_shape.size() != static_cast<std::size_t>(dims) + 1)
    throw Error(ErrorCode::Shape, "signal " + shape_string(signal_shape) + " does not have " +
                                      std::to_string(dims) + " spatio-temporal axes");
  const std::size_t block = std::size_t{1} << levels;
  for (std::size_t i = 1; i < signal_shape.size(); ++i)
    if (signal_shape[i] % block != 0)
      throw Error(ErrorCode::Shape, "extent " + std::to_string(signal_shape[i]) + " of axis " +
                                        std::to_string(i) + " is not divisible by 2^J = " +
                                        std::to_string(block));
}

Shape WptConfig::band_shape(const Shape& signal_shape) const {
  check(signal_shape);
  Shape out = signal_shape;
  out[0] <<= levels * dims;
  for (std::size_t i = 1; i < out.size(); ++i) out[i] >>= levels;
  return out;
}

template <typename T>
BasicTensor<T> wpt_forward(const BasicTensor<T>& x, const WptConfig& cfg) {
  cfg.check(x.shape());
  return analyze(x, cfg, Kernel::Analysis);
}

template <typename T>
BasicTensor<T> wpt_inverse(const BasicTensor<T>& y, const WptConfig& cfg, const Shape& original_shape) {
  if (y.shape() != cfg.band_shape(original_shape))
    throw Error(ErrorCode::Shape, "band tensor " + shape_string(y.shape()) +
                                      " is inconsistent with signal shape " + shape_string(original_shape));
  return synthesize(y, cfg, Kernel::Synthesis);
}

Tensor wpt_forward_adjoint(const Tensor& grad_bands, const WptConfig& cfg, const Shape& original_shape) {
  if (grad_bands.shape() != cfg.band_shape(original_shape))
    throw Error(ErrorCode::Shape, "gradient shape mismatch in wavelet adjoint");
  return synthesize(grad_bands, cfg, Kernel::AnalysisAdjoint);
}

Tensor wpt_inverse_adjoint(const Tensor& grad_signal, const WptConfig& cfg) {
  cfg.check(grad_signal.shape());
  return analyze(grad_signal, cfg, Kernel::SynthesisAdjoint);
}

template TensorF wpt_forward(const TensorF&, const WptConfig&);
template Tensor wpt_forward(const Tensor&, const WptConfig&);
template TensorF wpt_inverse(const TensorF&, const WptConfig&, const Shape&);
template Tensor wpt_inverse(const Tensor&, const WptConfig&, const Shape&);

}  // namespace lva

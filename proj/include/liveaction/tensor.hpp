// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "liveaction/error.hpp"

namespace lva {

using Shape = std::vector<std::size_t>;

enum class Precision { Single, Double };

inline std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& s);

/// Throws unless `s` is a signal shape: channel axis followed by 1 to 3
/// spatio-temporal axes, all extents positive.
void check_signal_shape(const Shape& s);

/// Dense row-major array, channel axis first.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_)) {
    check_extents();
  }

  BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_extents();
    if (data_.size() != shape_size(shape_))
      throw Error(ErrorCode::Shape, "tensor data length " + std::to_string(data_.size()) +
                                        " does not match shape " + shape_string(shape_));
  }

  static BasicTensor full(Shape shape, T value) {
    BasicTensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t channels() const { return shape_.empty() ? 0 : shape_[0]; }
  /// Number of elements per channel.
  std::size_t plane() const { return shape_.empty() ? 0 : data_.size() / shape_[0]; }
  Shape spatial_shape() const { return Shape(shape_.begin() + (shape_.empty() ? 0 : 1), shape_.end()); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T* channel(std::size_t c) { return data_.data() + c * plane(); }
  const T* channel(std::size_t c) const { return data_.data() + c * plane(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw Error(ErrorCode::Shape, "index rank mismatch");
    std::size_t off = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] >= shape_[i]) throw Error(ErrorCode::Shape, "index out of range");
      off = off * shape_[i] + index[i];
    }
    return off;
  }
  T& at(std::initializer_list<std::size_t> index) {
    return data_[offset(std::span(index.begin(), index.size()))];
  }
  const T& at(std::initializer_list<std::size_t> index) const {
    return data_[offset(std::span(index.begin(), index.size()))];
  }

  template <typename U>
  BasicTensor<U> cast() const {
    std::vector<U> out(data_.size());
    std::transform(data_.begin(), data_.end(), out.begin(),
                   [](T v) { return static_cast<U>(v); });
    return BasicTensor<U>(shape_, std::move(out));
  }

  bool operator==(const BasicTensor& o) const = default;

 private:
  void check_extents() const {
    if (shape_.empty()) throw Error(ErrorCode::Shape, "tensor shape must have at least one axis");
    for (auto e : shape_)
      if (e == 0) throw Error(ErrorCode::Shape, "tensor extents must be positive: " + shape_string(shape_));
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<double>;
using TensorF = BasicTensor<float>;

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& t, const Shape& new_shape) {
  if (shape_size(new_shape) != t.size())
    throw Error(ErrorCode::Shape, "cannot reshape " + shape_string(t.shape()) + " to " +
                                      shape_string(new_shape));
  return BasicTensor<T>(new_shape, t.storage());
}

/// Reorders axes: output axis i is input axis `axes[i]`.
template <typename T>
BasicTensor<T> permute(const BasicTensor<T>& t, const std::vector<std::size_t>& axes) {
  const std::size_t r = t.rank();
  std::vector<bool> seen(r, false);
  if (axes.size() != r) throw Error(ErrorCode::Shape, "permutation rank mismatch");
  for (auto a : axes) {
    if (a >= r || seen[a]) throw Error(ErrorCode::Shape, "invalid axis permutation");
    seen[a] = true;
  }
  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) out_shape[i] = t.shape()[axes[i]];
  std::vector<std::size_t> in_stride(r, 1);
  for (std::size_t i = r - 1; i > 0; --i) in_stride[i - 1] = in_stride[i] * t.shape()[i];
  BasicTensor<T> out(out_shape);
  std::vector<std::size_t> idx(r, 0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    std::size_t src = 0;
    for (std::size_t i = 0; i < r; ++i) src += idx[i] * in_stride[axes[i]];
    out[n] = t[src];
    for (std::size_t i = r; i-- > 0;) {
      if (++idx[i] < out_shape[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

/// Population variance over all elements (divides by N).
template <typename T>
double variance(const BasicTensor<T>& t) {
  if (t.empty()) throw Error(ErrorCode::Shape, "variance of empty tensor");
  double mean = 0.0;
  for (T v : t.data()) mean += static_cast<double>(v);
  mean /= static_cast<double>(t.size());
  double acc = 0.0;
  for (T v : t.data()) {
    const double d = static_cast<double>(v) - mean;
    acc += d * d;
  }
  return acc / static_cast<double>(t.size());
}

template <typename T>
double max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.shape() != b.shape()) throw Error(ErrorCode::Shape, "shape mismatch in max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

template <typename T>
bool all_finite(const BasicTensor<T>& t) {
  return std::all_of(t.data().begin(), t.data().end(), [](T v) { return std::isfinite(v); });
}

// LVAT raw tensor files.
enum class FileDType : std::uint8_t { F32 = 0, F64 = 1 };

std::vector<std::uint8_t> encode_lvat(const Tensor& t, FileDType dtype);
Tensor decode_lvat(std::span<const std::uint8_t> bytes);
void save_lvat(const std::string& path, const Tensor& t, FileDType dtype);
Tensor load_lvat(const std::string& path);

}  // namespace lva

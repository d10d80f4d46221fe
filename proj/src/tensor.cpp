// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/tensor.hpp"

#include "liveaction/bytes.hpp"

namespace lva {

namespace {
constexpr std::uint8_t kLvatMagic[4] = {'L', 'V', 'A', 'T'};
constexpr std::uint8_t kLvatVersion = 1;
}  // namespace

std::string shape_string(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

void check_signal_shape(const Shape& s) {
  if (s.size() < 2 || s.size() > 4)
    throw Error(ErrorCode::Shape, "signal shape must be (C, T1[, T2[, T3]]), got " + shape_string(s));
  for (auto e : s)
    if (e == 0) throw Error(ErrorCode::Shape, "signal extents must be positive: " + shape_string(s));
}

std::vector<std::uint8_t> encode_lvat(const Tensor& t, FileDType dtype) {
  ByteWriter w;
  w.bytes(kLvatMagic);
  w.u8(kLvatVersion);
  w.u8(static_cast<std::uint8_t>(dtype));
  w.u8(static_cast<std::uint8_t>(t.rank()));
  for (auto e : t.shape()) {
    if (e > UINT32_MAX) throw Error(ErrorCode::Shape, "extent exceeds u32 range");
    w.u32(static_cast<std::uint32_t>(e));
  }
  for (double v : t.data()) {
    if (dtype == FileDType::F32)
      w.f32(static_cast<float>(v));
    else
      w.f64(v);
  }
  return w.take();
}

Tensor decode_lvat(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kLvatMagic)) throw DecodeError(0, "not an LVAT tensor file");
  const std::uint8_t version = r.u8();
  if (version != kLvatVersion) throw DecodeError(4, "unsupported LVAT version " + std::to_string(version));
  const std::uint8_t dtype = r.u8();
  if (dtype > 1) throw DecodeError(5, "unknown LVAT dtype " + std::to_string(dtype));
  const std::uint8_t ndim = r.u8();
  if (ndim == 0) throw DecodeError(6, "LVAT tensor must have at least one axis");
  Shape shape(ndim);
  for (auto& e : shape) {
    const std::size_t at = r.offset();
    e = r.u32();
    if (e == 0) throw DecodeError(at, "zero extent in LVAT shape");
  }
  const std::size_t n = shape_size(shape);
  const std::size_t width = dtype == 0 ? 4 : 8;
  if (r.remaining() != n * width)
    throw DecodeError(r.offset(), "LVAT payload holds " + std::to_string(r.remaining()) +
                                      " bytes, shape " + shape_string(shape) + " needs " +
                                      std::to_string(n * width));
  std::vector<double> data(n);
  for (auto& v : data) v = dtype == 0 ? static_cast<double>(r.f32()) : r.f64();
  return Tensor(std::move(shape), std::move(data));
}

void save_lvat(const std::string& path, const Tensor& t, FileDType dtype) {
  write_file_atomic(path, encode_lvat(t, dtype));
}

Tensor load_lvat(const std::string& path) { return decode_lvat(read_file(path)); }

}  // namespace lva

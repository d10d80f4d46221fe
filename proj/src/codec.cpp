// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/codec.hpp"

#include <bit>
#include <cmath>

#include "liveaction/bytes.hpp"
#include "liveaction/entropy.hpp"
#include "liveaction/pointwise.hpp"
#include "liveaction/wavelet.hpp"

namespace lva {

namespace {

constexpr std::uint8_t kMagic[4] = {'L', 'V', 'A', 'C'};

template <typename T>
LatentCode analyze_as(const Tensor& x, const ModelParams& m) {
  const CodecConfig& cfg = m.config;
  const BasicTensor<T> xt = x.cast<T>();
  const BasicParamStore<T> params = m.weights.cast<T>();
  const auto bands = compand(wpt_forward(xt, cfg.wpt()), cfg.compander);
  const auto y = quantize_hard(latent_cdf(analysis_forward(bands, params, cfg.arch), m.sigma()));
  LatentCode code;
  code.latent_shape = y.shape();
  code.original_shape = x.shape();
  code.symbols.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    // Phi keeps latents strictly inside (-127, 127), so rounding stays in range.
    code.symbols[i] = static_cast<std::int8_t>(std::clamp<T>(y[i], T(kSymbolMin), T(kSymbolMax)));
  }
  return code;
}

template <typename T>
Tensor synthesize_as(const LatentCode& code, const ModelParams& m, const Shape& signal_shape) {
  const CodecConfig& cfg = m.config;
  BasicTensor<T> y(code.latent_shape);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<T>(code.symbols[i]);
  const BasicParamStore<T> params = m.weights.cast<T>();
  const auto z = latent_cdf_inverse(y, m.sigma());
  const auto bands = compand_inverse(synthesis_forward(z, params, cfg.arch), cfg.compander);
  return crop(wpt_inverse(bands, cfg.wpt(), signal_shape), code.original_shape).template cast<double>();
}

Shape signal_shape_for(const LatentCode& code, const ModelParams& m) {
  Shape s{code.original_shape.at(0)};
  const std::size_t f = std::size_t{1} << m.config.arch.levels;
  for (std::size_t a = 1; a < code.latent_shape.size(); ++a) s.push_back(code.latent_shape[a] * f);
  return s;
}

std::vector<float> sigma_f32(const ModelParams& m) {
  std::vector<float> out;
  for (double s : m.sigma()) out.push_back(static_cast<float>(s));
  return out;
}

}  // namespace

LatentCode analyze(const Tensor& x, const ModelParams& m, Precision p) {
  const auto& arch = m.config.arch;
  check_signal_shape(x.shape());
  if (x.rank() != static_cast<std::size_t>(arch.dims) + 1)
    throw Error(ErrorCode::Shape, "input " + shape_string(x.shape()) + " does not have " +
                                      std::to_string(arch.dims) + " spatio-temporal axes");
  if (x.channels() != static_cast<std::size_t>(arch.channels))
    throw Error(ErrorCode::Shape, "input has " + std::to_string(x.channels()) + " channels, model expects " +
                                      std::to_string(arch.channels));
  if (!all_finite(x)) throw Error(ErrorCode::Domain, "input contains non-finite values");
  m.config.wpt().check(x.shape());
  return p == Precision::Single ? analyze_as<float>(x, m) : analyze_as<double>(x, m);
}

Tensor synthesize(const LatentCode& code, const ModelParams& m, Precision p) {
  const Shape s = signal_shape_for(code, m);
  return p == Precision::Single ? synthesize_as<float>(code, m, s) : synthesize_as<double>(code, m, s);
}

std::vector<std::uint8_t> write_container(const LatentCode& code, const ModelParams& m) {
  const auto& arch = m.config.arch;
  const std::size_t d = static_cast<std::size_t>(arch.dims);
  if (code.original_shape.size() != d + 1 || code.latent_shape.size() != d + 1)
    throw Error(ErrorCode::Shape, "latent code rank does not match the model");
  const auto coded = entropy_encode(code.symbols, code.latent_shape[0]);
  const Shape signal = signal_shape_for(code, m);
  std::uint8_t flags = 0;
  if (coded.any_rans) flags |= container_flags::kRans;
  if (coded.any_raw) flags |= container_flags::kRawFallback;
  if (signal != code.original_shape) flags |= container_flags::kPadded;

  ByteWriter w;
  w.bytes(kMagic);
  w.u8(kContainerVersion);
  w.u8(static_cast<std::uint8_t>(d));
  w.u32(static_cast<std::uint32_t>(code.original_shape[0]));
  for (std::size_t a = 1; a <= d; ++a) w.u32(static_cast<std::uint32_t>(code.original_shape[a]));
  w.u8(static_cast<std::uint8_t>(arch.levels));
  w.u32(static_cast<std::uint32_t>(code.latent_shape[0]));
  for (std::size_t a = 1; a <= d; ++a) w.u32(static_cast<std::uint32_t>(code.latent_shape[a]));
  for (float s : sigma_f32(m)) w.f32(s);
  w.u8(flags);
  w.u32(static_cast<std::uint32_t>(coded.tables.size()));
  w.bytes(coded.tables);
  w.u64(coded.payload.size());
  const std::uint32_t crc = crc32(w.buffer());
  w.bytes(coded.payload);
  w.u32(crc);
  return w.take();
}

ParsedContainer read_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  ParsedContainer out;
  ContainerInfo& info = out.info;
  const auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw DecodeError(0, "not an LVAC bitstream");
  if (const auto v = r.u8(); v != kContainerVersion)
    throw DecodeError(4, "unsupported bitstream version " + std::to_string(v));
  const std::size_t d_at = r.offset();
  const std::size_t d = r.u8();
  if (d < 1 || d > 3) throw DecodeError(d_at, "dimension count must be 1 to 3");
  auto extent = [&](const char* what) {
    const std::size_t at = r.offset();
    const std::uint32_t v = r.u32();
    if (v == 0) throw DecodeError(at, std::string(what) + " must be positive");
    return static_cast<std::size_t>(v);
  };
  info.original_shape.push_back(extent("channel count"));
  for (std::size_t a = 0; a < d; ++a) info.original_shape.push_back(extent("extent"));
  const std::size_t j_at = r.offset();
  info.levels = r.u8();
  if (info.levels < 1 || info.levels > 8) throw DecodeError(j_at, "level count out of range");
  info.latent_shape.push_back(extent("latent channel count"));
  for (std::size_t a = 0; a < d; ++a) info.latent_shape.push_back(extent("latent extent"));
  for (std::size_t a = 1; a <= d; ++a) {
    const std::size_t padded = info.latent_shape[a] << info.levels;
    if (info.original_shape[a] > padded || padded - info.original_shape[a] >= (std::size_t{1} << info.levels))
      throw DecodeError(j_at, "latent extents are inconsistent with the original extents");
  }
  for (std::size_t c = 0; c < info.latent_shape[0]; ++c) {
    const std::size_t at = r.offset();
    const float s = r.f32();
    if (!(s > 0.0f) || !std::isfinite(s)) throw DecodeError(at, "sigma table entry is not positive");
    info.sigma.push_back(s);
  }
  const std::size_t flags_at = r.offset();
  info.flags = r.u8();
  if (info.flags & ~(container_flags::kRans | container_flags::kRawFallback | container_flags::kPadded))
    throw DecodeError(flags_at, "unknown coder flags");
  info.table_bytes = r.u32();
  const std::size_t tables_at = r.offset();
  const auto tables = r.bytes(info.table_bytes);
  const std::size_t len_at = r.offset();
  const std::uint64_t payload_len = r.u64();
  const std::size_t header_end = r.offset();
  if (payload_len > r.remaining() || r.remaining() - payload_len != 4)
    throw DecodeError(len_at, "payload length does not match the file size");
  info.payload_bytes = static_cast<std::size_t>(payload_len);
  const auto payload = r.bytes(info.payload_bytes);
  const std::size_t crc_at = r.offset();
  if (r.u32() != crc32(bytes.first(header_end))) throw DecodeError(crc_at, "header checksum mismatch");
  info.file_bytes = bytes.size();

  out.code.original_shape = info.original_shape;
  out.code.latent_shape = info.latent_shape;
  out.code.symbols = entropy_decode(tables, payload, info.symbol_count(), info.latent_shape[0], tables_at,
                                    header_end);
  return out;
}

void check_container_params(const ContainerInfo& info, const ModelParams& m) {
  const auto& arch = m.config.arch;
  auto mismatch = [](const std::string& what) {
    throw Error(ErrorCode::ParamMismatch, "bitstream was produced by a different model: " + what);
  };
  if (info.original_shape.size() != static_cast<std::size_t>(arch.dims) + 1) mismatch("dimension count");
  if (info.original_shape[0] != static_cast<std::size_t>(arch.channels)) mismatch("channel count");
  if (info.levels != arch.levels) mismatch("wavelet levels");
  if (info.latent_shape[0] != static_cast<std::size_t>(arch.latent_channels)) mismatch("latent channels");
  const auto sigma = sigma_f32(m);
  for (std::size_t c = 0; c < sigma.size(); ++c)
    if (std::bit_cast<std::uint32_t>(sigma[c]) != std::bit_cast<std::uint32_t>(info.sigma[c]))
      mismatch("latent scale table");
}

std::vector<std::uint8_t> encode(const Tensor& x, const ModelParams& m, Precision p) {
  return write_container(analyze(x, m, p), m);
}

std::vector<std::uint8_t> encode_padded(const Tensor& x, const ModelParams& m, Precision p) {
  check_signal_shape(x.shape());
  LatentCode code = analyze(pad_replicate(x, std::size_t{1} << m.config.arch.levels), m, p);
  code.original_shape = x.shape();
  return write_container(code, m);
}

Tensor decode(std::span<const std::uint8_t> bytes, const ModelParams& m, Precision p) {
  const ParsedContainer parsed = read_container(bytes);
  check_container_params(parsed.info, m);
  return synthesize(parsed.code, m, p);
}

double bits_per_symbol(std::span<const std::uint8_t> bytes) {
  const ParsedContainer parsed = read_container(bytes);
  return 8.0 * static_cast<double>(parsed.info.payload_bytes) / static_cast<double>(parsed.info.symbol_count());
}

Tensor pad_replicate(const Tensor& x, std::size_t multiple) {
  check_signal_shape(x.shape());
  Shape out_shape = x.shape();
  for (std::size_t a = 1; a < out_shape.size(); ++a) out_shape[a] = (out_shape[a] + multiple - 1) / multiple * multiple;
  if (out_shape == x.shape()) return x;
  Tensor out(out_shape);
  const std::size_t r = out_shape.size();
  std::vector<std::size_t> idx(r, 0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    std::size_t src = 0;
    for (std::size_t a = 0; a < r; ++a) src = src * x.shape()[a] + std::min(idx[a], x.shape()[a] - 1);
    out[n] = x[src];
    for (std::size_t a = r; a-- > 0;) {
      if (++idx[a] < out_shape[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

template <typename T>
BasicTensor<T> crop(const BasicTensor<T>& x, const Shape& shape) {
  if (shape == x.shape()) return x;
  if (shape.size() != x.rank()) throw Error(ErrorCode::Shape, "crop rank mismatch");
  for (std::size_t a = 0; a < shape.size(); ++a)
    if (shape[a] > x.shape()[a]) throw Error(ErrorCode::Shape, "crop larger than tensor");
  BasicTensor<T> out(shape);
  std::vector<std::size_t> idx(shape.size(), 0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    std::size_t src = 0;
    for (std::size_t a = 0; a < shape.size(); ++a) src = src * x.shape()[a] + idx[a];
    out[n] = x[src];
    for (std::size_t a = shape.size(); a-- > 0;) {
      if (++idx[a] < shape[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

template Tensor crop(const Tensor&, const Shape&);
template TensorF crop(const TensorF&, const Shape&);

}  // namespace lva

// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "liveaction/neural.hpp"
#include "liveaction/tensor.hpp"

namespace lva {

/// Quantized latents of one signal.
struct LatentCode {
  std::vector<std::int8_t> symbols;  // (C_z, t...) row-major
  Shape latent_shape;
  Shape original_shape;  // before padding
};

namespace container_flags {
inline constexpr std::uint8_t kRans = 1u << 0;
inline constexpr std::uint8_t kRawFallback = 1u << 1;
inline constexpr std::uint8_t kPadded = 1u << 2;
}  // namespace container_flags

inline constexpr std::uint8_t kContainerVersion = 1;

/// Parsed LVAC header. Layout (little endian):
/// "LVAC" | u8 version | u8 D | u32 C | u32 x D original extents | u8 J |
/// u32 C_z | u32 x D latent extents | f32 x C_z sigma | u8 flags |
/// u32 table length | tables | u64 payload length | payload | u32 CRC32.
/// The CRC covers every byte before the payload.
struct ContainerInfo {
  Shape original_shape;
  Shape latent_shape;
  int levels = 0;
  std::vector<float> sigma;
  std::uint8_t flags = 0;
  std::size_t table_bytes = 0;
  std::size_t payload_bytes = 0;
  std::size_t file_bytes = 0;

  std::size_t symbol_count() const { return shape_size(latent_shape); }
};

struct ParsedContainer {
  ContainerInfo info;
  LatentCode code;
};

/// Analysis half: WPT, compander, G_A, Laplacian CDF, rounding. Extents must
/// be divisible by 2^J and the input finite.
LatentCode analyze(const Tensor& x, const ModelParams& m, Precision p = Precision::Double);
/// Synthesis half for a code whose latent extents times 2^J give the signal
/// extents; the output is cropped to code.original_shape.
Tensor synthesize(const LatentCode& code, const ModelParams& m, Precision p = Precision::Double);

std::vector<std::uint8_t> write_container(const LatentCode& code, const ModelParams& m);
ParsedContainer read_container(std::span<const std::uint8_t> bytes);
/// Throws ParamMismatch unless D, C, J, C_z and the f32 sigma table agree.
void check_container_params(const ContainerInfo& info, const ModelParams& m);

/// Rejects extents that are not multiples of 2^J.
std::vector<std::uint8_t> encode(const Tensor& x, const ModelParams& m, Precision p = Precision::Double);
/// Replicate-pads each axis up to a multiple of 2^J first; decode crops.
std::vector<std::uint8_t> encode_padded(const Tensor& x, const ModelParams& m,
                                        Precision p = Precision::Double);
Tensor decode(std::span<const std::uint8_t> bytes, const ModelParams& m, Precision p = Precision::Double);

/// 8 * payload bytes / latent symbol count.
double bits_per_symbol(std::span<const std::uint8_t> bytes);

/// Replicate padding of every spatial axis up to a multiple of `multiple`.
Tensor pad_replicate(const Tensor& x, std::size_t multiple);
/// Leading corner of `x` with the given shape.
template <typename T>
BasicTensor<T> crop(const BasicTensor<T>& x, const Shape& shape);

}  // namespace lva

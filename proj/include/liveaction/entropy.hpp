// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lva {

/// Latent symbols are signed integers in [-127, 127].
inline constexpr int kSymbolMin = -127;
inline constexpr int kSymbolMax = 127;
inline constexpr int kAlphabet = kSymbolMax - kSymbolMin + 1;  // 255

/// Frequencies are normalized to 2^12.
inline constexpr int kScaleBits = 12;

enum class ChannelMode : std::uint8_t { Raw = 0, Rans = 1 };

/// Coded form of a symbol stream split into equally long channels. Each
/// channel is coded independently with its own static frequency table.
///
/// Table section, per channel:
///   u8 mode | u32 segment length | (rANS only) u8 n-1 | n x (u8 symbol+127, u16 freq-1)
/// Payload: the channel segments back to back.
struct EntropyCoded {
  std::vector<std::uint8_t> tables;
  std::vector<std::uint8_t> payload;
  bool any_rans = false;
  bool any_raw = false;
};

/// Largest-remainder normalization of a histogram to 2^12. Symbols with a
/// nonzero count keep a frequency of at least one.
std::vector<std::uint32_t> normalize_frequencies(std::span<const std::uint64_t> counts);

/// Throws InvalidArgument for symbols outside [-127, 127] or a length not
/// divisible by `channels`.
EntropyCoded entropy_encode(std::span<const std::int8_t> symbols, std::size_t channels);

/// Inverse of entropy_encode. Corrupt or truncated input raises DecodeError;
/// reported offsets are positions inside `tables` or `payload` plus the
/// matching base, so a container can report file offsets.
std::vector<std::int8_t> entropy_decode(std::span<const std::uint8_t> tables,
                                        std::span<const std::uint8_t> payload, std::size_t count,
                                        std::size_t channels, std::size_t tables_base = 0,
                                        std::size_t payload_base = 0);

/// Shannon entropy of the empirical distribution, in bits per symbol.
double empirical_entropy(std::span<const std::int8_t> symbols);

}  // namespace lva

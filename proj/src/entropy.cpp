// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/entropy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "liveaction/bytes.hpp"
#include "liveaction/error.hpp"

namespace lva {

namespace {

// Byte-wise rANS with a 32-bit state kept in [L, 256 L).
constexpr std::uint32_t kRansLow = 1u << 23;
constexpr std::uint32_t kScale = 1u << kScaleBits;

struct Table {
  std::array<std::uint32_t, kAlphabet> freq{};
  std::array<std::uint32_t, kAlphabet> cum{};
};

Table make_table(std::span<const std::uint32_t> freq) {
  Table t;
  std::uint32_t acc = 0;
  for (int s = 0; s < kAlphabet; ++s) {
    t.freq[s] = freq[s];
    t.cum[s] = acc;
    acc += freq[s];
  }
  return t;
}

std::vector<std::uint8_t> rans_encode(std::span<const std::int8_t> symbols, const Table& t) {
  std::vector<std::uint8_t> out;
  std::uint32_t x = kRansLow;
  for (std::size_t i = symbols.size(); i-- > 0;) {
    const int s = symbols[i] - kSymbolMin;
    const std::uint32_t f = t.freq[s];
    const std::uint32_t x_max = ((kRansLow >> kScaleBits) << 8) * f;
    while (x >= x_max) {
      out.push_back(static_cast<std::uint8_t>(x & 0xff));
      x >>= 8;
    }
    x = ((x / f) << kScaleBits) + (x % f) + t.cum[s];
  }
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(x & 0xff));
    x >>= 8;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

void rans_decode(std::span<const std::uint8_t> seg, std::size_t seg_offset, const Table& t,
                 std::span<std::int8_t> out) {
  std::array<std::uint8_t, kScale> slot_symbol{};
  for (int s = 0; s < kAlphabet; ++s)
    for (std::uint32_t j = 0; j < t.freq[s]; ++j) slot_symbol[t.cum[s] + j] = static_cast<std::uint8_t>(s);
  std::size_t pos = 0;
  auto next = [&]() -> std::uint32_t {
    if (pos >= seg.size()) throw DecodeError(seg_offset + pos, "payload: rANS segment truncated");
    return seg[pos++];
  };
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x = (x << 8) | next();
  for (auto& sym : out) {
    const std::uint32_t slot = x & (kScale - 1);
    const int s = slot_symbol[slot];
    x = t.freq[s] * (x >> kScaleBits) + slot - t.cum[s];
    while (x < kRansLow) x = (x << 8) | next();
    sym = static_cast<std::int8_t>(s + kSymbolMin);
  }
  if (x != kRansLow || pos != seg.size())
    throw DecodeError(seg_offset + pos, "payload: rANS segment does not terminate cleanly");
}

}  // namespace

std::vector<std::uint32_t> normalize_frequencies(std::span<const std::uint64_t> counts) {
  std::uint64_t total = 0;
  std::size_t used = 0;
  for (auto c : counts) {
    total += c;
    used += c != 0;
  }
  std::vector<std::uint32_t> freq(counts.size(), 0);
  if (total == 0) return freq;
  if (used > kScale) throw Error(ErrorCode::InvalidArgument, "alphabet larger than the frequency scale");
  // Every used symbol gets one slot; the remaining slots are shared by
  // largest remainder, ties going to the lower symbol.
  const std::uint64_t spare = kScale - used;
  std::vector<std::pair<std::uint64_t, std::size_t>> rem;
  std::uint64_t given = 0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (!counts[s]) continue;
    const unsigned __int128 num = static_cast<unsigned __int128>(counts[s]) * spare;
    const auto q = static_cast<std::uint64_t>(num / total);
    freq[s] = static_cast<std::uint32_t>(1 + q);
    given += q;
    rem.emplace_back(static_cast<std::uint64_t>(num % total), s);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; given < spare; ++i, ++given) freq[rem[i].second] += 1;
  return freq;
}

EntropyCoded entropy_encode(std::span<const std::int8_t> symbols, std::size_t channels) {
  if (channels == 0 || symbols.size() % channels != 0)
    throw Error(ErrorCode::InvalidArgument, "symbol count " + std::to_string(symbols.size()) +
                                                " is not divisible into " + std::to_string(channels) + " channels");
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] < kSymbolMin)
      throw Error(ErrorCode::InvalidArgument, "symbol " + std::to_string(int{symbols[i]}) + " at index " +
                                                  std::to_string(i) + " is outside [-127, 127]");
  const std::size_t per = symbols.size() / channels;
  EntropyCoded out;
  ByteWriter tables;
  for (std::size_t c = 0; c < channels; ++c) {
    const auto seg = symbols.subspan(c * per, per);
    std::vector<std::uint64_t> counts(kAlphabet, 0);
    for (auto s : seg) counts[s - kSymbolMin] += 1;
    const auto freq = normalize_frequencies(counts);
    std::vector<std::uint8_t> coded;
    std::size_t n_used = 0;
    if (per > 0) {
      coded = rans_encode(seg, make_table(freq));
      n_used = static_cast<std::size_t>(std::count_if(freq.begin(), freq.end(), [](auto f) { return f != 0; }));
    }
    // Raw storage whenever modeling (table plus stream) would not pay off.
    const bool use_rans = per > 0 && coded.size() + 1 + 3 * n_used < per;
    tables.u8(static_cast<std::uint8_t>(use_rans ? ChannelMode::Rans : ChannelMode::Raw));
    if (use_rans) {
      tables.u32(static_cast<std::uint32_t>(coded.size()));
      tables.u8(static_cast<std::uint8_t>(n_used - 1));
      for (int s = 0; s < kAlphabet; ++s) {
        if (!freq[s]) continue;
        tables.u8(static_cast<std::uint8_t>(s));
        tables.u16(static_cast<std::uint16_t>(freq[s] - 1));
      }
      out.payload.insert(out.payload.end(), coded.begin(), coded.end());
      out.any_rans = true;
    } else {
      tables.u32(static_cast<std::uint32_t>(per));
      for (auto s : seg) out.payload.push_back(static_cast<std::uint8_t>(s - kSymbolMin));
      out.any_raw = true;
    }
  }
  out.tables = tables.take();
  return out;
}

std::vector<std::int8_t> entropy_decode(std::span<const std::uint8_t> tables,
                                        std::span<const std::uint8_t> payload, std::size_t count,
                                        std::size_t channels, std::size_t tables_base,
                                        std::size_t payload_base) {
  if (channels == 0 || count % channels != 0)
    throw Error(ErrorCode::InvalidArgument, "symbol count is not divisible into channels");
  const std::size_t tb = tables_base, pb = payload_base;
  const std::size_t per = count / channels;
  std::vector<std::int8_t> out(count);
  ByteReader tr(tables, tb);
  std::size_t pos = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    const std::size_t mode_at = tr.offset();
    const std::uint8_t mode = tr.u8();
    const std::size_t len_at = tr.offset();
    const std::uint32_t len = tr.u32();
    if (len > payload.size() - pos)
      throw DecodeError(tb + len_at, "tables: channel " + std::to_string(c) + " segment overruns the payload");
    const auto seg = payload.subspan(pos, len);
    std::span<std::int8_t> dst(out.data() + c * per, per);
    if (mode == static_cast<std::uint8_t>(ChannelMode::Raw)) {
      if (len != per) throw DecodeError(tb + len_at, "tables: raw segment length does not match symbol count");
      for (std::size_t i = 0; i < per; ++i) {
        if (seg[i] >= kAlphabet) throw DecodeError(pb + pos + i, "payload: raw symbol out of range");
        dst[i] = static_cast<std::int8_t>(int{seg[i]} + kSymbolMin);
      }
    } else if (mode == static_cast<std::uint8_t>(ChannelMode::Rans)) {
      const std::size_t n = std::size_t{tr.u8()} + 1;
      std::vector<std::uint32_t> freq(kAlphabet, 0);
      std::uint32_t total = 0;
      int prev = -1;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t at = tr.offset();
        const int s = tr.u8();
        const std::uint32_t f = std::uint32_t{tr.u16()} + 1;
        if (s >= kAlphabet || s <= prev) throw DecodeError(tb + at, "tables: invalid symbol entry");
        prev = s;
        freq[s] = f;
        total += f;
      }
      if (total != kScale) throw DecodeError(tb + tr.offset(), "tables: frequencies do not sum to 4096");
      rans_decode(seg, pb + pos, make_table(freq), dst);
    } else {
      throw DecodeError(tb + mode_at, "tables: unknown channel mode " + std::to_string(mode));
    }
    pos += len;
  }
  if (tr.remaining() != 0) throw DecodeError(tb + tr.offset(), "tables: trailing bytes");
  if (pos != payload.size()) throw DecodeError(pb + pos, "payload: trailing bytes");
  return out;
}

double empirical_entropy(std::span<const std::int8_t> symbols) {
  if (symbols.empty()) return 0.0;
  std::vector<std::uint64_t> counts(kAlphabet, 0);
  for (auto s : symbols) counts[s - kSymbolMin] += 1;
  double h = 0.0;
  const double n = static_cast<double>(symbols.size());
  for (auto c : counts)
    if (c) h -= (static_cast<double>(c) / n) * std::log2(static_cast<double>(c) / n);
  return h;
}

}  // namespace lva

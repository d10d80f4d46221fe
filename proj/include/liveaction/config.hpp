// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "liveaction/pointwise.hpp"
#include "liveaction/wavelet.hpp"

namespace lva {

/// Network shape. Zero-valued groups/heads mean "derive from hidden width".
struct ArchConfig {
  int dims = 2;             // D
  int channels = 3;         // C
  int levels = 4;           // J
  int latent_channels = 12; // C_z
  int enc_depth = 4;
  int dec_depth = 8;
  int groups1 = 0;
  int groups2 = 0;
  int gn_groups = 8;
  int se_reduction = 4;
  int heads = 0;
  int ffn_ratio = 2;
  int kernel = 3;

  /// C * 2^(J*D).
  std::size_t hidden() const;
  ArchConfig resolved() const;
  /// Requires a resolved config.
  void validate() const;
};

/// Largest divisor g of `hidden` with g*g <= hidden: the widest grouping for
/// which two grouped stages joined by a shuffle still connect every input to
/// every output.
int default_groups(std::size_t hidden);
/// hidden/64 heads (at least one), lowered to the nearest divisor of hidden.
int default_heads(std::size_t hidden);

struct CodecConfig {
  ArchConfig arch;
  CompanderParams compander;

  WptConfig wpt() const { return {arch.levels, arch.dims}; }
  CodecConfig resolved() const;
  void validate() const;
  /// Canonical "key=value" lines, one per field, in a fixed order.
  std::string to_text() const;
  /// 16 hex digits of FNV-1a over to_text().
  std::string digest() const;
};

struct ModalityDescriptor {
  int dims = 2;
  int channels = 3;
  bool channels_as_dimension = false;
  int bit_depth = 8;
  std::string name;
};

struct Suggestion {
  CodecConfig codec;
  double lambda = 0.03;
  /// Signal layout after applying channels_as_dimension.
  int dims = 0;
  int channels = 0;
};

inline constexpr std::size_t kMinHidden = 512;
inline constexpr std::size_t kMaxHidden = 1536;

/// Hyperparameter heuristics: J is the smallest level count whose hidden
/// width C*2^(JD) reaches 512 (rejected above 1536), the latent width is the
/// hidden width divided by `dimensionality_reduction`, depths 4/8, lambda 0.03.
Suggestion suggest_config(const ModalityDescriptor& m, double dimensionality_reduction = 64.0);

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

/// Flat "key = value" text with '#' comments. Errors carry line numbers.
std::vector<KeyValue> parse_key_value(std::string_view text);

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

int parse_int(const KeyValue& kv);
double parse_double(const KeyValue& kv);
bool parse_bool(const KeyValue& kv);

/// Applies one key to a codec config. Returns false for keys it does not own.
bool apply_codec_key(CodecConfig& cfg, const KeyValue& kv);

}  // namespace lva

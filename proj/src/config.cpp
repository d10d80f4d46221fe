// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

namespace lva {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void config_error(const KeyValue& kv, const std::string& what) {
  throw Error(ErrorCode::Config, "line " + std::to_string(kv.line) + ": " + kv.key + ": " + what);
}

void require_divisible(std::size_t hidden, int by, const char* what) {
  if (by <= 0 || hidden % static_cast<std::size_t>(by) != 0)
    throw Error(ErrorCode::Config, "hidden width " + std::to_string(hidden) + " is not divisible by " +
                                       what + " = " + std::to_string(by));
}

}  // namespace

std::size_t ArchConfig::hidden() const {
  if (dims < 1 || dims > 3 || levels < 1 || channels < 1) return 0;
  return static_cast<std::size_t>(channels) << (levels * dims);
}

int default_groups(std::size_t hidden) {
  int best = 1;
  for (std::size_t g = 1; g * g <= hidden; ++g)
    if (hidden % g == 0) best = static_cast<int>(g);
  return best;
}

int default_heads(std::size_t hidden) {
  std::size_t h = std::max<std::size_t>(1, hidden / 64);
  while (h > 1 && hidden % h != 0) --h;
  return static_cast<int>(h);
}

ArchConfig ArchConfig::resolved() const {
  ArchConfig r = *this;
  const std::size_t h = hidden();
  if (h == 0) return r;
  if (r.groups1 == 0) r.groups1 = default_groups(h);
  if (r.groups2 == 0) r.groups2 = r.groups1;
  if (r.heads == 0) r.heads = default_heads(h);
  return r;
}

void ArchConfig::validate() const {
  if (dims < 1 || dims > 3) throw Error(ErrorCode::Config, "dims must be 1, 2 or 3");
  if (channels < 1) throw Error(ErrorCode::Config, "channels must be positive");
  if (levels < 1 || levels * dims > 24) throw Error(ErrorCode::Config, "levels out of range");
  if (latent_channels < 1) throw Error(ErrorCode::Config, "latent_channels must be positive");
  if (enc_depth < 0 || dec_depth < 0) throw Error(ErrorCode::Config, "depths must be non-negative");
  if (kernel < 1 || kernel % 2 == 0) throw Error(ErrorCode::Config, "kernel must be odd and positive");
  if (ffn_ratio < 1) throw Error(ErrorCode::Config, "ffn_ratio must be positive");
  const std::size_t h = hidden();
  require_divisible(h, groups1, "groups1");
  require_divisible(h, groups2, "groups2");
  require_divisible(h, gn_groups, "gn_groups");
  require_divisible(h, heads, "heads");
  require_divisible(h, se_reduction, "se_reduction");
}

CodecConfig CodecConfig::resolved() const {
  CodecConfig r = *this;
  r.arch = arch.resolved();
  return r;
}

void CodecConfig::validate() const {
  arch.validate();
  compander.validate();
}

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string CodecConfig::to_text() const {
  std::ostringstream os;
  os << "dims=" << arch.dims << "\nchannels=" << arch.channels << "\nlevels=" << arch.levels
     << "\nlatent_channels=" << arch.latent_channels << "\nenc_depth=" << arch.enc_depth
     << "\ndec_depth=" << arch.dec_depth << "\ngroups1=" << arch.groups1 << "\ngroups2=" << arch.groups2
     << "\ngn_groups=" << arch.gn_groups << "\nse_reduction=" << arch.se_reduction
     << "\nheads=" << arch.heads << "\nffn_ratio=" << arch.ffn_ratio << "\nkernel=" << arch.kernel
     << "\ngamma=" << format_double(compander.gamma) << "\nepsilon=" << format_double(compander.epsilon) << "\n";
  return os.str();
}

std::string CodecConfig::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Suggestion suggest_config(const ModalityDescriptor& m, double dimensionality_reduction) {
  if (m.channels < 1) throw Error(ErrorCode::Config, "modality must have at least one channel");
  int dims = m.dims, channels = m.channels;
  if (m.channels_as_dimension) {
    dims += 1;
    channels = 1;
  }
  if (dims < 1 || dims > 3)
    throw Error(ErrorCode::Config, "modality dimension must be 1..3 (after channels-as-dimension), got " +
                                       std::to_string(dims));
  if (!(dimensionality_reduction > 0.0)) throw Error(ErrorCode::Config, "dimensionality reduction must be positive");

  int levels = 1;
  while ((static_cast<std::size_t>(channels) << (levels * dims)) < kMinHidden) ++levels;
  const std::size_t hidden = static_cast<std::size_t>(channels) << (levels * dims);
  if (hidden > kMaxHidden) {
    std::string msg = "no level count puts hidden width C*2^(JD) in [512, 1536] for C=" +
                      std::to_string(channels) + ", D=" + std::to_string(dims) + "; nearest options:";
    if (levels > 1)
      msg += " J=" + std::to_string(levels - 1) + " (hidden " +
             std::to_string(static_cast<std::size_t>(channels) << ((levels - 1) * dims)) + ")";
    msg += " J=" + std::to_string(levels) + " (hidden " + std::to_string(hidden) + ")";
    throw Error(ErrorCode::Config, msg);
  }

  Suggestion s;
  s.dims = dims;
  s.channels = channels;
  auto& a = s.codec.arch;
  a.dims = dims;
  a.channels = channels;
  a.levels = levels;
  a.latent_channels = std::max(1, static_cast<int>(std::lround(static_cast<double>(hidden) / dimensionality_reduction)));
  a.enc_depth = 4;
  a.dec_depth = 8;
  s.codec = s.codec.resolved();
  s.codec.validate();
  return s;
}

std::vector<KeyValue> parse_key_value(std::string_view text) {
  std::vector<KeyValue> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": expected key = value");
    KeyValue kv{trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)), line_no};
    if (kv.key.empty()) throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": empty key");
    for (const auto& prev : out)
      if (prev.key == kv.key)
        throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": duplicate key '" + kv.key +
                                           "' (first set on line " + std::to_string(prev.line) + ")");
    out.push_back(std::move(kv));
  }
  return out;
}

int parse_int(const KeyValue& kv) {
  int v = 0;
  const auto* end = kv.value.data() + kv.value.size();
  auto [p, ec] = std::from_chars(kv.value.data(), end, v);
  if (ec != std::errc() || p != end) config_error(kv, "expected an integer, got '" + kv.value + "'");
  return v;
}

double parse_double(const KeyValue& kv) {
  try {
    std::size_t used = 0;
    const double v = std::stod(kv.value, &used);
    if (used != kv.value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    config_error(kv, "expected a number, got '" + kv.value + "'");
  }
}

bool parse_bool(const KeyValue& kv) {
  if (kv.value == "true" || kv.value == "1" || kv.value == "yes") return true;
  if (kv.value == "false" || kv.value == "0" || kv.value == "no") return false;
  config_error(kv, "expected true/false, got '" + kv.value + "'");
}

bool apply_codec_key(CodecConfig& cfg, const KeyValue& kv) {
  auto& a = cfg.arch;
  const std::string& k = kv.key;
  if (k == "dims") a.dims = parse_int(kv);
  else if (k == "channels") a.channels = parse_int(kv);
  else if (k == "levels") a.levels = parse_int(kv);
  else if (k == "latent_channels") a.latent_channels = parse_int(kv);
  else if (k == "enc_depth") a.enc_depth = parse_int(kv);
  else if (k == "dec_depth") a.dec_depth = parse_int(kv);
  else if (k == "groups1") a.groups1 = parse_int(kv);
  else if (k == "groups2") a.groups2 = parse_int(kv);
  else if (k == "gn_groups") a.gn_groups = parse_int(kv);
  else if (k == "se_reduction") a.se_reduction = parse_int(kv);
  else if (k == "heads") a.heads = parse_int(kv);
  else if (k == "ffn_ratio") a.ffn_ratio = parse_int(kv);
  else if (k == "kernel") a.kernel = parse_int(kv);
  else if (k == "gamma") cfg.compander.gamma = parse_double(kv);
  else if (k == "epsilon") cfg.compander.epsilon = parse_double(kv);
  else return false;
  return true;
}

}  // namespace lva

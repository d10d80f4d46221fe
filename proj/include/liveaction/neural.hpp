// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "liveaction/config.hpp"
#include "liveaction/tensor.hpp"

namespace lva {

inline constexpr double kGroupNormEps = 1e-5;
inline constexpr double kAttentionEps = 1e-6;

/// Named tensors in insertion order.
template <typename T>
class BasicParamStore {
 public:
  void add(std::string name, BasicTensor<T> value) {
    if (index_.count(name)) throw Error(ErrorCode::InvalidArgument, "duplicate parameter '" + name + "'");
    index_.emplace(name, names_.size());
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorCode::NotFound, "no parameter named '" + name + "'");
    return it->second;
  }
  const BasicTensor<T>& at(const std::string& name) const { return values_[index_of(name)]; }
  BasicTensor<T>& at(const std::string& name) { return values_[index_of(name)]; }

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const BasicTensor<T>& value(std::size_t i) const { return values_[i]; }
  BasicTensor<T>& value(std::size_t i) { return values_[i]; }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += v.size();
    return n;
  }

  template <typename U>
  BasicParamStore<U> cast() const {
    BasicParamStore<U> out;
    for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], values_[i].template cast<U>());
    return out;
  }

  bool operator==(const BasicParamStore& o) const { return names_ == o.names_ && values_ == o.values_; }

 private:
  std::vector<std::string> names_;
  std::vector<BasicTensor<T>> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

using ParamStore = BasicParamStore<double>;

/// Every learnable weight of the analysis and synthesis transforms plus the
/// per-channel Laplacian scales, stored as `latent.log_sigma` (sigma = exp).
struct ModelParams {
  CodecConfig config;
  ParamStore weights;

  std::vector<double> sigma() const;
};

/// Name of a parameter inside encoder block / decoder block `b`.
std::string enc_param(int block, const char* leaf);
std::string dec_param(int block, const char* leaf);
inline constexpr const char* kLogSigma = "latent.log_sigma";

/// True for parameters on the encoder side of the quantizer (frozen in the
/// hard-quantization training phase).
bool is_encoder_param(const std::string& name);

/// Fresh parameters: fan-in scaled uniform kernels, zero biases, identity
/// group-norm affine, zero SE expansion weights (gate starts at 0.5),
/// sigma = 1.
ModelParams init_model(const CodecConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Layers. Feature maps are (channels, t1..tD) tensors.

/// Grouped convolution, weight (C_out, C_in/groups, k^D), same-padded with
/// half-sample symmetric extension.
template <typename T>
BasicTensor<T> grouped_conv(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                            const BasicTensor<T>& bias, int groups);

/// 1x1 dense projection, weight (C_out, C_in).
template <typename T>
BasicTensor<T> pointwise(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias);

/// ShuffleNet interleave: output channel g*q + r takes input channel
/// r*(C/g) + q.
template <typename T>
BasicTensor<T> channel_shuffle(const BasicTensor<T>& x, int groups);
std::vector<std::size_t> shuffle_source(std::size_t channels, int groups);

template <typename T>
BasicTensor<T> gelu(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> group_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta,
                          int groups, double eps = kGroupNormEps);

/// Squeeze-excitation: gate = sigmoid(W2 relu(W1 mean(x) + b1) + b2).
template <typename T>
BasicTensor<T> se_attention(const BasicTensor<T>& x, const BasicTensor<T>& w1, const BasicTensor<T>& b1,
                            const BasicTensor<T>& w2, const BasicTensor<T>& b2);

/// Multi-head ReLU linear attention over all positions; q, k, v are (H, P...)
/// with H split into `heads` contiguous slices.
template <typename T>
BasicTensor<T> linear_attention(const BasicTensor<T>& q, const BasicTensor<T>& k, const BasicTensor<T>& v,
                                int heads, double eps = kAttentionEps);

/// Companded wavelet bands (hidden, t...) -> latents (C_z, t...).
template <typename T>
BasicTensor<T> analysis_forward(const BasicTensor<T>& bands, const BasicParamStore<T>& params,
                                const ArchConfig& cfg);

/// Dequantized latents (C_z, t...) -> companded bands (hidden, t...).
template <typename T>
BasicTensor<T> synthesis_forward(const BasicTensor<T>& latents, const BasicParamStore<T>& params,
                                 const ArchConfig& cfg);

// ---------------------------------------------------------------------------
// Model files: "LVAM" | u8 version | u32 manifest length | JSON manifest |
// f32 little-endian blob. See docs/FORMATS.md.

std::vector<std::uint8_t> encode_model(const ModelParams& m);
ModelParams decode_model(std::span<const std::uint8_t> bytes);
void save_model(const std::string& path, const ModelParams& m);

/// Copy whose weights are rounded through f32, i.e. exactly what a model
/// file round trip yields.
ModelParams round_to_f32(const ModelParams& m);

}  // namespace lva

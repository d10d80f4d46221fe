// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "liveaction/config.hpp"
#include "liveaction/neural.hpp"
#include "liveaction/tensor.hpp"
#include "liveaction/wavelet.hpp"

/// Tape-based reverse-mode differentiation over double tensors. Every op
/// computes its value eagerly and records a closure that maps the output
/// gradient onto its inputs.
namespace lva::ad {

struct Var {
  int id = -1;
};

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, const Tensor& grad_out)>;

  Var constant(Tensor value);
  Var leaf(Tensor value, bool requires_grad = true);

  const Tensor& value(Var v) const { return node(v).value; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  /// Accumulated gradient; zeros when nothing reached the node.
  Tensor grad(Var v) const;

  /// Reverse sweep from a single-element output.
  void backward(Var loss);

  /// Records a computed value. `fn` runs only if some input requires grad.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn fn);

  /// Mutable gradient buffer of `v`, zero-initialized on first use.
  Tensor& grad_buffer(Var v);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };
  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
};

// Layer ops.
Var grouped_conv(Graph& g, Var x, Var weight, Var bias, int groups);
Var pointwise(Graph& g, Var x, Var weight, Var bias);
Var channel_shuffle(Graph& g, Var x, int groups);
Var gelu(Graph& g, Var x);
Var relu(Graph& g, Var x);
Var sigmoid(Graph& g, Var x);
Var add(Graph& g, Var a, Var b);
/// Mean over all non-channel axes; output (C, 1).
Var mean_pool(Graph& g, Var x);
/// x * gate broadcast over positions; gate has one element per channel.
Var scale_channels(Graph& g, Var x, Var gate);
Var group_norm(Graph& g, Var x, Var gamma, Var beta, int groups, double eps = kGroupNormEps);
Var se_attention(Graph& g, Var x, Var w1, Var b1, Var w2, Var b2);
Var linear_attention(Graph& g, Var q, Var k, Var v, int heads, double eps = kAttentionEps);

// Codec pointwise maps. Scales enter as log-sigma (sigma = exp).
Var compand(Graph& g, Var x, const CompanderParams& p);
Var compand_inverse(Graph& g, Var y, const CompanderParams& p);
Var latent_cdf(Graph& g, Var z, Var log_sigma);
Var latent_cdf_inverse(Graph& g, Var y, Var log_sigma);
/// y + noise; the noise is a constant so the gradient passes through.
Var add_noise(Graph& g, Var y, const Tensor& noise);

Var wpt_forward(Graph& g, Var x, const WptConfig& cfg);
Var wpt_inverse(Graph& g, Var y, const WptConfig& cfg, const Shape& original_shape);

/// log10(max(SSE, 1e-12)) + lambda * log2(max(Var, 1e-9)), where SSE sums
/// squared errors over every reconstruction and Var is the population
/// variance over every latent element.
Var rd_loss(Graph& g, std::span<const Var> reconstructions, std::span<const Tensor> targets,
            std::span<const Var> latents, double lambda);

/// Parameter store bound to graph leaves.
class BoundParams {
 public:
  /// `trainable(name)` decides which leaves require gradients.
  BoundParams(Graph& g, const ParamStore& store, const std::function<bool(const std::string&)>& trainable);
  Var operator[](const std::string& name) const { return vars_[store_->index_of(name)]; }
  Var at(std::size_t i) const { return vars_[i]; }
  std::size_t size() const { return vars_.size(); }

 private:
  const ParamStore* store_;
  std::vector<Var> vars_;
};

Var analysis(Graph& g, Var bands, const BoundParams& p, const ArchConfig& cfg);
Var synthesis(Graph& g, Var latents, const BoundParams& p, const ArchConfig& cfg);

}  // namespace lva::ad

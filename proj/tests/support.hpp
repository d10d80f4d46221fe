// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "liveaction/autodiff.hpp"
#include "liveaction/neural.hpp"
#include "liveaction/random.hpp"
#include "liveaction/tensor.hpp"

namespace lva::testing {

inline Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
std::uint64_t hash_tensor(const BasicTensor<T>& t) {
  return fnv1a(t.data().data(), t.size() * sizeof(T));
}

/// L = sum(w * y) with w a constant.
inline ad::Var weighted_sum(ad::Graph& g, ad::Var y, const Tensor& w) {
  Tensor out({1});
  const Tensor& yv = g.value(y);
  for (std::size_t i = 0; i < yv.size(); ++i) out[0] += w[i] * yv[i];
  return g.record(out, {y}, [y, w](ad::Graph& gg, const Tensor& go) {
    Tensor& gb = gg.grad_buffer(y);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += w[i] * go[0];
  });
}

using GraphFn = std::function<ad::Var(ad::Graph&, const std::vector<ad::Var>&)>;

struct GradCheck {
  double max_rel_error = 0.0;  // max |analytic - numeric| / max(max |numeric|, floor), over inputs
  std::size_t checked = 0;
};

/// Central finite differences (step h) of L = sum(w * f(inputs)) against
/// the reverse sweep, one input tensor at a time. The relative error of an
/// input is its largest absolute gradient error over the largest numeric
/// gradient magnitude of that input.
inline GradCheck finite_difference_check(const std::vector<Tensor>& inputs, const GraphFn& f,
                                         std::uint64_t seed = 7, double h = 1e-5) {
  Rng rng(seed);
  Tensor w;
  std::vector<Tensor> analytic;
  {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const auto& t : inputs) vars.push_back(g.leaf(t));
    const ad::Var y = f(g, vars);
    w = random_tensor(g.value(y).shape(), rng);
    const ad::Var loss = weighted_sum(g, y, w);
    g.backward(loss);
    for (auto v : vars) analytic.push_back(g.grad(v));
  }
  auto eval = [&](const std::vector<Tensor>& in) {
    ad::Graph g;
    std::vector<ad::Var> vars;
    for (const auto& t : in) vars.push_back(g.constant(t));
    return g.value(weighted_sum(g, f(g, vars), w))[0];
  };
  GradCheck out;
  std::vector<Tensor> probe = inputs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    double max_err = 0.0, max_num = 0.0;
    for (std::size_t j = 0; j < inputs[i].size(); ++j) {
      const double x0 = inputs[i][j];
      probe[i][j] = x0 + h;
      const double up = eval(probe);
      probe[i][j] = x0 - h;
      const double down = eval(probe);
      probe[i][j] = x0;
      const double num = (up - down) / (2.0 * h);
      max_err = std::max(max_err, std::abs(num - analytic[i][j]));
      max_num = std::max(max_num, std::abs(num));
      ++out.checked;
    }
    out.max_rel_error = std::max(out.max_rel_error, max_err / std::max(max_num, 1e-6));
  }
  return out;
}

/// Softmax-free quadratic attention: out_i = sum_j (q_i . k_j) v_j / (sum_j q_i . k_j + eps)
/// with ReLU features, evaluated head by head with explicit pairwise sums.
inline Tensor quadratic_attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads, double eps) {
  const std::size_t hdim = q.channels() / static_cast<std::size_t>(heads);
  const std::size_t n = q.plane();
  Tensor out(q.shape());
  auto relu = [](double x) { return x > 0.0 ? x : 0.0; };
  for (int hh = 0; hh < heads; ++hh) {
    const std::size_t c0 = static_cast<std::size_t>(hh) * hdim;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> num(hdim, 0.0);
      double den = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < hdim; ++c) s += relu(q[(c0 + c) * n + i]) * relu(k[(c0 + c) * n + j]);
        for (std::size_t c = 0; c < hdim; ++c) num[c] += s * v[(c0 + c) * n + j];
        den += s;
      }
      for (std::size_t c = 0; c < hdim; ++c) out[(c0 + c) * n + i] = num[c] / (den + eps);
    }
  }
  return out;
}

inline double max_rel_diff(const Tensor& a, const Tensor& b) {
  double scale = 0.0;
  for (double v : b.data()) scale = std::max(scale, std::abs(v));
  return max_abs_diff(a, b) / std::max(scale, 1e-300);
}

/// Loss of a tiny 1-D codec (soft path without noise) differentiated with
/// respect to every parameter tensor, each compared against central
/// differences. Returns (parameter name, relative error) pairs.
inline std::vector<std::pair<std::string, double>> pipeline_gradient_check(std::uint64_t seed) {
  ArchConfig a;
  a.dims = 1;
  a.channels = 1;
  a.levels = 2;
  a.latent_channels = 2;
  a.enc_depth = 1;
  a.dec_depth = 1;
  a.gn_groups = 2;
  a = a.resolved();
  const CodecConfig cfg{a, {}};
  ModelParams m = init_model(cfg, 3);
  Rng rng(seed);
  // Move away from the zero-initialized weights so every path carries gradient.
  for (std::size_t i = 0; i < m.weights.size(); ++i)
    for (auto& v : m.weights.value(i).data()) v += rng.uniform(-0.1, 0.1);
  const Tensor x = random_tensor({1, 16}, rng, 0.0, 1.0);
  const Tensor targets[] = {x};
  auto build = [&](ad::Graph& g, const ad::BoundParams& b) {
    const ad::Var bands = ad::compand(g, ad::wpt_forward(g, g.constant(x), cfg.wpt()), cfg.compander);
    const ad::Var y = ad::latent_cdf(g, ad::analysis(g, bands, b, a), b[kLogSigma]);
    const ad::Var out = ad::wpt_inverse(
        g, ad::compand_inverse(g, ad::synthesis(g, ad::latent_cdf_inverse(g, y, b[kLogSigma]), b, a), cfg.compander),
        cfg.wpt(), x.shape());
    const ad::Var recon[] = {out};
    const ad::Var lat[] = {y};
    return ad::rd_loss(g, recon, targets, lat, 0.03);
  };
  ad::Graph g;
  const ad::BoundParams bp(g, m.weights, [](const std::string&) { return true; });
  g.backward(build(g, bp));
  auto loss_with = [&](const ParamStore& p) {
    ad::Graph h;
    const ad::BoundParams b(h, p, [](const std::string&) { return false; });
    return h.value(build(h, b))[0];
  };
  std::vector<std::pair<std::string, double>> out;
  ParamStore p = m.weights;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Tensor analytic = g.grad(bp.at(i));
    double max_err = 0.0, max_num = 0.0;
    for (std::size_t j = 0; j < p.value(i).size(); ++j) {
      const double x0 = p.value(i)[j];
      p.value(i)[j] = x0 + 1e-5;
      const double up = loss_with(p);
      p.value(i)[j] = x0 - 1e-5;
      const double down = loss_with(p);
      p.value(i)[j] = x0;
      const double num = (up - down) / 2e-5;
      max_err = std::max(max_err, std::abs(num - analytic[j]));
      max_num = std::max(max_num, std::abs(num));
    }
    out.emplace_back(p.name(i), max_err / std::max(max_num, 1e-6));
  }
  return out;
}

}  // namespace lva::testing

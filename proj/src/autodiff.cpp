// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/autodiff.hpp"

#include <cmath>
#include <numbers>

#include "kernels.hpp"
#include "liveaction/pointwise.hpp"

namespace lva::ad {

namespace {

bool any_requires(const Graph& g, std::span<const Var> inputs) {
  for (Var v : inputs)
    if (g.requires_grad(v)) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Graph

const Graph::Node& Graph::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
    throw Error(ErrorCode::InvalidArgument, "variable does not belong to this graph");
  return nodes_[static_cast<std::size_t>(v.id)];
}

Graph::Node& Graph::node(Var v) {
  return const_cast<Node&>(static_cast<const Graph*>(this)->node(v));
}

Var Graph::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, {}});
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Graph::leaf(Tensor value, bool requires_grad) {
  nodes_.push_back(Node{std::move(value), {}, requires_grad, false, {}});
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Var Graph::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
}

Var Graph::record(Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  const bool req = any_requires(*this, inputs);
  nodes_.push_back(Node{std::move(value), {}, req, false, req ? std::move(fn) : BackwardFn{}});
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Tensor Graph::grad(Var v) const {
  const Node& n = node(v);
  return n.has_grad ? n.grad : Tensor(n.value.shape());
}

Tensor& Graph::grad_buffer(Var v) {
  Node& n = node(v);
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape());
    n.has_grad = true;
  }
  return n.grad;
}

void Graph::backward(Var loss) {
  if (node(loss).value.size() != 1)
    throw Error(ErrorCode::InvalidArgument, "backward needs a single-element output");
  for (auto& n : nodes_) n.has_grad = false;
  grad_buffer(loss)[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.has_grad || !n.requires_grad || !n.backward) continue;
    // The closure may append to other nodes' gradients but never to nodes_
    // itself, so this reference stays valid.
    const Tensor gout = n.grad;
    n.backward(*this, gout);
  }
}

// ---------------------------------------------------------------------------
// Layers

Var grouped_conv(Graph& g, Var x, Var weight, Var bias, int groups) {
  Tensor y = lva::grouped_conv(g.value(x), g.value(weight), g.value(bias), groups);
  return g.record(std::move(y), {x, weight, bias}, [=](Graph& gr, const Tensor& gy) {
    const Tensor& xv = gr.value(x);
    const Tensor& wv = gr.value(weight);
    const std::size_t cin = xv.channels(), cout = wv.extent(0), gs = static_cast<std::size_t>(groups);
    const std::size_t cin_g = cin / gs, cout_g = cout / gs;
    const std::size_t k = detail::kernel_side(wv.extent(2), xv.rank() - 1);
    const auto grid = detail::make_grid(xv.shape(), k);
    const auto [e1, e2, e3] = grid.e;
    const auto [k1, k2, k3] = grid.taps;
    const bool need_x = gr.requires_grad(x), need_w = gr.requires_grad(weight);
    Tensor* gx = need_x ? &gr.grad_buffer(x) : nullptr;
    Tensor* gw = need_w ? &gr.grad_buffer(weight) : nullptr;
    if (gr.requires_grad(bias)) {
      Tensor& gb = gr.grad_buffer(bias);
      for (std::size_t o = 0; o < cout; ++o) {
        double s = 0.0;
        for (std::size_t p = 0; p < grid.positions; ++p) s += gy.channel(o)[p];
        gb[o] += s;
      }
    }
    if (!need_x && !need_w) return;
    for (std::size_t o = 0; o < cout; ++o) {
      const std::size_t grp = o / cout_g;
      const double* go = gy.channel(o);
      for (std::size_t j = 0; j < cin_g; ++j) {
        const std::size_t ci = grp * cin_g + j;
        const double* in = xv.channel(ci);
        double* gin = need_x ? gx->channel(ci) : nullptr;
        const std::size_t wbase = (o * cin_g + j) * grid.tap_count;
        for (std::size_t u1 = 0; u1 < k1; ++u1)
          for (std::size_t u2 = 0; u2 < k2; ++u2)
            for (std::size_t u3 = 0; u3 < k3; ++u3) {
              const std::size_t t = (u1 * k2 + u2) * k3 + u3;
              const double w = wv[wbase + t];
              const auto& r3 = grid.reflect[2][u3];
              double acc = 0.0;
              for (std::size_t p1 = 0; p1 < e1; ++p1) {
                const std::size_t s1 = grid.reflect[0][u1][p1];
                for (std::size_t p2 = 0; p2 < e2; ++p2) {
                  const std::size_t s2 = grid.reflect[1][u2][p2];
                  const std::size_t src = (s1 * e2 + s2) * e3;
                  const double* gop = go + (p1 * e2 + p2) * e3;
                  for (std::size_t p3 = 0; p3 < e3; ++p3) {
                    acc += gop[p3] * in[src + r3[p3]];
                    if (gin) gin[src + r3[p3]] += w * gop[p3];
                  }
                }
              }
              if (gw) (*gw)[wbase + t] += acc;
            }
      }
    }
  });
}

Var pointwise(Graph& g, Var x, Var weight, Var bias) {
  Tensor y = lva::pointwise(g.value(x), g.value(weight), g.value(bias));
  return g.record(std::move(y), {x, weight, bias}, [=](Graph& gr, const Tensor& gy) {
    const Tensor& xv = gr.value(x);
    const Tensor& wv = gr.value(weight);
    const std::size_t cin = xv.channels(), cout = wv.extent(0), n = xv.plane();
    if (gr.requires_grad(bias)) {
      Tensor& gb = gr.grad_buffer(bias);
      for (std::size_t o = 0; o < cout; ++o) {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p) s += gy.channel(o)[p];
        gb[o] += s;
      }
    }
    if (gr.requires_grad(weight)) {
      Tensor& gw = gr.grad_buffer(weight);
      for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t i = 0; i < cin; ++i) {
          double s = 0.0;
          for (std::size_t p = 0; p < n; ++p) s += gy.channel(o)[p] * xv.channel(i)[p];
          gw[o * cin + i] += s;
        }
    }
    if (gr.requires_grad(x)) {
      Tensor& gx = gr.grad_buffer(x);
      for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t i = 0; i < cin; ++i) {
          const double w = wv[o * cin + i];
          double* gi = gx.channel(i);
          const double* go = gy.channel(o);
          for (std::size_t p = 0; p < n; ++p) gi[p] += w * go[p];
        }
    }
  });
}

Var channel_shuffle(Graph& g, Var x, int groups) {
  Tensor y = lva::channel_shuffle(g.value(x), groups);
  return g.record(std::move(y), {x}, [=](Graph& gr, const Tensor& gy) {
    const auto src = shuffle_source(gy.channels(), groups);
    Tensor& gx = gr.grad_buffer(x);
    const std::size_t n = gy.plane();
    for (std::size_t c = 0; c < src.size(); ++c) {
      double* dst = gx.channel(src[c]);
      const double* s = gy.channel(c);
      for (std::size_t p = 0; p < n; ++p) dst[p] += s[p];
    }
  });
}

namespace {

template <typename F, typename D>
Var elementwise(Graph& g, Var x, F f, D df) {
  const Tensor& xv = g.value(x);
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(xv[i]);
  return g.record(std::move(y), {x}, [=](Graph& gr, const Tensor& gy) {
    const Tensor& xin = gr.value(x);
    Tensor& gx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * df(xin[i]);
  });
}

}  // namespace

Var gelu(Graph& g, Var x) {
  return elementwise(g, x, [](double v) { return detail::gelu_scalar(v); },
                     [](double v) { return detail::gelu_grad_scalar(v); });
}

Var relu(Graph& g, Var x) {
  return elementwise(g, x, [](double v) { return v > 0.0 ? v : 0.0; },
                     [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Graph& g, Var x) {
  return elementwise(g, x, [](double v) { return detail::sigmoid_scalar(v); },
                     [](double v) {
                       const double s = detail::sigmoid_scalar(v);
                       return s * (1.0 - s);
                     });
}

Var add(Graph& g, Var a, Var b) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  if (av.shape() != bv.shape()) throw Error(ErrorCode::Shape, "add: shape mismatch");
  Tensor y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  return g.record(std::move(y), {a, b}, [=](Graph& gr, const Tensor& gy) {
    for (Var v : {a, b}) {
      if (!gr.requires_grad(v)) continue;
      Tensor& gv = gr.grad_buffer(v);
      for (std::size_t i = 0; i < gy.size(); ++i) gv[i] += gy[i];
    }
  });
}

Var mean_pool(Graph& g, Var x) {
  const Tensor& xv = g.value(x);
  const std::size_t c = xv.channels(), n = xv.plane();
  Tensor y({c, 1});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p) s += xv.channel(ch)[p];
    y[ch] = s / static_cast<double>(n);
  }
  return g.record(std::move(y), {x}, [=](Graph& gr, const Tensor& gy) {
    Tensor& gx = gr.grad_buffer(x);
    const std::size_t np = gx.plane();
    for (std::size_t ch = 0; ch < gx.channels(); ++ch) {
      const double v = gy[ch] / static_cast<double>(np);
      for (std::size_t p = 0; p < np; ++p) gx.channel(ch)[p] += v;
    }
  });
}

Var scale_channels(Graph& g, Var x, Var gate) {
  const Tensor& xv = g.value(x);
  const Tensor& gv = g.value(gate);
  const std::size_t c = xv.channels(), n = xv.plane();
  if (gv.size() != c) throw Error(ErrorCode::Shape, "scale_channels: gate size mismatch");
  Tensor y(xv.shape());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t p = 0; p < n; ++p) y.channel(ch)[p] = gv[ch] * xv.channel(ch)[p];
  return g.record(std::move(y), {x, gate}, [=](Graph& gr, const Tensor& gy) {
    const Tensor& xin = gr.value(x);
    const Tensor& gin = gr.value(gate);
    const std::size_t np = xin.plane();
    if (gr.requires_grad(x)) {
      Tensor& gx = gr.grad_buffer(x);
      for (std::size_t ch = 0; ch < xin.channels(); ++ch)
        for (std::size_t p = 0; p < np; ++p) gx.channel(ch)[p] += gin[ch] * gy.channel(ch)[p];
    }
    if (gr.requires_grad(gate)) {
      Tensor& gg = gr.grad_buffer(gate);
      for (std::size_t ch = 0; ch < xin.channels(); ++ch) {
        double s = 0.0;
        for (std::size_t p = 0; p < np; ++p) s += xin.channel(ch)[p] * gy.channel(ch)[p];
        gg[ch] += s;
      }
    }
  });
}

Var group_norm(Graph& g, Var x, Var gamma, Var beta, int groups, double eps) {
  Tensor y = lva::group_norm(g.value(x), g.value(gamma), g.value(beta), groups, eps);
  return g.record(std::move(y), {x, gamma, beta}, [=](Graph& gr, const Tensor& gy) {
    const Tensor& xv = gr.value(x);
    const Tensor& gm = gr.value(gamma);
    const std::size_t c = xv.channels(), n = xv.plane(), cg = c / static_cast<std::size_t>(groups);
    const double count = static_cast<double>(cg * n);
    Tensor* gx = gr.requires_grad(x) ? &gr.grad_buffer(x) : nullptr;
    Tensor* ggm = gr.requires_grad(gamma) ? &gr.grad_buffer(gamma) : nullptr;
    Tensor* gbt = gr.requires_grad(beta) ? &gr.grad_buffer(beta) : nullptr;
    std::vector<double> xhat(cg * n);
    for (std::size_t grp = 0; grp < static_cast<std::size_t>(groups); ++grp) {
      double mean = 0.0;
      for (std::size_t ch = grp * cg; ch < (grp + 1) * cg; ++ch)
        for (std::size_t p = 0; p < n; ++p) mean += xv.channel(ch)[p];
      mean /= count;
      double var = 0.0;
      for (std::size_t ch = grp * cg; ch < (grp + 1) * cg; ++ch)
        for (std::size_t p = 0; p < n; ++p) {
          const double d = xv.channel(ch)[p] - mean;
          var += d * d;
        }
      var /= count;
      const double inv = 1.0 / std::sqrt(var + eps);
      double sum_gxhat = 0.0, sum_gxhat_xhat = 0.0;
      for (std::size_t lc = 0; lc < cg; ++lc) {
        const std::size_t ch = grp * cg + lc;
        double sg = 0.0, sb = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
          const double xh = (xv.channel(ch)[p] - mean) * inv;
          xhat[lc * n + p] = xh;
          const double go = gy.channel(ch)[p];
          sg += go * xh;
          sb += go;
          const double gxh = go * gm[ch];
          sum_gxhat += gxh;
          sum_gxhat_xhat += gxh * xh;
        }
        if (ggm) (*ggm)[ch] += sg;
        if (gbt) (*gbt)[ch] += sb;
      }
      if (!gx) continue;
      const double m1 = sum_gxhat / count, m2 = sum_gxhat_xhat / count;
      for (std::size_t lc = 0; lc < cg; ++lc) {
        const std::size_t ch = grp * cg + lc;
        for (std::size_t p = 0; p < n; ++p) {
          const double gxh = gy.channel(ch)[p] * gm[ch];
          gx->channel(ch)[p] += inv * (gxh - m1 - xhat[lc * n + p] * m2);
        }
      }
    }
  });
}

Var se_attention(Graph& g, Var x, Var w1, Var b1, Var w2, Var b2) {
  const Var pooled = mean_pool(g, x);
  const Var hidden = relu(g, pointwise(g, pooled, w1, b1));
  const Var gate = sigmoid(g, pointwise(g, hidden, w2, b2));
  return scale_channels(g, x, gate);
}

Var linear_attention(Graph& g, Var q, Var k, Var v, int heads, double eps) {
  Tensor y = lva::linear_attention(g.value(q), g.value(k), g.value(v), heads, eps);
  return g.record(std::move(y), {q, k, v}, [=](Graph& gr, const Tensor& gy) {
    const Tensor& qv = gr.value(q);
    const Tensor& kv_in = gr.value(k);
    const Tensor& vv = gr.value(v);
    const std::size_t h = qv.channels(), n = qv.plane(), dh = h / static_cast<std::size_t>(heads);
    Tensor* gq = gr.requires_grad(q) ? &gr.grad_buffer(q) : nullptr;
    Tensor* gk = gr.requires_grad(k) ? &gr.grad_buffer(k) : nullptr;
    Tensor* gv = gr.requires_grad(v) ? &gr.grad_buffer(v) : nullptr;
    auto relu_at = [](const Tensor& t, std::size_t c, std::size_t i) {
      const double val = t.channel(c)[i];
      return val > 0.0 ? val : 0.0;
    };
    for (std::size_t head = 0; head < static_cast<std::size_t>(heads); ++head) {
      const std::size_t c0 = head * dh;
      std::vector<double> kv(dh * dh, 0.0), ksum(dh, 0.0);
      for (std::size_t m = 0; m < dh; ++m)
        for (std::size_t j = 0; j < n; ++j) {
          const double kj = relu_at(kv_in, c0 + m, j);
          ksum[m] += kj;
          for (std::size_t c = 0; c < dh; ++c) kv[m * dh + c] += kj * vv.channel(c0 + c)[j];
        }
      std::vector<double> g_kv(dh * dh, 0.0), g_ksum(dh, 0.0), gnum(dh);
      for (std::size_t i = 0; i < n; ++i) {
        double den = eps;
        for (std::size_t m = 0; m < dh; ++m) den += relu_at(qv, c0 + m, i) * ksum[m];
        double gden = 0.0;
        for (std::size_t c = 0; c < dh; ++c) {
          gnum[c] = gy.channel(c0 + c)[i] / den;
          // out = num / den, so d/d(den) = -g . out / den
          double num = 0.0;
          for (std::size_t m = 0; m < dh; ++m) num += relu_at(qv, c0 + m, i) * kv[m * dh + c];
          gden -= gy.channel(c0 + c)[i] * num / (den * den);
        }
        for (std::size_t m = 0; m < dh; ++m) {
          const double a = relu_at(qv, c0 + m, i);
          if (a > 0.0) {
            for (std::size_t c = 0; c < dh; ++c) g_kv[m * dh + c] += a * gnum[c];
            g_ksum[m] += gden * a;
          }
          if (gq && qv.channel(c0 + m)[i] > 0.0) {
            double ga = gden * ksum[m];
            for (std::size_t c = 0; c < dh; ++c) ga += kv[m * dh + c] * gnum[c];
            gq->channel(c0 + m)[i] += ga;
          }
        }
      }
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t m = 0; m < dh; ++m) {
          if (gk && kv_in.channel(c0 + m)[j] > 0.0) {
            double gb = g_ksum[m];
            for (std::size_t c = 0; c < dh; ++c) gb += g_kv[m * dh + c] * vv.channel(c0 + c)[j];
            gk->channel(c0 + m)[j] += gb;
          }
        }
        if (gv) {
          for (std::size_t c = 0; c < dh; ++c) {
            double s = 0.0;
            for (std::size_t m = 0; m < dh; ++m) s += g_kv[m * dh + c] * relu_at(kv_in, c0 + m, j);
            gv->channel(c0 + c)[j] += s;
          }
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Codec maps

Var compand(Graph& g, Var x, const CompanderParams& p) {
  Tensor y = lva::compand(g.value(x), p);
  return g.record(std::move(y), {x}, [=](Graph& gr, const Tensor& gy) {
    const Tensor& xv = gr.value(x);
    Tensor& gx = gr.grad_buffer(x);
    for (std::size_t i = 0; i < gy.size(); ++i)
      gx[i] += gy[i] * p.gamma * std::pow(std::abs(xv[i]) + p.epsilon, p.gamma - 1.0);
  });
}

Var compand_inverse(Graph& g, Var y, const CompanderParams& p) {
  Tensor x = lva::compand_inverse(g.value(y), p);
  return g.record(std::move(x), {y}, [=](Graph& gr, const Tensor& gx) {
    const Tensor& yv = gr.value(y);
    Tensor& gy = gr.grad_buffer(y);
    const double eg = std::pow(p.epsilon, p.gamma);
    for (std::size_t i = 0; i < gx.size(); ++i)
      gy[i] += gx[i] / p.gamma * std::pow(std::abs(yv[i]) + eg, 1.0 / p.gamma - 1.0);
  });
}

namespace {
std::vector<double> exp_all(const Tensor& t) {
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = std::exp(t[i]);
  return out;
}
}  // namespace

Var latent_cdf(Graph& g, Var z, Var log_sigma) {
  const auto sigma = exp_all(g.value(log_sigma));
  Tensor y = lva::latent_cdf(g.value(z), sigma);
  return g.record(std::move(y), {z, log_sigma}, [=](Graph& gr, const Tensor& gy) {
    const Tensor& zv = gr.value(z);
    const std::size_t n = zv.plane();
    Tensor* gz = gr.requires_grad(z) ? &gr.grad_buffer(z) : nullptr;
    Tensor* gs = gr.requires_grad(log_sigma) ? &gr.grad_buffer(log_sigma) : nullptr;
    for (std::size_t c = 0; c < zv.channels(); ++c) {
      const double s = sigma[c];
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        const double zz = zv.channel(c)[p], e = std::exp(-std::abs(zz) / s), go = gy.channel(c)[p];
        if (gz) gz->channel(c)[p] += go * kLatentBound / s * e;
        acc -= go * kLatentBound * zz * e / s;
      }
      if (gs) (*gs)[c] += acc;
    }
  });
}

Var latent_cdf_inverse(Graph& g, Var y, Var log_sigma) {
  const auto sigma = exp_all(g.value(log_sigma));
  Tensor z = lva::latent_cdf_inverse(g.value(y), sigma);
  return g.record(z, {y, log_sigma}, [=](Graph& gr, const Tensor& gz) {
    const Tensor& yv = gr.value(y);
    const std::size_t n = yv.plane();
    Tensor* gy = gr.requires_grad(y) ? &gr.grad_buffer(y) : nullptr;
    Tensor* gs = gr.requires_grad(log_sigma) ? &gr.grad_buffer(log_sigma) : nullptr;
    for (std::size_t c = 0; c < yv.channels(); ++c) {
      double acc = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        const double a = std::abs(yv.channel(c)[p]), go = gz.channel(c)[p];
        if (gy && a < kInverseClamp) gy->channel(c)[p] += go * sigma[c] / (kLatentBound - a);
        acc += go * z.channel(c)[p];
      }
      if (gs) (*gs)[c] += acc;
    }
  });
}

Var add_noise(Graph& g, Var y, const Tensor& noise) {
  const Tensor& yv = g.value(y);
  if (noise.shape() != yv.shape()) throw Error(ErrorCode::Shape, "add_noise: shape mismatch");
  Tensor out(yv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = yv[i] + noise[i];
  return g.record(std::move(out), {y}, [=](Graph& gr, const Tensor& gout) {
    Tensor& gy = gr.grad_buffer(y);
    for (std::size_t i = 0; i < gout.size(); ++i) gy[i] += gout[i];
  });
}

Var wpt_forward(Graph& g, Var x, const WptConfig& cfg) {
  const Shape original = g.value(x).shape();
  Tensor y = lva::wpt_forward(g.value(x), cfg);
  return g.record(std::move(y), {x}, [=](Graph& gr, const Tensor& gy) {
    const Tensor gx = wpt_forward_adjoint(gy, cfg, original);
    Tensor& acc = gr.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) acc[i] += gx[i];
  });
}

Var wpt_inverse(Graph& g, Var y, const WptConfig& cfg, const Shape& original_shape) {
  Tensor x = lva::wpt_inverse(g.value(y), cfg, original_shape);
  return g.record(std::move(x), {y}, [=](Graph& gr, const Tensor& gx) {
    const Tensor gy = wpt_inverse_adjoint(gx, cfg);
    Tensor& acc = gr.grad_buffer(y);
    for (std::size_t i = 0; i < gy.size(); ++i) acc[i] += gy[i];
  });
}

Var rd_loss(Graph& g, std::span<const Var> recon, std::span<const Tensor> targets, std::span<const Var> latents,
            double lambda) {
  if (recon.size() != targets.size() || recon.empty())
    throw Error(ErrorCode::Shape, "rd_loss: reconstructions and targets must pair up");
  if (latents.empty()) throw Error(ErrorCode::Shape, "rd_loss: no latents");
  double sse = 0.0;
  for (std::size_t s = 0; s < recon.size(); ++s) {
    const Tensor& xh = g.value(recon[s]);
    if (xh.shape() != targets[s].shape()) throw Error(ErrorCode::Shape, "rd_loss: reconstruction shape mismatch");
    for (std::size_t i = 0; i < xh.size(); ++i) {
      const double d = xh[i] - targets[s][i];
      sse += d * d;
    }
  }
  double mean = 0.0, count = 0.0;
  for (Var z : latents)
    for (double v : g.value(z).data()) {
      mean += v;
      count += 1.0;
    }
  mean /= count;
  double var = 0.0;
  for (Var z : latents)
    for (double v : g.value(z).data()) var += (v - mean) * (v - mean);
  var /= count;

  constexpr double kSseFloor = 1e-12, kVarFloor = 1e-9;
  const double loss = std::log10(std::max(sse, kSseFloor)) + lambda * std::log2(std::max(var, kVarFloor));
  const double dsse = sse > kSseFloor ? 1.0 / (sse * std::numbers::ln10) : 0.0;
  const double dvar = var > kVarFloor ? lambda / (var * std::numbers::ln2) : 0.0;

  std::vector<Var> inputs(recon.begin(), recon.end());
  inputs.insert(inputs.end(), latents.begin(), latents.end());
  std::vector<Tensor> tgt(targets.begin(), targets.end());
  const std::size_t n_recon = recon.size();
  return g.record(Tensor({1}, {loss}), inputs, [=](Graph& gr, const Tensor& gl) {
    const double up = gl[0];
    for (std::size_t s = 0; s < n_recon; ++s) {
      if (!gr.requires_grad(inputs[s])) continue;
      const Tensor& xh = gr.value(inputs[s]);
      Tensor& gx = gr.grad_buffer(inputs[s]);
      for (std::size_t i = 0; i < xh.size(); ++i) gx[i] += up * dsse * 2.0 * (xh[i] - tgt[s][i]);
    }
    for (std::size_t s = n_recon; s < inputs.size(); ++s) {
      if (!gr.requires_grad(inputs[s])) continue;
      const Tensor& zv = gr.value(inputs[s]);
      Tensor& gz = gr.grad_buffer(inputs[s]);
      for (std::size_t i = 0; i < zv.size(); ++i) gz[i] += up * dvar * 2.0 * (zv[i] - mean) / count;
    }
  });
}

// ---------------------------------------------------------------------------

BoundParams::BoundParams(Graph& g, const ParamStore& store,
                         const std::function<bool(const std::string&)>& trainable)
    : store_(&store) {
  vars_.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) vars_.push_back(g.leaf(store.value(i), trainable(store.name(i))));
}

Var analysis(Graph& g, Var bands, const BoundParams& p, const ArchConfig& cfg) {
  Var x = bands;
  for (int b = 0; b < cfg.enc_depth; ++b) {
    Var h = group_norm(g, x, p[enc_param(b, "norm.weight")], p[enc_param(b, "norm.bias")], cfg.gn_groups);
    h = grouped_conv(g, h, p[enc_param(b, "conv1.weight")], p[enc_param(b, "conv1.bias")], cfg.groups1);
    h = channel_shuffle(g, h, cfg.groups1);
    h = gelu(g, h);
    h = grouped_conv(g, h, p[enc_param(b, "conv2.weight")], p[enc_param(b, "conv2.bias")], cfg.groups2);
    h = se_attention(g, h, p[enc_param(b, "se.fc1.weight")], p[enc_param(b, "se.fc1.bias")],
                     p[enc_param(b, "se.fc2.weight")], p[enc_param(b, "se.fc2.bias")]);
    x = add(g, x, h);
  }
  return pointwise(g, x, p["enc.proj.weight"], p["enc.proj.bias"]);
}

Var synthesis(Graph& g, Var latents, const BoundParams& p, const ArchConfig& cfg) {
  Var x = pointwise(g, latents, p["dec.expand.weight"], p["dec.expand.bias"]);
  for (int b = 0; b < cfg.dec_depth; ++b) {
    Var h = group_norm(g, x, p[dec_param(b, "norm1.weight")], p[dec_param(b, "norm1.bias")], cfg.gn_groups);
    const Var q = pointwise(g, h, p[dec_param(b, "attn.q.weight")], p[dec_param(b, "attn.q.bias")]);
    const Var k = pointwise(g, h, p[dec_param(b, "attn.k.weight")], p[dec_param(b, "attn.k.bias")]);
    const Var v = pointwise(g, h, p[dec_param(b, "attn.v.weight")], p[dec_param(b, "attn.v.bias")]);
    const Var a = linear_attention(g, q, k, v, cfg.heads);
    x = add(g, x, pointwise(g, a, p[dec_param(b, "attn.out.weight")], p[dec_param(b, "attn.out.bias")]));
    h = group_norm(g, x, p[dec_param(b, "norm2.weight")], p[dec_param(b, "norm2.bias")], cfg.gn_groups);
    h = gelu(g, pointwise(g, h, p[dec_param(b, "ffn.fc1.weight")], p[dec_param(b, "ffn.fc1.bias")]));
    x = add(g, x, pointwise(g, h, p[dec_param(b, "ffn.fc2.weight")], p[dec_param(b, "ffn.fc2.bias")]));
  }
  return pointwise(g, x, p["dec.proj.weight"], p["dec.proj.bias"]);
}

}  // namespace lva::ad

// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include "liveaction/neural.hpp"

#include <cmath>
#include <json.hpp>

#include "kernels.hpp"
#include "liveaction/bytes.hpp"
#include "liveaction/parallel.hpp"
#include "liveaction/random.hpp"

namespace lva {

using detail::Grid;

namespace {

constexpr std::uint8_t kModelMagic[4] = {'L', 'V', 'A', 'M'};
constexpr std::uint8_t kModelVersion = 1;

void expect_shape(const char* what, const Shape& got, const Shape& want) {
  if (got != want)
    throw Error(ErrorCode::Shape, std::string(what) + ": expected shape " + shape_string(want) + ", got " +
                                      shape_string(got));
}

void expect_groups(std::size_t channels, int groups, const char* what) {
  if (groups <= 0 || channels % static_cast<std::size_t>(groups) != 0)
    throw Error(ErrorCode::Config, std::string(what) + ": " + std::to_string(channels) +
                                       " channels are not divisible by " + std::to_string(groups) + " groups");
}

Shape with_channels(const Shape& s, std::size_t c) {
  Shape out = s;
  out[0] = c;
  return out;
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

void add_uniform(ParamStore& s, Rng& rng, const std::string& name, Shape shape, std::size_t fan_in) {
  Tensor t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : t.data()) v = rng.uniform(-bound, bound);
  s.add(name, std::move(t));
}

void add_const(ParamStore& s, const std::string& name, Shape shape, double value) {
  s.add(name, Tensor::full(std::move(shape), value));
}

}  // namespace

std::string enc_param(int block, const char* leaf) { return "enc." + std::to_string(block) + "." + leaf; }
std::string dec_param(int block, const char* leaf) { return "dec." + std::to_string(block) + "." + leaf; }

bool is_encoder_param(const std::string& name) {
  return name.rfind("enc.", 0) == 0 || name.rfind("latent.", 0) == 0;
}

std::vector<double> ModelParams::sigma() const {
  const Tensor& ls = weights.at(kLogSigma);
  std::vector<double> s(ls.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(ls[i]);
  return s;
}

ModelParams init_model(const CodecConfig& config, std::uint64_t seed) {
  ModelParams m{config.resolved(), {}};
  m.config.validate();
  const ArchConfig& a = m.config.arch;
  const std::size_t h = a.hidden(), cz = static_cast<std::size_t>(a.latent_channels);
  std::size_t taps = 1;
  for (int i = 0; i < a.dims; ++i) taps *= static_cast<std::size_t>(a.kernel);
  const std::size_t g1 = static_cast<std::size_t>(a.groups1), g2 = static_cast<std::size_t>(a.groups2);
  const std::size_t se = h / static_cast<std::size_t>(a.se_reduction);
  const std::size_t ffn = h * static_cast<std::size_t>(a.ffn_ratio);
  Rng rng(seed);
  ParamStore& s = m.weights;

  for (int b = 0; b < a.enc_depth; ++b) {
    add_const(s, enc_param(b, "norm.weight"), {h}, 1.0);
    add_const(s, enc_param(b, "norm.bias"), {h}, 0.0);
    add_uniform(s, rng, enc_param(b, "conv1.weight"), {h, h / g1, taps}, h / g1 * taps);
    add_const(s, enc_param(b, "conv1.bias"), {h}, 0.0);
    add_uniform(s, rng, enc_param(b, "conv2.weight"), {h, h / g2, taps}, h / g2 * taps);
    add_const(s, enc_param(b, "conv2.bias"), {h}, 0.0);
    add_uniform(s, rng, enc_param(b, "se.fc1.weight"), {se, h}, h);
    add_const(s, enc_param(b, "se.fc1.bias"), {se}, 0.0);
    add_const(s, enc_param(b, "se.fc2.weight"), {h, se}, 0.0);
    add_const(s, enc_param(b, "se.fc2.bias"), {h}, 0.0);
  }
  add_uniform(s, rng, "enc.proj.weight", {cz, h}, h);
  add_const(s, "enc.proj.bias", {cz}, 0.0);
  add_const(s, kLogSigma, {cz}, 0.0);

  add_uniform(s, rng, "dec.expand.weight", {h, cz}, cz);
  add_const(s, "dec.expand.bias", {h}, 0.0);
  for (int b = 0; b < a.dec_depth; ++b) {
    add_const(s, dec_param(b, "norm1.weight"), {h}, 1.0);
    add_const(s, dec_param(b, "norm1.bias"), {h}, 0.0);
    for (const char* p : {"attn.q", "attn.k", "attn.v", "attn.out"}) {
      add_uniform(s, rng, dec_param(b, (std::string(p) + ".weight").c_str()), {h, h}, h);
      add_const(s, dec_param(b, (std::string(p) + ".bias").c_str()), {h}, 0.0);
    }
    add_const(s, dec_param(b, "norm2.weight"), {h}, 1.0);
    add_const(s, dec_param(b, "norm2.bias"), {h}, 0.0);
    add_uniform(s, rng, dec_param(b, "ffn.fc1.weight"), {ffn, h}, h);
    add_const(s, dec_param(b, "ffn.fc1.bias"), {ffn}, 0.0);
    add_uniform(s, rng, dec_param(b, "ffn.fc2.weight"), {h, ffn}, ffn);
    add_const(s, dec_param(b, "ffn.fc2.bias"), {h}, 0.0);
  }
  add_uniform(s, rng, "dec.proj.weight", {h, h}, h);
  add_const(s, "dec.proj.bias", {h}, 0.0);
  return m;
}

// ---------------------------------------------------------------------------

template <typename T>
BasicTensor<T> grouped_conv(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias,
                            int groups) {
  check_signal_shape(x.shape());
  if (weight.rank() != 3) throw Error(ErrorCode::Shape, "grouped_conv: weight must be (C_out, C_in/g, taps)");
  const std::size_t cin = x.channels(), cout = weight.extent(0);
  expect_groups(cin, groups, "grouped_conv input");
  expect_groups(cout, groups, "grouped_conv output");
  const std::size_t g = static_cast<std::size_t>(groups), cin_g = cin / g, cout_g = cout / g;
  const std::size_t dims = x.rank() - 1;
  const std::size_t k = detail::kernel_side(weight.extent(2), dims);
  if (k == 0) throw Error(ErrorCode::Shape, "grouped_conv: tap count is not k^D for odd k");
  expect_shape("grouped_conv weight", weight.shape(), {cout, cin_g, weight.extent(2)});
  expect_shape("grouped_conv bias", bias.shape(), {cout});

  const Grid grid = detail::make_grid(x.shape(), k);
  BasicTensor<T> y(with_channels(x.shape(), cout));
  const auto [e1, e2, e3] = grid.e;
  const auto [k1, k2, k3] = grid.taps;
  parallel_for(cout, [&](std::size_t o) {
    const std::size_t grp = o / cout_g;
    T* out = y.channel(o);
    std::fill(out, out + grid.positions, bias[o]);
    for (std::size_t j = 0; j < cin_g; ++j) {
      const T* in = x.channel(grp * cin_g + j);
      const T* w = weight.data().data() + (o * cin_g + j) * grid.tap_count;
      for (std::size_t u1 = 0; u1 < k1; ++u1)
        for (std::size_t u2 = 0; u2 < k2; ++u2)
          for (std::size_t u3 = 0; u3 < k3; ++u3) {
            const T wv = w[(u1 * k2 + u2) * k3 + u3];
            const auto& r3 = grid.reflect[2][u3];
            for (std::size_t p1 = 0; p1 < e1; ++p1) {
              const std::size_t s1 = grid.reflect[0][u1][p1];
              for (std::size_t p2 = 0; p2 < e2; ++p2) {
                const std::size_t s2 = grid.reflect[1][u2][p2];
                const T* src = in + (s1 * e2 + s2) * e3;
                T* dst = out + (p1 * e2 + p2) * e3;
                for (std::size_t p3 = 0; p3 < e3; ++p3) dst[p3] += wv * src[r3[p3]];
              }
            }
          }
    }
  });
  return y;
}

template <typename T>
BasicTensor<T> pointwise(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias) {
  if (weight.rank() != 2 || weight.extent(1) != x.channels())
    throw Error(ErrorCode::Shape, "pointwise: weight " + shape_string(weight.shape()) +
                                      " does not accept input " + shape_string(x.shape()));
  const std::size_t cin = x.channels(), cout = weight.extent(0), n = x.plane();
  expect_shape("pointwise bias", bias.shape(), {cout});
  BasicTensor<T> y(with_channels(x.shape(), cout));
  parallel_for(cout, [&](std::size_t o) {
    T* out = y.channel(o);
    std::fill(out, out + n, bias[o]);
    const T* w = weight.data().data() + o * cin;
    for (std::size_t i = 0; i < cin; ++i) {
      const T wv = w[i];
      const T* in = x.channel(i);
      for (std::size_t p = 0; p < n; ++p) out[p] += wv * in[p];
    }
  });
  return y;
}

std::vector<std::size_t> shuffle_source(std::size_t channels, int groups) {
  expect_groups(channels, groups, "channel_shuffle");
  const std::size_t g = static_cast<std::size_t>(groups), per = channels / g;
  std::vector<std::size_t> src(channels);
  for (std::size_t c = 0; c < channels; ++c) src[c] = (c % g) * per + c / g;
  return src;
}

template <typename T>
BasicTensor<T> channel_shuffle(const BasicTensor<T>& x, int groups) {
  const auto src = shuffle_source(x.channels(), groups);
  BasicTensor<T> y(x.shape());
  const std::size_t n = x.plane();
  for (std::size_t c = 0; c < src.size(); ++c) std::copy_n(x.channel(src[c]), n, y.channel(c));
  return y;
}

template <typename T>
BasicTensor<T> gelu(const BasicTensor<T>& x) {
  BasicTensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = detail::gelu_scalar(x[i]);
  return y;
}

template <typename T>
BasicTensor<T> group_norm(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta,
                          int groups, double eps) {
  const std::size_t c = x.channels(), n = x.plane();
  expect_groups(c, groups, "group_norm");
  expect_shape("group_norm weight", gamma.shape(), {c});
  expect_shape("group_norm bias", beta.shape(), {c});
  const std::size_t cg = c / static_cast<std::size_t>(groups);
  BasicTensor<T> y(x.shape());
  parallel_for(static_cast<std::size_t>(groups), [&](std::size_t g) {
    double mean = 0.0;
    for (std::size_t ch = g * cg; ch < (g + 1) * cg; ++ch)
      for (std::size_t p = 0; p < n; ++p) mean += static_cast<double>(x.channel(ch)[p]);
    mean /= static_cast<double>(cg * n);
    double var = 0.0;
    for (std::size_t ch = g * cg; ch < (g + 1) * cg; ++ch)
      for (std::size_t p = 0; p < n; ++p) {
        const double d = static_cast<double>(x.channel(ch)[p]) - mean;
        var += d * d;
      }
    var /= static_cast<double>(cg * n);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t ch = g * cg; ch < (g + 1) * cg; ++ch) {
      const double a = static_cast<double>(gamma[ch]) * inv, b = static_cast<double>(beta[ch]);
      for (std::size_t p = 0; p < n; ++p)
        y.channel(ch)[p] = static_cast<T>((static_cast<double>(x.channel(ch)[p]) - mean) * a + b);
    }
  });
  return y;
}

template <typename T>
BasicTensor<T> se_attention(const BasicTensor<T>& x, const BasicTensor<T>& w1, const BasicTensor<T>& b1,
                            const BasicTensor<T>& w2, const BasicTensor<T>& b2) {
  const std::size_t c = x.channels(), n = x.plane();
  if (w1.rank() != 2 || w1.extent(1) != c || c % w1.extent(0) != 0)
    throw Error(ErrorCode::Config, "se_attention: squeeze weight " + shape_string(w1.shape()) +
                                       " does not fit " + std::to_string(c) + " channels");
  const std::size_t r = w1.extent(0);
  expect_shape("se fc1 bias", b1.shape(), {r});
  expect_shape("se fc2 weight", w2.shape(), {c, r});
  expect_shape("se fc2 bias", b2.shape(), {c});
  std::vector<double> pooled(c), hidden(r);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p) s += static_cast<double>(x.channel(ch)[p]);
    pooled[ch] = s / static_cast<double>(n);
  }
  for (std::size_t j = 0; j < r; ++j) {
    double s = static_cast<double>(b1[j]);
    for (std::size_t ch = 0; ch < c; ++ch) s += static_cast<double>(w1[j * c + ch]) * pooled[ch];
    hidden[j] = s > 0.0 ? s : 0.0;
  }
  BasicTensor<T> y(x.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    double s = static_cast<double>(b2[ch]);
    for (std::size_t j = 0; j < r; ++j) s += static_cast<double>(w2[ch * r + j]) * hidden[j];
    const T gate = static_cast<T>(detail::sigmoid_scalar(s));
    for (std::size_t p = 0; p < n; ++p) y.channel(ch)[p] = gate * x.channel(ch)[p];
  }
  return y;
}

template <typename T>
BasicTensor<T> linear_attention(const BasicTensor<T>& q, const BasicTensor<T>& k, const BasicTensor<T>& v,
                                int heads, double eps) {
  if (q.shape() != k.shape() || q.shape() != v.shape())
    throw Error(ErrorCode::Shape, "linear_attention: q, k, v shapes differ");
  const std::size_t h = q.channels(), n = q.plane();
  expect_groups(h, heads, "linear_attention heads");
  const std::size_t dh = h / static_cast<std::size_t>(heads);
  BasicTensor<T> out(q.shape());
  parallel_for(static_cast<std::size_t>(heads), [&](std::size_t head) {
    const std::size_t c0 = head * dh;
    // kv[m][c] = sum_j relu(k_m,j) v_c,j ; ksum[m] = sum_j relu(k_m,j)
    std::vector<double> kv(dh * dh, 0.0), ksum(dh, 0.0);
    for (std::size_t m = 0; m < dh; ++m) {
      const T* km = k.channel(c0 + m);
      for (std::size_t j = 0; j < n; ++j) {
        const double kj = km[j] > T(0) ? static_cast<double>(km[j]) : 0.0;
        if (kj == 0.0) continue;
        ksum[m] += kj;
        for (std::size_t c = 0; c < dh; ++c) kv[m * dh + c] += kj * static_cast<double>(v.channel(c0 + c)[j]);
      }
    }
    std::vector<double> num(dh);
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(num.begin(), num.end(), 0.0);
      double den = eps;
      for (std::size_t m = 0; m < dh; ++m) {
        const T qv = q.channel(c0 + m)[i];
        if (!(qv > T(0))) continue;
        const double qm = static_cast<double>(qv);
        den += qm * ksum[m];
        for (std::size_t c = 0; c < dh; ++c) num[c] += qm * kv[m * dh + c];
      }
      for (std::size_t c = 0; c < dh; ++c) out.channel(c0 + c)[i] = static_cast<T>(num[c] / den);
    }
  });
  return out;
}

template <typename T>
BasicTensor<T> analysis_forward(const BasicTensor<T>& bands, const BasicParamStore<T>& p, const ArchConfig& cfg) {
  check_signal_shape(bands.shape());
  if (bands.channels() != cfg.hidden())
    throw Error(ErrorCode::Shape, "analysis input has " + std::to_string(bands.channels()) +
                                      " channels, config expects " + std::to_string(cfg.hidden()));
  BasicTensor<T> x = bands;
  for (int b = 0; b < cfg.enc_depth; ++b) {
    BasicTensor<T> h = group_norm(x, p.at(enc_param(b, "norm.weight")), p.at(enc_param(b, "norm.bias")),
                                  cfg.gn_groups);
    h = grouped_conv(h, p.at(enc_param(b, "conv1.weight")), p.at(enc_param(b, "conv1.bias")), cfg.groups1);
    h = channel_shuffle(h, cfg.groups1);
    h = gelu(h);
    h = grouped_conv(h, p.at(enc_param(b, "conv2.weight")), p.at(enc_param(b, "conv2.bias")), cfg.groups2);
    h = se_attention(h, p.at(enc_param(b, "se.fc1.weight")), p.at(enc_param(b, "se.fc1.bias")),
                     p.at(enc_param(b, "se.fc2.weight")), p.at(enc_param(b, "se.fc2.bias")));
    x = add(x, h);
  }
  return pointwise(x, p.at("enc.proj.weight"), p.at("enc.proj.bias"));
}

template <typename T>
BasicTensor<T> synthesis_forward(const BasicTensor<T>& latents, const BasicParamStore<T>& p,
                                 const ArchConfig& cfg) {
  check_signal_shape(latents.shape());
  if (latents.channels() != static_cast<std::size_t>(cfg.latent_channels))
    throw Error(ErrorCode::Shape, "synthesis input has " + std::to_string(latents.channels()) +
                                      " channels, config expects " + std::to_string(cfg.latent_channels));
  BasicTensor<T> x = pointwise(latents, p.at("dec.expand.weight"), p.at("dec.expand.bias"));
  for (int b = 0; b < cfg.dec_depth; ++b) {
    BasicTensor<T> h = group_norm(x, p.at(dec_param(b, "norm1.weight")), p.at(dec_param(b, "norm1.bias")),
                                  cfg.gn_groups);
    auto q = pointwise(h, p.at(dec_param(b, "attn.q.weight")), p.at(dec_param(b, "attn.q.bias")));
    auto k = pointwise(h, p.at(dec_param(b, "attn.k.weight")), p.at(dec_param(b, "attn.k.bias")));
    auto v = pointwise(h, p.at(dec_param(b, "attn.v.weight")), p.at(dec_param(b, "attn.v.bias")));
    auto a = linear_attention(q, k, v, cfg.heads);
    x = add(x, pointwise(a, p.at(dec_param(b, "attn.out.weight")), p.at(dec_param(b, "attn.out.bias"))));
    h = group_norm(x, p.at(dec_param(b, "norm2.weight")), p.at(dec_param(b, "norm2.bias")), cfg.gn_groups);
    h = gelu(pointwise(h, p.at(dec_param(b, "ffn.fc1.weight")), p.at(dec_param(b, "ffn.fc1.bias"))));
    x = add(x, pointwise(h, p.at(dec_param(b, "ffn.fc2.weight")), p.at(dec_param(b, "ffn.fc2.bias"))));
  }
  return pointwise(x, p.at("dec.proj.weight"), p.at("dec.proj.bias"));
}

#define LVA_INSTANTIATE(T)                                                                                 \
  template BasicTensor<T> grouped_conv(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, \
                                       int);                                                               \
  template BasicTensor<T> pointwise(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);   \
  template BasicTensor<T> channel_shuffle(const BasicTensor<T>&, int);                                     \
  template BasicTensor<T> gelu(const BasicTensor<T>&);                                                     \
  template BasicTensor<T> group_norm(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,   \
                                     int, double);                                                         \
  template BasicTensor<T> se_attention(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&, \
                                       const BasicTensor<T>&, const BasicTensor<T>&);                      \
  template BasicTensor<T> linear_attention(const BasicTensor<T>&, const BasicTensor<T>&,                   \
                                           const BasicTensor<T>&, int, double);                            \
  template BasicTensor<T> analysis_forward(const BasicTensor<T>&, const BasicParamStore<T>&,               \
                                           const ArchConfig&);                                             \
  template BasicTensor<T> synthesis_forward(const BasicTensor<T>&, const BasicParamStore<T>&,              \
                                            const ArchConfig&);

LVA_INSTANTIATE(float)
LVA_INSTANTIATE(double)
#undef LVA_INSTANTIATE

// ---------------------------------------------------------------------------

namespace {

nlohmann::json config_json(const CodecConfig& c) {
  const auto& a = c.arch;
  return {{"dims", a.dims},           {"channels", a.channels},
          {"levels", a.levels},       {"latent_channels", a.latent_channels},
          {"enc_depth", a.enc_depth}, {"dec_depth", a.dec_depth},
          {"groups1", a.groups1},     {"groups2", a.groups2},
          {"gn_groups", a.gn_groups}, {"se_reduction", a.se_reduction},
          {"heads", a.heads},         {"ffn_ratio", a.ffn_ratio},
          {"kernel", a.kernel},       {"gamma", c.compander.gamma},
          {"epsilon", c.compander.epsilon}};
}

CodecConfig config_from_json(const nlohmann::json& j) {
  CodecConfig c;
  auto& a = c.arch;
  a.dims = j.at("dims");
  a.channels = j.at("channels");
  a.levels = j.at("levels");
  a.latent_channels = j.at("latent_channels");
  a.enc_depth = j.at("enc_depth");
  a.dec_depth = j.at("dec_depth");
  a.groups1 = j.at("groups1");
  a.groups2 = j.at("groups2");
  a.gn_groups = j.at("gn_groups");
  a.se_reduction = j.at("se_reduction");
  a.heads = j.at("heads");
  a.ffn_ratio = j.at("ffn_ratio");
  a.kernel = j.at("kernel");
  c.compander.gamma = j.at("gamma");
  c.compander.epsilon = j.at("epsilon");
  return c;
}

}  // namespace

std::vector<std::uint8_t> encode_model(const ModelParams& m) {
  nlohmann::json manifest;
  manifest["format"] = "lvam";
  manifest["version"] = kModelVersion;
  manifest["config"] = config_json(m.config);
  manifest["digest"] = m.config.digest();
  manifest["tensors"] = nlohmann::json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    const auto& t = m.weights.value(i);
    manifest["tensors"].push_back({{"name", m.weights.name(i)}, {"offset", offset}, {"shape", t.shape()}});
    offset += t.size();
  }
  manifest["count"] = offset;
  const std::string text = manifest.dump();

  ByteWriter w;
  w.bytes(kModelMagic);
  w.u8(kModelVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.text(text);
  for (std::size_t i = 0; i < m.weights.size(); ++i)
    for (double v : m.weights.value(i).data()) w.f32(static_cast<float>(v));
  return w.take();
}

ModelParams decode_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kModelMagic)) throw DecodeError(0, "not an LVAM model file");
  if (const auto v = r.u8(); v != kModelVersion)
    throw DecodeError(4, "unsupported model file version " + std::to_string(v));
  const std::uint32_t len = r.u32();
  const std::size_t manifest_at = r.offset();
  auto text = r.bytes(len);
  nlohmann::json manifest;
  ModelParams m;
  std::size_t count = 0;
  try {
    manifest = nlohmann::json::parse(text.begin(), text.end());
    m.config = config_from_json(manifest.at("config"));
    count = manifest.at("count");
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(manifest_at, std::string("malformed model manifest: ") + e.what());
  }
  m.config.validate();
  const std::size_t blob_at = r.offset();
  if (r.remaining() != count * 4)
    throw DecodeError(blob_at, "model blob holds " + std::to_string(r.remaining()) + " bytes, manifest needs " +
                                   std::to_string(count * 4));
  auto blob = r.bytes(count * 4);
  try {
    for (const auto& entry : manifest.at("tensors")) {
      const std::size_t off = entry.at("offset");
      const Shape shape = entry.at("shape").get<Shape>();
      const std::size_t n = shape_size(shape);
      if (off + n > count) throw DecodeError(blob_at, "tensor '" + entry.at("name").get<std::string>() + "' overruns blob");
      ByteReader tr(blob.subspan(off * 4, n * 4));
      std::vector<double> data(n);
      for (auto& v : data) v = tr.f32();
      m.weights.add(entry.at("name"), Tensor(shape, std::move(data)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(manifest_at, std::string("malformed model manifest: ") + e.what());
  }
  // Structural check against the architecture the config describes.
  const ModelParams reference = init_model(m.config, 0);
  if (reference.weights.size() != m.weights.size())
    throw Error(ErrorCode::ParamMismatch, "model file has " + std::to_string(m.weights.size()) +
                                              " tensors, architecture needs " +
                                              std::to_string(reference.weights.size()));
  ParamStore ordered;
  for (std::size_t i = 0; i < reference.weights.size(); ++i) {
    const auto& name = reference.weights.name(i);
    if (!m.weights.contains(name)) throw Error(ErrorCode::ParamMismatch, "model file lacks tensor '" + name + "'");
    if (m.weights.at(name).shape() != reference.weights.value(i).shape())
      throw Error(ErrorCode::ParamMismatch, "tensor '" + name + "' has shape " +
                                                shape_string(m.weights.at(name).shape()) + ", expected " +
                                                shape_string(reference.weights.value(i).shape()));
    ordered.add(name, m.weights.at(name));
  }
  m.weights = std::move(ordered);
  return m;
}

void save_model(const std::string& path, const ModelParams& m) { write_file_atomic(path, encode_model(m)); }

ModelParams round_to_f32(const ModelParams& m) {
  ModelParams out{m.config, m.weights.cast<float>().cast<double>()};
  return out;
}

}  // namespace lva

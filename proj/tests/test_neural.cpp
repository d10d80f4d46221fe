// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "liveaction/neural.hpp"
#include "liveaction/parallel.hpp"
#include "support.hpp"

using namespace lva;

namespace {

std::size_t reflect(long i, long n) {
  while (i < 0 || i >= n) i = i < 0 ? -1 - i : 2 * n - 1 - i;
  return static_cast<std::size_t>(i);
}

// Direct 1-D convolution with half-sample symmetric extension, one scalar
// loop per output element.
Tensor dense_conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int groups) {
  const std::size_t cin = x.channels(), cout = w.extent(0), n = x.plane(), k = w.extent(2);
  const std::size_t cin_g = cin / groups, cout_g = cout / groups;
  Tensor y({cout, n});
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t p = 0; p < n; ++p) {
      double acc = b[o];
      for (std::size_t j = 0; j < cin_g; ++j)
        for (std::size_t u = 0; u < k; ++u) {
          const long src = static_cast<long>(p) + static_cast<long>(u) - static_cast<long>(k / 2);
          acc += w.at({o, j, u}) * x.at({(o / cout_g) * cin_g + j, reflect(src, static_cast<long>(n))});
        }
      y.at({o, p}) = acc;
    }
  return y;
}

ArchConfig small_arch(int dims = 1) {
  ArchConfig a;
  a.dims = dims;
  a.channels = 1;
  a.levels = 3;
  a.latent_channels = 2;
  return a.resolved();
}

}  // namespace

TEST_SUITE("neural") {

TEST_CASE("derived widths") {
  CHECK(default_groups(1536) == 32);
  CHECK(default_groups(768) == 24);
  CHECK(default_groups(8) == 2);
  CHECK(default_groups(512) == 16);
  CHECK(default_heads(1536) == 24);
  CHECK(default_heads(8) == 1);
  ArchConfig bad = small_arch();
  bad.groups1 = 3;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("grouped conv with one group equals the dense oracle") {
  Rng rng(21);
  const Tensor x = testing::random_tensor({4, 11}, rng);
  const Tensor w = testing::random_tensor({6, 4, 3}, rng);
  const Tensor b = testing::random_tensor({6}, rng);
  CHECK(max_abs_diff(grouped_conv(x, w, b, 1), dense_conv1d(x, w, b, 1)) <= 1e-12);
  const Tensor w2 = testing::random_tensor({6, 2, 3}, rng);
  CHECK(max_abs_diff(grouped_conv(x, w2, b, 2), dense_conv1d(x, w2, b, 2)) <= 1e-12);
}

TEST_CASE("depthwise identity kernel is the identity") {
  Rng rng(22);
  const Tensor x = testing::random_tensor({4, 3, 5}, rng);
  Tensor w({4, 1, 9});
  for (std::size_t c = 0; c < 4; ++c) w.at({c, 0, 4}) = 1.0;
  CHECK(grouped_conv(x, w, Tensor({4}), 4) == x);
}

TEST_CASE("grouped conv keeps groups separate") {
  Rng rng(23);
  Tensor x = testing::random_tensor({4, 9}, rng);
  for (std::size_t i = 0; i < 9; ++i) x.at({0, i}) = x.at({1, i}) = 0.0;
  const Tensor w = testing::random_tensor({4, 2, 3}, rng);
  const Tensor b = testing::random_tensor({4}, rng);
  const Tensor y = grouped_conv(x, w, b, 2);
  for (std::size_t o = 0; o < 2; ++o)
    for (std::size_t i = 0; i < 9; ++i) CHECK(y.at({o, i}) == b[o]);
  CHECK_THROWS_AS(grouped_conv(x, testing::random_tensor({4, 2, 3}, rng), b, 3), Error);
}

TEST_CASE("channel shuffle") {
  Tensor x({6, 1});
  for (std::size_t c = 0; c < 6; ++c) x[c] = static_cast<double>(c);
  const Tensor y = channel_shuffle(x, 2);
  CHECK(y.storage() == std::vector<double>{0, 3, 1, 4, 2, 5});
  CHECK(channel_shuffle(x, 1) == x);
  CHECK(channel_shuffle(channel_shuffle(x, 2), 3) == x);
  Rng rng(24);
  const Tensor z = testing::random_tensor({24, 4}, rng);
  CHECK(channel_shuffle(channel_shuffle(z, 4), 6) == z);
  CHECK_THROWS_AS(channel_shuffle(x, 4), Error);
}

TEST_CASE("SE with zero expansion weights halves the input") {
  Rng rng(25);
  const Tensor x = testing::random_tensor({8, 5}, rng);
  const Tensor y = se_attention(x, testing::random_tensor({2, 8}, rng), Tensor({2}), Tensor({8, 2}), Tensor({8}));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i] / 2).epsilon(1e-15));
}

TEST_CASE("SE matches a scalar oracle") {
  Rng rng(26);
  const Tensor x = testing::random_tensor({8, 6}, rng);
  const Tensor w1 = testing::random_tensor({2, 8}, rng), b1 = testing::random_tensor({2}, rng);
  const Tensor w2 = testing::random_tensor({8, 2}, rng), b2 = testing::random_tensor({8}, rng);
  std::vector<double> pooled(8), hidden(2);
  for (std::size_t c = 0; c < 8; ++c) {
    for (std::size_t i = 0; i < 6; ++i) pooled[c] += x.at({c, i});
    pooled[c] /= 6.0;
  }
  for (std::size_t r = 0; r < 2; ++r) {
    double a = b1[r];
    for (std::size_t c = 0; c < 8; ++c) a += w1.at({r, c}) * pooled[c];
    hidden[r] = std::max(a, 0.0);
  }
  Tensor expect(x.shape());
  for (std::size_t c = 0; c < 8; ++c) {
    double a = b2[c];
    for (std::size_t r = 0; r < 2; ++r) a += w2.at({c, r}) * hidden[r];
    const double gate = 1.0 / (1.0 + std::exp(-a));
    for (std::size_t i = 0; i < 6; ++i) expect.at({c, i}) = x.at({c, i}) * gate;
  }
  CHECK(max_abs_diff(se_attention(x, w1, b1, w2, b2), expect) <= 1e-12);
}

TEST_CASE("group norm") {
  Rng rng(27);
  const Tensor x = testing::random_tensor({16, 10}, rng);
  const Tensor gamma = testing::random_tensor({16}, rng), beta = testing::random_tensor({16}, rng);
  Tensor expect(x.shape());
  for (std::size_t grp = 0; grp < 8; ++grp) {
    double mean = 0.0, var = 0.0;
    for (std::size_t c = 2 * grp; c < 2 * grp + 2; ++c)
      for (std::size_t i = 0; i < 10; ++i) mean += x.at({c, i});
    mean /= 20.0;
    for (std::size_t c = 2 * grp; c < 2 * grp + 2; ++c)
      for (std::size_t i = 0; i < 10; ++i) var += (x.at({c, i}) - mean) * (x.at({c, i}) - mean);
    var /= 20.0;
    for (std::size_t c = 2 * grp; c < 2 * grp + 2; ++c)
      for (std::size_t i = 0; i < 10; ++i)
        expect.at({c, i}) = (x.at({c, i}) - mean) / std::sqrt(var + kGroupNormEps) * gamma[c] + beta[c];
  }
  CHECK(max_abs_diff(group_norm(x, gamma, beta, 8), expect) <= 1e-12);

  const Tensor ones = Tensor::full({16}, 1.0), zeros({16});
  CHECK(max_abs_diff(group_norm(Tensor::full({16, 10}, 3.0), ones, zeros, 8), Tensor({16, 10})) == 0.0);
  const Tensor once = group_norm(x, ones, zeros, 8);
  CHECK(max_abs_diff(group_norm(once, ones, zeros, 8), once) <= 1e-4);
}

TEST_CASE("linear attention matches the quadratic oracle") {
  Rng rng(28);
  for (std::size_t n : {1u, 8u, 32u, 64u}) {
    const Tensor q = testing::random_tensor({8, n}, rng), k = testing::random_tensor({8, n}, rng),
                 v = testing::random_tensor({8, n}, rng);
    for (int heads : {1, 2}) {
      const Tensor expect = testing::quadratic_attention(q, k, v, heads, kAttentionEps);
      CHECK(testing::max_rel_diff(linear_attention(q, k, v, heads), expect) <= 1e-9);
    }
  }
}

TEST_CASE("linear attention on a single token returns its value") {
  const Tensor q({2, 1}, {0.8, 0.3}), k({2, 1}, {0.5, 0.9}), v({2, 1}, {-1.5, 2.0});
  const Tensor y = linear_attention(q, k, v, 1);
  CHECK(y[0] == doctest::Approx(-1.5).epsilon(1e-5));
  CHECK(y[1] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("linear attention is permutation equivariant") {
  Rng rng(29);
  const Tensor q = testing::random_tensor({4, 6}, rng), k = testing::random_tensor({4, 6}, rng),
               v = testing::random_tensor({4, 6}, rng);
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  auto permute_tokens = [&](const Tensor& t) {
    Tensor o(t.shape());
    for (std::size_t c = 0; c < 4; ++c)
      for (std::size_t i = 0; i < 6; ++i) o.at({c, i}) = t.at({c, perm[i]});
    return o;
  };
  const Tensor a = permute_tokens(linear_attention(q, k, v, 2));
  const Tensor b = linear_attention(permute_tokens(q), permute_tokens(k), permute_tokens(v), 2);
  CHECK(testing::max_rel_diff(a, b) <= 1e-15);
}

TEST_CASE("analysis transform is zero preserving") {
  const ArchConfig a = small_arch();
  ModelParams m = init_model({a, {}}, 3);
  const Tensor z = analysis_forward(Tensor({8, 64}), m.weights, a);
  CHECK(z.shape() == Shape{2, 64});
  CHECK(max_abs_diff(z, Tensor({2, 64})) == 0.0);
}

TEST_CASE("projection-only analysis selects input channels") {
  ArchConfig a = small_arch();
  a.enc_depth = 0;
  ParamStore p;
  Tensor w({2, 8});
  w.at({0, 0}) = w.at({1, 1}) = 1.0;
  p.add("enc.proj.weight", w);
  p.add("enc.proj.bias", Tensor({2}));
  Rng rng(30);
  const Tensor x = testing::random_tensor({8, 16}, rng);
  const Tensor z = analysis_forward(x, p, a);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(z.at({0, i}) == x.at({0, i}));
    CHECK(z.at({1, i}) == x.at({1, i}));
  }
}

TEST_CASE("analysis transform golden replay across thread counts") {
  ArchConfig a;
  a.dims = 1;
  a.channels = 8;
  a.levels = 3;
  a.latent_channels = 4;
  a = a.resolved();
  REQUIRE(a.hidden() == 64);
  const ModelParams m = init_model({a, {}}, 2024);
  Rng rng(31);
  const Tensor x = testing::random_tensor({64, 16}, rng);
  set_num_threads(1);
  const Tensor z1 = analysis_forward(x, m.weights, a);
  set_num_threads(4);
  const Tensor z4 = analysis_forward(x, m.weights, a);
  const Tensor s4 = synthesis_forward(z4, m.weights, a);
  set_num_threads(1);
  const Tensor s1 = synthesis_forward(z1, m.weights, a);
  CHECK(z1 == z4);
  CHECK(s1 == s4);
  CHECK(all_finite(z1));
  CHECK(all_finite(s1));
}

TEST_CASE("model file round trip and structural checks") {
  const ArchConfig a = small_arch();
  const ModelParams m = init_model({a, {}}, 5);
  const auto bytes = encode_model(m);
  const ModelParams back = decode_model(bytes);
  CHECK(back.config.digest() == m.config.digest());
  CHECK(back.weights == round_to_f32(m).weights);
  for (std::size_t i = 0; i < m.weights.size(); ++i) CHECK(back.weights.name(i) == m.weights.name(i));

  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(decode_model(truncated), DecodeError);
  auto bad = bytes;
  bad[1] = 'X';
  CHECK_THROWS_AS(decode_model(bad), DecodeError);
}

TEST_CASE("initialization") {
  const ModelParams m = init_model({small_arch(), {}}, 6);
  for (double s : m.sigma()) CHECK(s == 1.0);
  CHECK(max_abs_diff(m.weights.at(enc_param(0, "se.fc2.weight")), Tensor({8, 2})) == 0.0);
  CHECK(m.weights.at(enc_param(0, "norm.weight")) == Tensor::full({8}, 1.0));
  CHECK(init_model({small_arch(), {}}, 6).weights == m.weights);
  CHECK(!(init_model({small_arch(), {}}, 7).weights == m.weights));
  CHECK(is_encoder_param("enc.0.conv1.weight"));
  CHECK(is_encoder_param(kLogSigma));
  CHECK(!is_encoder_param("dec.expand.weight"));
}

}  // TEST_SUITE

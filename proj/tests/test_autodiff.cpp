// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "liveaction/autodiff.hpp"
#include "liveaction/neural.hpp"
#include "support.hpp"

using namespace lva;
using testing::finite_difference_check;
using testing::random_tensor;

namespace {

constexpr double kTol = 1e-4;

std::vector<Tensor> randoms(Rng& rng, std::initializer_list<Shape> shapes, double lo = -1.0, double hi = 1.0) {
  std::vector<Tensor> out;
  for (const auto& s : shapes) out.push_back(random_tensor(s, rng, lo, hi));
  return out;
}

}  // namespace

TEST_SUITE("autodiff") {

TEST_CASE("grouped conv gradients, 1-D and 2-D") {
  Rng rng(41);
  auto r = finite_difference_check(randoms(rng, {{4, 7}, {4, 2, 3}, {4}}), [](ad::Graph& g, const auto& v) {
    return ad::grouped_conv(g, v[0], v[1], v[2], 2);
  });
  CHECK(r.max_rel_error <= kTol);
  r = finite_difference_check(randoms(rng, {{4, 4, 5}, {4, 4, 9}, {4}}), [](ad::Graph& g, const auto& v) {
    return ad::grouped_conv(g, v[0], v[1], v[2], 1);
  });
  CHECK(r.max_rel_error <= kTol);
}

TEST_CASE("pointwise projection gradients") {
  Rng rng(42);
  auto r = finite_difference_check(randoms(rng, {{6, 5}, {3, 6}, {3}}), [](ad::Graph& g, const auto& v) {
    return ad::pointwise(g, v[0], v[1], v[2]);
  });
  CHECK(r.max_rel_error <= kTol);
}

TEST_CASE("shuffle gradient is the inverse permutation") {
  Rng rng(43);
  const Tensor x = random_tensor({6, 3}, rng);
  ad::Graph g;
  const auto v = g.leaf(x);
  const auto y = ad::channel_shuffle(g, v, 2);
  const Tensor w = random_tensor({6, 3}, rng);
  g.backward(testing::weighted_sum(g, y, w));
  CHECK(g.grad(v) == channel_shuffle(w, 3));
}

TEST_CASE("activation gradients") {
  Rng rng(44);
  for (auto op : {0, 1}) {
    auto r = finite_difference_check(randoms(rng, {{3, 10}}, -3.0, 3.0), [op](ad::Graph& g, const auto& v) {
      return op == 0 ? ad::gelu(g, v[0]) : ad::sigmoid(g, v[0]);
    });
    CHECK(r.max_rel_error <= kTol);
  }
}

TEST_CASE("group norm gradients") {
  Rng rng(45);
  auto r = finite_difference_check(randoms(rng, {{16, 6}, {16}, {16}}), [](ad::Graph& g, const auto& v) {
    return ad::group_norm(g, v[0], v[1], v[2], 8);
  });
  CHECK(r.max_rel_error <= kTol);
}

TEST_CASE("SE gradients") {
  Rng rng(46);
  auto r = finite_difference_check(randoms(rng, {{8, 5}, {2, 8}, {2}, {8, 2}, {8}}), [](ad::Graph& g, const auto& v) {
    return ad::se_attention(g, v[0], v[1], v[2], v[3], v[4]);
  });
  CHECK(r.max_rel_error <= kTol);
}

TEST_CASE("linear attention gradients") {
  Rng rng(47);
  auto r = finite_difference_check(randoms(rng, {{8, 12}, {8, 12}, {8, 12}}), [](ad::Graph& g, const auto& v) {
    return ad::linear_attention(g, v[0], v[1], v[2], 2);
  });
  CHECK(r.max_rel_error <= kTol);
}

TEST_CASE("compander gradients") {
  Rng rng(48);
  const CompanderParams p;
  auto r = finite_difference_check(randoms(rng, {{2, 20}}, -2.0, 2.0), [p](ad::Graph& g, const auto& v) {
    return ad::compand(g, v[0], p);
  });
  CHECK(r.max_rel_error <= kTol);
  r = finite_difference_check(randoms(rng, {{2, 20}}, -1.0, 1.0), [p](ad::Graph& g, const auto& v) {
    return ad::compand_inverse(g, v[0], p);
  });
  CHECK(r.max_rel_error <= kTol);
}

TEST_CASE("Laplacian CDF gradients include the scales") {
  Rng rng(49);
  auto r = finite_difference_check(randoms(rng, {{2, 9}, {2}}, -1.5, 1.5), [](ad::Graph& g, const auto& v) {
    return ad::latent_cdf(g, v[0], v[1]);
  });
  CHECK(r.max_rel_error <= kTol);
  std::vector<Tensor> in{random_tensor({2, 9}, rng, -100.0, 100.0), random_tensor({2}, rng, -0.5, 0.5)};
  r = finite_difference_check(in, [](ad::Graph& g, const auto& v) { return ad::latent_cdf_inverse(g, v[0], v[1]); });
  CHECK(r.max_rel_error <= kTol);
}

TEST_CASE("soft quantizer passes gradients unchanged") {
  Rng rng(50);
  const Tensor x = random_tensor({2, 5}, rng), noise = random_tensor({2, 5}, rng, -0.5, 0.5);
  ad::Graph g;
  const auto v = g.leaf(x);
  const Tensor w = random_tensor({2, 5}, rng);
  g.backward(testing::weighted_sum(g, ad::add_noise(g, v, noise), w));
  CHECK(g.grad(v) == w);
}

TEST_CASE("wavelet gradients") {
  Rng rng(51);
  const WptConfig cfg{2, 2};
  auto r = finite_difference_check(randoms(rng, {{1, 8, 8}}), [cfg](ad::Graph& g, const auto& v) {
    return ad::wpt_forward(g, v[0], cfg);
  });
  CHECK(r.max_rel_error <= kTol);
  r = finite_difference_check(randoms(rng, {{16, 2, 2}}), [cfg](ad::Graph& g, const auto& v) {
    return ad::wpt_inverse(g, v[0], cfg, {1, 8, 8});
  });
  CHECK(r.max_rel_error <= kTol);
}

TEST_CASE("loss value and gradients") {
  Rng rng(52);
  const Tensor target = random_tensor({1, 6}, rng);
  auto r = finite_difference_check(randoms(rng, {{1, 6}, {2, 3}}, -3.0, 3.0), [&](ad::Graph& g, const auto& v) {
    const ad::Var recon[] = {v[0]};
    const Tensor targets[] = {target};
    const ad::Var lat[] = {v[1]};
    return ad::rd_loss(g, recon, targets, lat, 0.03);
  });
  CHECK(r.max_rel_error <= kTol);
}

TEST_CASE("full pipeline gradient on a toy codec") {
  double worst = 0.0;
  for (const auto& [name, rel] : testing::pipeline_gradient_check(53)) {
    INFO(name);
    CHECK(rel <= kTol);
    worst = std::max(worst, rel);
  }
  MESSAGE("worst relative error " << worst);
}

TEST_CASE("frozen leaves receive no gradient") {
  ad::Graph g;
  const auto a = g.leaf(Tensor({1, 2}, {1.0, 2.0}), false);
  const auto b = g.leaf(Tensor({1, 2}, {3.0, 4.0}));
  g.backward(testing::weighted_sum(g, ad::add(g, a, b), Tensor({1, 2}, {1.0, 1.0})));
  CHECK(!g.requires_grad(a));
  CHECK(g.grad(a) == Tensor({1, 2}));
  CHECK(g.grad(b) == Tensor({1, 2}, {1.0, 1.0}));
}

}  // TEST_SUITE

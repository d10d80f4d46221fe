// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include <json.hpp>

#include "doctest.h"
#include "liveaction/metrics.hpp"
#include "support.hpp"

using namespace lva;

namespace {

std::vector<RdPoint> curve(double scale) {
  std::vector<RdPoint> c;
  for (double q = 30.0; q <= 42.0; q += 2.0) c.push_back({scale * std::pow(2.0, q / 10.0), q});
  return c;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("PSNR values") {
  Tensor x({1, 4}), y({1, 4}, {0.01, -0.01, 0.01, -0.01});
  CHECK(psnr(x, y) == doctest::Approx(40.0).epsilon(1e-12));
  CHECK(psnr(x, x) == std::numeric_limits<double>::infinity());
  CHECK(psnr(x, y, 2.0) - psnr(x, y, 1.0) == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(psnr(x, Tensor({1, 3})), Error);
}

TEST_CASE("PSNR symmetry and scale consistency") {
  Rng rng(81);
  const Tensor a = testing::random_tensor({2, 9}, rng), b = testing::random_tensor({2, 9}, rng);
  CHECK(psnr(a, b) == psnr(b, a));
  Tensor as = a, bs = b;
  for (auto& v : as.data()) v *= 3.0;
  for (auto& v : bs.data()) v *= 3.0;
  CHECK(psnr(as, bs, 3.0) == doctest::Approx(psnr(a, b, 1.0)).epsilon(1e-12));
}

TEST_CASE("BD-rate") {
  CHECK(std::abs(bd_rate(curve(1.0), curve(1.0))) <= 1e-12);
  CHECK(bd_rate(curve(0.5), curve(1.0)) == doctest::Approx(-50.0).epsilon(1e-11));
  CHECK(std::abs(bd_rate(curve(1.25), curve(1.0)) - 25.0) <= 0.1 * 25.0 / 100.0);
  const double ab = bd_rate(curve(0.7), curve(1.0)) / 100.0, ba = bd_rate(curve(1.0), curve(0.7)) / 100.0;
  CHECK(ab == doctest::Approx(-ba / (1.0 + ba)).epsilon(1e-9));
  CHECK_THROWS_AS(bd_rate({{1, 30}, {2, 31}, {3, 32}}, curve(1.0)), Error);
  std::vector<RdPoint> far;
  for (double q = 60; q < 64; q += 1) far.push_back({q, q});
  CHECK_THROWS_AS(bd_rate(far, curve(1.0)), Error);
}

TEST_CASE("MAC arithmetic") {
  CHECK(pointwise_macs(1536, 1536) == 2359296.0);
  const double pair = grouped_conv_macs(1536, 1536, 32, 1, 1) * 2;
  CHECK(pair == 147456.0);
  CHECK(pointwise_macs(1536, 1536) / pair == 16.0);
  CHECK(grouped_conv_macs(64, 32, 1, 3, 2) == 9.0 * 64 * 32);
  const double rate = projection_macs_per_second(1920, 1080, 24.0, 8, 1536, 12);
  CHECK(rate == doctest::Approx(1.79e9).epsilon(0.001));
  CHECK(rate > 1.7e9);
}

TEST_CASE("MAC report totals equal the breakdown") {
  ArchConfig a;
  const MacReport r = mac_count(a, {256, 256});
  double sum = 0.0;
  for (const auto& e : r.breakdown) sum += e.total;
  CHECK(r.macs_total == doctest::Approx(sum).epsilon(1e-12));
  CHECK(r.positions == 256);
  CHECK(r.flops_total() == 2.0 * r.macs_total);
  const MacReport e = encoder_mac_count(a, {256, 256});
  CHECK(e.macs_total < r.macs_total);
}

TEST_CASE("dimensionality reduction accounting") {
  CHECK(dimensionality_reduction({3, 256, 256}, {12, 16, 16}) == 64.0);
  CHECK(dimensionality_reduction({3, 256, 256}, {48, 16, 16}) == 16.0);
  CHECK(compression_ratio({3, 4, 4}, 8, 12) == 4.0);
}

TEST_CASE("throughput report") {
  volatile double sink = 0.0;
  const auto r = throughput_bench("noop", [&] { for (int i = 0; i < 1000; ++i) sink = sink + 1.0; }, 1000000, 5);
  CHECK(r.runs.size() == 5);
  CHECK(std::isfinite(r.median_samples_per_second));
  CHECK(r.median_samples_per_second > 0.0);
  CHECK(r.iqr_samples_per_second >= 0.0);
  const auto j = nlohmann::json::parse(r.to_json());
  for (const char* key : {"name", "samples_per_run", "repetitions", "threads", "precision", "config_digest",
                          "median_samples_per_second", "iqr_samples_per_second", "runs"})
    CHECK(j.contains(key));
}

TEST_CASE("rd sweep schema") {
  ArchConfig a;
  a.dims = 1;
  a.channels = 1;
  a.levels = 3;
  a.latent_channels = 2;
  a.enc_depth = 1;
  a.dec_depth = 1;
  const ModelParams m = init_model({a.resolved(), {}}, 1);
  Rng rng(82);
  const std::vector<Tensor> set{testing::random_tensor({1, 64}, rng, 0, 1), testing::random_tensor({1, 64}, rng, 0, 1)};
  const auto res = rd_sweep({{"a", m}, {"b", m}}, set);
  CHECK(res.size() == 2);
  const std::string csv = rd_sweep_csv(res);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 4);
  CHECK_THROWS_AS(rd_sweep({{"a", m}}, {}), Error);
}

}  // TEST_SUITE

// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "liveaction/codec.hpp"
#include "liveaction/entropy.hpp"
#include "liveaction/metrics.hpp"
#include "liveaction/parallel.hpp"
#include "support.hpp"

using namespace lva;

namespace {

ModelParams toy_model(std::uint64_t seed = 1) {
  ArchConfig a;
  a.dims = 2;
  a.channels = 3;
  a.levels = 2;
  a.latent_channels = 4;
  a.enc_depth = 2;
  a.dec_depth = 2;
  return init_model({a.resolved(), {}}, seed);
}

Tensor smooth_image(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  Tensor x({c, h, w});
  for (std::size_t k = 0; k < c; ++k) {
    const double fx = rng.uniform(0.5, 3.0), fy = rng.uniform(0.5, 3.0), ph = rng.uniform(0.0, 6.0);
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j)
        x.at({k, i, j}) = 0.5 + 0.3 * std::sin(fx * i / h * 6.28 + ph) * std::cos(fy * j / w * 6.28);
  }
  return x;
}

}  // namespace

TEST_SUITE("codec") {

TEST_CASE("encode is deterministic and decode restores the shape") {
  const ModelParams m = toy_model();
  const Tensor x = smooth_image(3, 16, 16, 1);
  const auto a = encode(x, m), b = encode(x, m);
  CHECK(a == b);
  const Tensor y = decode(a, m);
  CHECK(y.shape() == x.shape());
  CHECK(decode(a, m) == y);
  CHECK(all_finite(y));
}

TEST_CASE("container round trip of the latent code") {
  const ModelParams m = toy_model();
  const Tensor x = smooth_image(3, 16, 32, 2);
  const LatentCode code = analyze(x, m);
  CHECK(code.latent_shape == Shape{4, 4, 8});
  const auto bytes = write_container(code, m);
  const ParsedContainer back = read_container(bytes);
  CHECK(back.code.symbols == code.symbols);
  CHECK(back.code.original_shape == x.shape());
  CHECK(back.info.levels == 2);
  CHECK(back.info.file_bytes == bytes.size());
  CHECK(bits_per_symbol(bytes) == doctest::Approx(8.0 * back.info.payload_bytes / 128.0));
}

TEST_CASE("single precision decode stays close to double") {
  const ModelParams m = toy_model();
  const Tensor x = smooth_image(3, 16, 16, 3);
  const auto bytes = encode(x, m);
  const Tensor yd = decode(bytes, m, Precision::Double);
  const Tensor yf = decode(bytes, m, Precision::Single);
  CHECK(max_abs_diff(yd, yf) <= 1e-3);
}

TEST_CASE("non-divisible extents are rejected unless padded") {
  const ModelParams m = toy_model();
  const Tensor x = smooth_image(3, 10, 13, 4);
  CHECK_THROWS_AS(encode(x, m), Error);
  const auto bytes = encode_padded(x, m);
  CHECK((read_container(bytes).info.flags & container_flags::kPadded) != 0);
  CHECK(decode(bytes, m).shape() == x.shape());
}

TEST_CASE("replicate padding and cropping") {
  Tensor x({1, 2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor p = pad_replicate(x, 4);
  CHECK(p.shape() == Shape{1, 4, 4});
  CHECK(p.at({0, 0, 3}) == 3.0);
  CHECK(p.at({0, 3, 3}) == 6.0);
  CHECK(p.at({0, 3, 0}) == 4.0);
  CHECK(crop(p, x.shape()) == x);
}

TEST_CASE("input validation") {
  const ModelParams m = toy_model();
  Tensor bad = smooth_image(3, 16, 16, 5);
  bad[7] = std::nan("");
  CHECK_THROWS_AS(encode(bad, m), Error);
  CHECK_THROWS_AS(encode(smooth_image(2, 16, 16, 5), m), Error);
}

TEST_CASE("decode errors carry byte offsets") {
  const ModelParams m = toy_model();
  const auto bytes = encode(smooth_image(3, 16, 16, 6), m);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode(bad, m), DecodeError);
  bad = bytes;
  bad[6] ^= 0x01;  // channel count; the checksum no longer matches
  try {
    decode(bad, m);
    FAIL("expected a decode error");
  } catch (const DecodeError& e) {
    CHECK(e.offset() == bytes.size() - 4);
  }
  bad = bytes;
  bad.resize(bytes.size() - 7);
  CHECK_THROWS_AS(decode(bad, m), DecodeError);
  CHECK_THROWS_AS(decode(std::vector<std::uint8_t>{}, m), DecodeError);
}

TEST_CASE("a different model is a parameter mismatch") {
  const ModelParams m = toy_model();
  const auto bytes = encode(smooth_image(3, 16, 16, 7), m);
  ModelParams other = m;
  other.weights.at(kLogSigma)[0] = 0.25;
  try {
    decode(bytes, other);
    FAIL("expected a mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParamMismatch);
  }
  ArchConfig a = m.config.arch;
  a.latent_channels = 8;
  CHECK_THROWS_AS(decode(bytes, init_model({a, {}}, 1)), Error);
}

TEST_CASE("thread count does not change the bitstream or reconstruction") {
  const ModelParams m = toy_model();
  const Tensor x = smooth_image(3, 32, 32, 8);
  set_num_threads(1);
  const auto b1 = encode(x, m);
  const Tensor y1 = decode(b1, m);
  set_num_threads(4);
  const auto b4 = encode(x, m);
  const Tensor y4 = decode(b4, m);
  set_num_threads(1);
  CHECK(b1 == b4);
  CHECK(y1 == y4);
}

TEST_CASE("RGB operating point: 256x256 gives 3072 symbols, DR 64, zero input codes tiny") {
  ArchConfig a;  // D=2, C=3, J=4, C_z=12
  a = a.resolved();
  CHECK(a.hidden() == 768);
  const ModelParams m = init_model({a, {}}, 1);
  Rng rng(9);
  const Tensor x = testing::random_tensor({3, 256, 256}, rng, 0.0, 1.0);
  const LatentCode code = analyze(x, m, Precision::Single);
  CHECK(code.latent_shape == Shape{12, 16, 16});
  CHECK(code.symbols.size() == 3072);
  CHECK(dimensionality_reduction(x.shape(), code.latent_shape) == 64.0);

  const auto zero = encode(Tensor({3, 256, 256}), m, Precision::Single);
  const ParsedContainer parsed = read_container(zero);
  for (auto s : parsed.code.symbols) CHECK(s == 0);
  CHECK(parsed.info.payload_bytes < 64);
}

}  // TEST_SUITE

// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "liveaction/entropy.hpp"
#include "liveaction/error.hpp"
#include "liveaction/random.hpp"

using namespace lva;

namespace {

std::vector<std::int8_t> random_stream(Rng& rng, std::size_t n, int spread) {
  std::vector<std::int8_t> s(n);
  for (auto& v : s) v = static_cast<std::int8_t>(std::clamp<long>(std::lround(rng.normal() * spread), -127, 127));
  return s;
}

}  // namespace

TEST_SUITE("entropy") {

TEST_CASE("frequency normalization") {
  const std::vector<std::uint64_t> counts{5, 0, 1, 1000000, 3};
  const auto f = normalize_frequencies(counts);
  CHECK(std::accumulate(f.begin(), f.end(), 0u) == 4096u);
  CHECK(f[1] == 0u);
  CHECK(f[0] >= 1u);
  CHECK(f[2] >= 1u);
  CHECK(f[3] > 4000u);
}

TEST_CASE("random round trips") {
  Rng rng(71);
  for (int i = 0; i < 500; ++i) {
    const std::size_t channels = 1 + rng.below(4);
    const std::size_t per = rng.below(300);
    const auto s = random_stream(rng, channels * per, 1 + static_cast<int>(rng.below(60)));
    const auto coded = entropy_encode(s, channels);
    CHECK(entropy_decode(coded.tables, coded.payload, s.size(), channels) == s);
  }
}

TEST_CASE("extreme symbols") {
  std::vector<std::int8_t> s{-127, 127, 0, -127, 127, 127, 127, -127};
  const auto c = entropy_encode(s, 2);
  CHECK(entropy_decode(c.tables, c.payload, s.size(), 2) == s);
  s.push_back(-128);
  s.push_back(0);
  CHECK_THROWS_AS(entropy_encode(s, 2), Error);
  CHECK_THROWS_AS(entropy_encode(std::vector<std::int8_t>(5, 0), 2), Error);
}

TEST_CASE("constant stream") {
  const std::vector<std::int8_t> s(1000000, 3);
  const auto c = entropy_encode(s, 1);
  CHECK(c.tables.size() + c.payload.size() < 1500);
  CHECK(8.0 * c.payload.size() / s.size() < 0.02);
  CHECK(c.any_rans);
  CHECK(entropy_decode(c.tables, c.payload, s.size(), 1) == s);
}

TEST_CASE("uniform stream is within one percent of the Shannon bound") {
  Rng rng(72);
  std::vector<std::int8_t> s(1000000);
  for (auto& v : s) v = static_cast<std::int8_t>(static_cast<int>(rng.below(255)) - 127);
  const auto c = entropy_encode(s, 1);
  const double bound = 1e6 * std::log2(255.0) / 8.0;
  CHECK(static_cast<double>(c.tables.size() + c.payload.size()) <= bound * 1.01);
  CHECK(entropy_decode(c.tables, c.payload, s.size(), 1) == s);
}

TEST_CASE("incompressible channels fall back to raw") {
  Rng rng(73);
  std::vector<std::int8_t> s(40);
  for (auto& v : s) v = static_cast<std::int8_t>(static_cast<int>(rng.below(255)) - 127);
  const auto c = entropy_encode(s, 1);
  CHECK(c.any_raw);
  CHECK(c.payload.size() == s.size());
  CHECK(entropy_decode(c.tables, c.payload, s.size(), 1) == s);
}

TEST_CASE("payload never exceeds raw size plus tables and 16 bytes") {
  Rng rng(74);
  for (int i = 0; i < 200; ++i) {
    const auto s = random_stream(rng, 1 + rng.below(2000), 1 + static_cast<int>(rng.below(127)));
    const auto c = entropy_encode(s, 1);
    CHECK(c.payload.size() <= s.size() + 16);
  }
}

TEST_CASE("corrupt and truncated input is rejected") {
  Rng rng(75);
  const auto s = random_stream(rng, 4000, 5);
  const auto c = entropy_encode(s, 2);
  auto payload = c.payload;
  payload.pop_back();
  CHECK_THROWS_AS(entropy_decode(c.tables, payload, s.size(), 2), DecodeError);
  auto tables = c.tables;
  tables.pop_back();
  CHECK_THROWS_AS(entropy_decode(tables, c.payload, s.size(), 2), DecodeError);
  tables = c.tables;
  tables[0] = 9;
  CHECK_THROWS_AS(entropy_decode(tables, c.payload, s.size(), 2), DecodeError);
  try {
    entropy_decode(c.tables, payload, s.size(), 2, 100, 1000);
  } catch (const DecodeError& e) {
    CHECK(e.offset() >= 100);
  }
}

}  // TEST_SUITE

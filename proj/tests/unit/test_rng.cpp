// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "tbri/rng.hpp"

using tbri::Rng;

TEST_CASE("same seed and stream give the same sequence") {
  Rng a(42, 7), b(42, 7);
  for (int k = 0; k < 1000; ++k) CHECK(a.normal() == b.normal());
}

TEST_CASE("streams and seeds decorrelate") {
  Rng a(42, 1), b(42, 2), c(43, 1);
  int same_ab = 0, same_ac = 0;
  for (int k = 0; k < 1000; ++k) {
    const double x = a.uniform();
    same_ab += x == b.uniform();
    same_ac += x == c.uniform();
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("uniform lies in [0, 1) and normal has unit variance") {
  Rng rng(5, 0);
  constexpr int kDraws = 200000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (int k = 0; k < kDraws; ++k) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
    sum4 += z * z * z * z;
  }
  const double mean = sum / kDraws;
  const double var = sum2 / kDraws - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.015);
  CHECK(std::abs(sum4 / kDraws - 3.0) < 0.06);
}

TEST_CASE("splitmix64 reference values") {
  // First outputs of the published splitmix64 generator seeded with 0.
  // splitmix64(x) is one step from state x, increment included.
  std::uint64_t state = 0;
  const auto next = [&state] {
    const std::uint64_t out = tbri::splitmix64(state);
    state += 0x9e3779b97f4a7c15ULL;
    return out;
  };
  CHECK(next() == 0xe220a8397b1dcdafULL);
  CHECK(next() == 0x6e789e6aa1b965f4ULL);
  CHECK(next() == 0x06c45d188009454fULL);
}

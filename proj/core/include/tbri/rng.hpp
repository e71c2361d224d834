// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace tbri {

/// Seed mixer (splitmix64 finalizer); derives independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Portable random stream.
///
/// Engine: std::mt19937_64 (algorithm fixed by the C++ standard).
/// uniform(): top 53 bits of one engine output scaled to [0, 1).
/// normal(): Box-Muller on two uniforms; the sine branch is cached and
/// returned by the next call. Both are bit-reproducible across platforms,
/// unlike the std:: distributions.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> cached_normal_;
};

}  // namespace tbri

// Copyright 2026 The ccai Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace ccai {

/// xoshiro256** seeded through splitmix64.
///
/// All draws are derived from raw 64-bit outputs with fixed arithmetic, so a
/// given seed produces the same stream on every platform and standard
/// library. `std::*_distribution` is deliberately not used anywhere.
class Rng {
 public:
  static constexpr std::string_view kName = "xoshiro256starstar/splitmix64";

  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal draw (Box-Muller, one value per call).
  double normal();

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a; used for per-id seed derivation and file checksums.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Seed for an independent stream keyed by a string id.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view id) {
  return splitmix64(seed ^ fnv1a64(id));
}

}  // namespace ccai

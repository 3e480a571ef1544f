// Copyright 2026 The ghztomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace ghztomo::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic random stream. Uniform doubles are produced from the raw
/// 64-bit output, so results do not depend on the standard library's
/// distribution implementations.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  /// Stream for one block of a partitioned computation: decorrelated from
  /// the master seed via splitmix64, reproducible for (seed, block).
  static Stream for_block(std::uint64_t master_seed, std::uint64_t block) {
    std::uint64_t s = master_seed ^ (0x5851f42d4c957f2dULL * (block + 1));
    splitmix64(s);  // one burn round decouples nearby blocks
    return Stream(splitmix64(s));
  }

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ghztomo::rng

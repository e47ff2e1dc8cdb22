// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "layoutprior/matrix.hpp"

namespace layoutprior {

/// Portable seeded generator. The bit source is the 64-bit Mersenne Twister
/// (std::mt19937_64, whose output sequence is fixed by the C++ standard); all
/// conversions to doubles and ranges are done here rather than through the
/// implementation-defined std:: distributions, so streams are identical on
/// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n must be positive. Rejection keeps it unbiased.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi);

  /// Index drawn proportionally to non-negative weights (positive total).
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; mixes (seed, index, stream) into an independent seed
/// so per-item streams do not depend on iteration order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t stream = 0);

/// Matrix with entries uniform in [lo, hi).
Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                     double hi = 1.0);

}  // namespace layoutprior

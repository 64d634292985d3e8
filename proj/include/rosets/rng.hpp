#pragma once

#include <cstdint>
#include <random>

namespace rosets {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed of stream `index` under master seed `seed`. Streams with distinct
/// indices are decorrelated, so work split by index is reproducible no
/// matter how it is scheduled.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(stream_seed(seed, index));
}

}  // namespace rosets

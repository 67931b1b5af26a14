#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace mdlab {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Stable 64-bit hash of a short label, used to name RNG streams.
std::uint64_t stream_tag(std::string_view label);

// Derives an independent seed from a base seed and a path of stream tags.
// The same (base, tags) always yields the same seed, so every stage of a
// pipeline can own its stream regardless of execution order.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Draws an index from an unnormalised non-negative weight vector.
std::size_t draw_weighted(Rng& rng, std::span<const double> weights);

// k distinct indices from [0, n), in random order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

}  // namespace mdlab

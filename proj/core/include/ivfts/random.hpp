#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ivfts {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a; stable across platforms, used for substream names and config hashes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Seed for a named substream of a global seed ("bootstrap", "synth/iv", ...).
std::uint64_t substream_seed(std::uint64_t global_seed, std::string_view name);

/// Counter-based seeding: replicate i always gets the same generator,
/// whichever thread happens to draw it.
inline Rng counter_rng(std::uint64_t seed, std::uint64_t counter) {
  return Rng(splitmix64(seed ^ splitmix64(counter + 0x9e3779b97f4a7c15ULL)));
}

}  // namespace ivfts

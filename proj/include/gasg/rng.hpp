#pragma once

#include <cstdint>
#include <random>

namespace gasg {

/// All randomness comes from std::mt19937_64. Independent streams (subspace
/// initialisation, column sampling, per-column synthesis, ...) are keyed off
/// the user seed with a splitmix64 mix so they never share state.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace stream {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t sampling = 2;
inline constexpr std::uint64_t seeding = 3;
inline constexpr std::uint64_t synth_factor = 4;
inline constexpr std::uint64_t synth_outliers = 5;
inline constexpr std::uint64_t synth_column = 6;
inline constexpr std::uint64_t repeat = 7;
}  // namespace stream

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id,
                                    std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream_id) ^ index);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream_id, index));
}

}  // namespace gasg

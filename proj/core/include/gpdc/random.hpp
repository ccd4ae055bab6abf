#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>

namespace gpdc {

using Rng = std::mt19937_64;

/// Stable 64-bit FNV-1a hash, used to derive per-policy seeds from names.
[[nodiscard]] constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

/// Derives an independent generator from a base seed and a stream label.
[[nodiscard]] inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

[[nodiscard]] inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

[[nodiscard]] inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Index of the largest score. Scores within `rel_tol` of the best count as tied and one of
/// them is picked uniformly with `rng`; the generator is consumed only when there is a tie.
/// Returns 0 for an empty span.
std::size_t argmax_random_tie(std::span<const double> scores, Rng& rng, double rel_tol = 1e-12);

}  // namespace gpdc

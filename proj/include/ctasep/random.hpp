#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace ctasep {

// Counter-keyed randomness. Every random quantity in the library is a pure
// function of (seed, key...), so coupled processes and parallel replicas
// never share mutable generator state.

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Domain tags keep the streams of unrelated consumers disjoint even when
/// they are handed the same seed.
enum class Domain : std::uint64_t {
  clock = 0x636c6f636b000001ULL,
  weight = 0x7765696768740002ULL,
  seed = 0x7365656400000003ULL,
  sample = 0x73616d706c650004ULL,
};

inline constexpr std::uint64_t hash_key(std::uint64_t seed, Domain domain,
                                        std::uint64_t a,
                                        std::uint64_t b) noexcept {
  std::uint64_t z = splitmix64(seed ^ static_cast<std::uint64_t>(domain));
  z = splitmix64(z ^ (a * 0xd1b54a32d192ed03ULL));
  z = splitmix64(z ^ (b * 0xaef17502108ef2d9ULL));
  return z;
}

/// Uniform on the open interval (0,1); never returns 0 or 1.
inline double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Exponential(1) by inversion; strictly positive and finite.
inline double unit_exponential(std::uint64_t bits) noexcept {
  return -std::log(open_unit(bits));
}

inline constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Sub-seed for a named consumer and an index (replica, grid point, ...).
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                           std::uint64_t index) noexcept {
  return hash_key(seed, Domain::seed, fnv1a(tag), index);
}

}  // namespace ctasep

#pragma once

#include <cstdint>
#include <string_view>

namespace prisample {

// Stable, platform-independent hashing. std::hash is not suitable: its
// values are allowed to differ between standard library implementations,
// and every random draw in this library is derived from these functions.

constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t state = 0xcbf29ce484222325ULL) noexcept {
  for (const char c : bytes) {
    state ^= static_cast<unsigned char>(c);
    state *= 0x100000001b3ULL;
  }
  return state;
}

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

/// Maps a 64-bit hash to (0, 1] using its top 53 bits.
constexpr double unit_open_closed(std::uint64_t h) noexcept {
  return (static_cast<double>(h >> 11) + 1.0) * 0x1p-53;
}

/// Maps a 64-bit hash to the open interval (0, 1).
constexpr double unit_open(std::uint64_t h) noexcept {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1p-53;
}

}  // namespace prisample

#pragma once

#include <cstdint>
#include <string_view>

namespace topictax {

// SplitMix64 finalizer.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed for an independent RNG stream keyed by (seed, key). Stable across
// platforms and runs.
constexpr uint64_t stream_seed(uint64_t seed, std::string_view key) {
  return mix64(mix64(seed) ^ fnv1a64(key));
}

}  // namespace topictax

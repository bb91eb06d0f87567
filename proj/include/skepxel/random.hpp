#pragma once

#include <cstdint>
#include <random>

namespace skepxel {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
  return mix_seed(mix_seed(seed ^ mix_seed(stream)) + index);
}

}  // namespace skepxel

#pragma once

#include <cstdint>
#include <initializer_list>

namespace f0reg {

/// Mixes a base seed with stream indices (epoch, batch, trial, ...) so that
/// independent random streams never share a generator state.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> streams) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(seed);
  for (auto s : streams) h = mix(h ^ mix(s));
  return h;
}

}  // namespace f0reg

#pragma once

#include <cstdint>
#include <random>

namespace dsq {

/// Independent random streams per shot.
enum class Stream : std::uint64_t { QuasiStatic = 1, OrnsteinUhlenbeck = 2, Preparation = 3, Detection = 4 };

/// Generator keyed by (seed, shot, stream). Identical keys give identical
/// sequences no matter which worker draws them or in what order.
inline std::mt19937_64 keyed_rng(std::uint64_t seed, std::uint64_t shot, Stream stream) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  const auto s = static_cast<std::uint64_t>(stream);
  std::seed_seq seq{lo(seed), hi(seed), lo(shot), hi(shot), lo(s), hi(s)};
  return std::mt19937_64(seq);
}

}  // namespace dsq

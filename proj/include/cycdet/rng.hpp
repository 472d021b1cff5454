#pragma once

#include <cstdint>
#include <random>

namespace cycdet {

// Every random draw in the toolkit comes from a std::mt19937_64 whose seed is
// derived by SplitMix64 from (master seed, stream id, counter). Distinct
// streams/counters give statistically independent engines, so window-level
// jobs can run in any order and on any number of workers.
using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t counter) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) + counter);
}

inline Engine make_engine(std::uint64_t seed) { return Engine(splitmix64(seed)); }

// Named streams used by the experiment harness.
enum class Stream : std::uint64_t {
  kNoiseFit = 1,
  kNoiseH0 = 2,
  kMessage = 3,
  kNoiseH1 = 4,
  kSignalNoise = 5,
};

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t counter) {
  return derive_seed(master, static_cast<std::uint64_t>(stream), counter);
}

}  // namespace cycdet

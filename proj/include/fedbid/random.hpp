#pragma once

#include <cstdint>
#include <random>

namespace fedbid {

using Rng = std::mt19937_64;

// Independent sub-streams of one master seed. Every random decision in a run
// draws from a stream named here so that changing one consumer of randomness
// never shifts another.
enum class Stream : std::uint64_t {
  kPool = 1,
  kRequestOrder,
  kTieBreak,
  kAgentBid,
  kBootstrap,
  kOwnerData,
  kTestSet,
  kClassCenters,
  kIdxSampling,
};

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ static_cast<std::uint64_t>(stream));
  h = mix64(h ^ a);
  return mix64(h ^ b);
}

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t a = 0,
                    std::uint64_t b = 0) {
  return Rng(derive_seed(master, stream, a, b));
}

// Uniform on [0, 1).
inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace fedbid

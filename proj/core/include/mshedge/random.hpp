#pragma once

#include <cstdint>
#include <random>

namespace mshedge {

/// Named purposes for derived RNG streams. Keeping them distinct means that
/// e.g. drawing parameters never shifts the Brownian increments of a path.
enum class StreamKind : std::uint64_t {
  kParams = 1,
  kPath = 2,
  kSplit = 3,
  kInit = 4,
  kShuffle = 5,
  kBootstrap = 6,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of stream `id` of kind `kind` under `master`: a pure function of its
/// inputs, so stream i never depends on how many other streams exist.
constexpr std::uint64_t stream_seed(std::uint64_t master, StreamKind kind, std::uint64_t id) {
  return mix64(mix64(mix64(master) ^ static_cast<std::uint64_t>(kind)) ^ mix64(id + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, StreamKind kind, std::uint64_t id) {
  return Rng(stream_seed(master, kind, id));
}

}  // namespace mshedge

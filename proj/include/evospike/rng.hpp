#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace evospike {

// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed and a path of
// indices, e.g. (master, generation, slot). The scheme is stateless, so
// parallel and serial execution draw identical streams regardless of
// scheduling order or worker count.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p));
  return h;
}

inline std::mt19937_64 make_rng(std::uint64_t master,
                                std::initializer_list<std::uint64_t> path) {
  return std::mt19937_64(derive_seed(master, path));
}

// Fixed stream tags so distinct purposes never share a stream.
namespace rng_stream {
constexpr std::uint64_t init_population = 0x01;
constexpr std::uint64_t variation = 0x02;
constexpr std::uint64_t run = 0x03;
}  // namespace rng_stream

}  // namespace evospike

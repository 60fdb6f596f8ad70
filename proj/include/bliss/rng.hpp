#pragma once

#include <cstdint>
#include <random>

namespace bliss::rng {

// splitmix64 finalizer; used to derive independent sub-seeds from one
// master seed so that experiments replay exactly from persisted metadata.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream));
}

template <typename... Rest>
std::uint64_t derive(std::uint64_t base, std::uint64_t stream, Rest... rest) {
  return derive(derive(base, stream), rest...);
}

inline std::mt19937_64 engine(std::uint64_t seed) {
  return std::mt19937_64(splitmix64(seed));
}

}  // namespace bliss::rng

#pragma once

#include <cstdint>
#include <initializer_list>

namespace symrc::harness {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a master seed and a path of integers (cell, instance, stream...) into one seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

/// Named sub-streams of one instance seed.
enum class Stream : std::uint64_t { reservoir = 1, train = 2, validation = 3, test = 4, optimizer = 5 };

inline std::uint64_t stream_seed(std::uint64_t instance_seed, Stream s) {
  return derive_seed(instance_seed, {static_cast<std::uint64_t>(s)});
}

}  // namespace symrc::harness

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace qcal {

/// Seedable random source with a fully specified bit stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distribution helpers below are written out explicitly
/// instead of using <random> distributions, whose algorithms are
/// implementation-defined, so that every draw reproduces across compilers:
///
///   uniform01()  = (next_u64() >> 11) * 2^-53            in [0, 1)
///   uniform(a,b) = a + (b - a) * uniform01()
///   index(n)     = x % n for the first x below n * floor(2^64 / n)
///
/// Named substreams are seeded with splitmix64(seed ^ fnv1a64(name)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::string_view name);

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi);
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

}  // namespace qcal

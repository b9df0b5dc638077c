#pragma once

#include <cstdint>
#include <string_view>

namespace binlearn {

// splitmix64: tiny counter-based generator, bit-stable across platforms.
// std engines/distributions are avoided on purpose; uniform_*_distribution
// output is implementation-defined and would break reproducibility contracts.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit mantissa
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // unbiased uniform in [0, bound), bound >= 1; rejection sampling
  std::uint64_t next_below(std::uint64_t bound) {
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  SplitMix64 g(seed + 0x9E3779B97F4A7C15ull * (salt + 1));
  return g.next();
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace binlearn

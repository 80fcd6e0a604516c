#pragma once

#include <cstdint>
#include <random>

namespace ricci {

/// splitmix64 step; used to derive independent per-item seeds so that
/// parallel sampling is reproducible regardless of the thread count.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0xd1b54a32d192ed03ull * (index + 1));
  return splitmix64(s);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(seed, index));
}

/// Halton low-discrepancy sequence member i (1-based) in base b.
inline double halton(std::uint64_t i, unsigned base) {
  double f = 1.0, x = 0.0;
  while (i > 0) {
    f /= base;
    x += f * static_cast<double>(i % base);
    i /= base;
  }
  return x;
}

inline unsigned nth_prime_base(int dim) {
  static const unsigned primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,
                                    37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79,
                                    83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
  return primes[dim % 32];
}

}  // namespace ricci

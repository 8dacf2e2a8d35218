#pragma once

// Seeded deterministic RNG with named sub-stream derivation. Every random
// draw in the pipeline flows from one root seed through derived streams, so
// runs reproduce bit-for-bit across platforms. std::uniform_*_distribution is
// implementation-defined and is deliberately not used anywhere.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace txsage {

namespace detail {

inline std::uint64_t splitmix_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class Rng {
 public:
  Rng() : state_(0) {}
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return detail::splitmix_next(state_); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [0, n), unbiased (rejection over the largest multiple of n).
  std::uint64_t below(std::uint64_t n) {
    assert(n > 0);
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

  bool coin() { return (next_u64() & 1u) != 0; }

  /// Standard normal. Box-Muller, cosine branch only; always consumes exactly
  /// two uniform draws so that stream positions stay predictable.
  double normal() {
    double u1 = 1.0 - next_double();  // (0, 1]
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Independent stream addressed by (tag, a, b). Derivation is pure: it does
  /// not advance this stream, and the same address always yields the same
  /// sub-stream.
  Rng derive(std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0) const {
    std::uint64_t s = state_ ^ detail::fnv1a64(tag);
    detail::splitmix_next(s);
    s ^= a * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL;
    detail::splitmix_next(s);
    s ^= b * 0xc4ceb9fe1a85ec53ULL + 0x9e3779b97f4a7c15ULL;
    detail::splitmix_next(s);
    return Rng(s);
  }

 private:
  std::uint64_t state_;
};

}  // namespace txsage

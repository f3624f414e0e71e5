#pragma once

#include <cstdint>
#include <stdexcept>

namespace pixel {

/// xorshift64* (Vigna), seeded through one splitmix64 round so that every
/// 64-bit seed, including 0, yields a nonzero state. Pure integer arithmetic:
/// the sequence for a given seed is identical on every platform.
///
/// All engine randomness is drawn from a single instance in a fixed call
/// order, which is what makes session replay exact.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed_state(seed)) {}

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  /// Uniform in [0, bound). Rejection sampling removes modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below bound must be positive");
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform in [lo, hi], inclusive.
  int uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("Rng::uniform_int empty range");
    const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
    return static_cast<int>(lo + static_cast<std::int64_t>(below(span)));
  }

  /// Uniform double in [0, 1) built from the top 53 bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  std::uint64_t state() const { return state_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  static std::uint64_t seed_state(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z != 0 ? z : 0x9E3779B97F4A7C15ULL;
  }

  std::uint64_t state_;
};

}  // namespace pixel

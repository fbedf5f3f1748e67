#pragma once

#include <cstdint>
#include <random>

namespace qtomo {

/// splitmix64 finaliser; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

/// Independent stream seed for task `index` under `master`:
/// master XOR mix(index). Order-independent by construction.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Seeded random stream. Variate generation is implemented here rather than
/// through <random> distributions so that outputs are identical across
/// standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Standard normal (Marsaglia polar method, one variate per call).
  double normal();
  /// Exponential with unit rate.
  double exponential();

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace qtomo

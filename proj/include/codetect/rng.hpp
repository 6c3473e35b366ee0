#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace codetect {

// Portable random stream: std::mt19937_64 for bits, with hand-written
// conversions to doubles and categorical draws so sequences are identical
// across standard libraries (std::*_distribution output is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  // Standard normal via Box-Muller.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  // Draws index i with probability weights[i] / sum(weights). Weights must be
  // nonnegative with a positive sum.
  std::size_t categorical(std::span<const double> weights);

  // Child stream keyed by a label; independent of how much of this stream has
  // been consumed.
  Rng child(std::string_view key) const { return Rng(derive_seed(seed_, key)); }
  std::uint64_t seed() const { return seed_; }

  static std::uint64_t derive_seed(std::uint64_t parent, std::string_view key);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace codetect

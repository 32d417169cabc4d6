#pragma once

#include <cstdint>
#include <random>

namespace attnfc {

/// Deterministic random stream. mt19937_64 is fully specified by the
/// standard and the derived draws below avoid std::*_distribution, whose
/// output is implementation-defined; the same seed therefore produces the
/// same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace attnfc

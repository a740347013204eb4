#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace exactbp {

/// Seeded generator shared by sampling and simulation.
///
/// The stream is fixed across platforms: std::mt19937_64 (whose output the
/// standard pins down), uniforms from the top 53 bits, and inverse-CDF draws
/// for every discrete distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Index k drawn with probability weights[k] / sum(weights); the first
  /// index whose running sum exceeds u * sum wins. Weights must have positive mass.
  std::size_t categorical(std::span<const double> weights);

  /// Poisson(rate) by sequential inversion.
  unsigned poisson(double rate);

 private:
  std::mt19937_64 engine_;
};

}  // namespace exactbp

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gprl {

// Deterministic pseudo-random stream with a fixed, documented generator
// (mt19937_64) and hand-rolled variate transforms.  std::uniform_real_distribution,
// std::normal_distribution and std::discrete_distribution are implementation
// defined, so using them would break the byte-determinism contract across
// standard libraries.
//
// Draw order is part of the contract:
//   - uniform01() consumes exactly one engine output.
//   - normal() consumes two engine outputs on every other call (Box-Muller,
//     the second deviate is cached and returned by the next call).
//   - categorical() consumes exactly one engine output (inverse-CDF scan).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    // Guard against log(0).
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;  // 2*pi
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // Index sampled from the categorical distribution given by `probs`
  // (assumed nonnegative, summing to 1): first index whose running CDF
  // exceeds a single uniform draw.
  std::size_t categorical(const std::vector<double>& probs) {
    const double u = uniform01();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return probs.size() - 1;
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace gprl

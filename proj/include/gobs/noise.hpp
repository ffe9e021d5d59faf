#pragma once

#include <cstdint>

#include "gobs/lie_core.hpp"

namespace gobs {

// splitmix64: tiny, seedable, platform-stable. We avoid std::mt19937 +
// std::normal_distribution because their stream is not pinned across
// standard library implementations and the noise traces must replay
// byte-identically from the seed alone.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
};

// Standard normals via the Marsaglia polar method (deterministic given the
// seed, no libm functions with platform-dependent rounding beyond sqrt/log).
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double next();
  Vector vector(int dim);

  // amplitude * z / max(1, |z|): standard normal direction, norm clipped so
  // the sample never leaves the closed amplitude-ball. Keeps every
  // disturbance bounded, which is what the convergence statements assume.
  Vector bounded_vector(int dim, double amplitude);

 private:
  SplitMix64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gobs

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace rowrl {

// Speed limits shared by the simulator and the reward math.
constexpr double kMaxVehicleSpeed = 30.0 / 3.6;  // 30 km/h in m/s
constexpr double kMaxWalkSpeed = 1.3;            // m/s

// Cross-section constants: lane width, lane marking buffer, minimum sidewalk.
constexpr double kLaneWidth = 3.5;
constexpr double kLaneBuffer = 0.5;
constexpr double kMinSidewalk = 1.5;

constexpr double kFeasibilityEps = 1e-9;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// splitmix64, used to derive independent RNG streams from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(mix_seed(seed, stream));
}

// Uniform double in [0,1). mt19937_64 output is standardised, so every
// sampler below is reproducible across platforms (std::*_distribution is not).
inline double uniform01(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Inclusive integer range.
inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(rng() % span);
}

// Marsaglia polar method; no cached spare so the stream stays stateless.
inline double gaussian(std::mt19937_64& rng) {
  for (;;) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = 2.0 * uniform01(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

// Knuth's product method, split by Poisson additivity so exp(-mean) cannot
// underflow for large means.
inline int poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  int total = 0;
  while (mean > 30.0) {
    const double half = mean / 2.0;
    total += poisson(rng, half);
    mean -= half;
  }
  const double limit = std::exp(-mean);
  double prod = 1.0;
  int n = -1;
  do {
    ++n;
    prod *= uniform01(rng);
  } while (prod > limit);
  return total + n;
}

}  // namespace rowrl

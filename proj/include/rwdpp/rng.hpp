#ifndef RWDPP_RNG_HPP
#define RWDPP_RNG_HPP

#include <cmath>
#include <cstdint>

#include "rwdpp/lattice.hpp"

namespace rwdpp::rng {

// Counter-based randomness: every random quantity in the toolkit is a pure
// function of (master seed, role tag, indices). Streams are derived by the
// avalanche chain below, so lazy per-site queries and parallel workers see
// the same bits regardless of evaluation order.

inline constexpr std::uint64_t kPhi64 = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer (Steele/Lea/Flood; Vigna's constants).
constexpr std::uint64_t avalanche(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Folds one 64-bit value into a stream key.
constexpr std::uint64_t combine(std::uint64_t key, std::uint64_t v) {
  return avalanche(key ^ (v * kPhi64 + 0xD1B54A32D192ED03ull));
}

// Role tags keep derived streams disjoint across uses of the same master
// seed. Values are frozen; changing them changes every report byte.
enum class Role : std::uint64_t {
  kOccupancy = 1,      // bernoulli per-site bits
  kFactorInput = 2,    // block-factor per-site uniforms
  kFactorRetry = 3,    // origin-conditioning resample counter
  kWalkSteps = 4,      // one uniform per walk step
  kWalkClock = 5,      // Poisson clock exponentials
  kEnvReplicate = 6,   // per-sample environment seeds in ensembles
  kExperiment = 7,     // experiment-level scratch streams
  kTorusSample = 8,    // torus fundamental-domain draws
};

constexpr std::uint64_t derive(std::uint64_t master, Role role) {
  return combine(master, static_cast<std::uint64_t>(role));
}

constexpr std::uint64_t derive(std::uint64_t master, Role role, std::uint64_t index) {
  return combine(derive(master, role), index);
}

inline std::uint64_t site_key(std::uint64_t stream, const Site& x) {
  std::uint64_t k = stream;
  for (int i = 0; i < kMaxDim; ++i) k = combine(k, static_cast<std::uint64_t>(x.c[i]));
  return k;
}

constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in [0,1) attached to a single site of a single stream.
inline double site_uniform(std::uint64_t stream, const Site& x) {
  return to_unit(avalanche(site_key(stream, x)));
}

// Sequential generator for walk-style consumers: splitmix64 with the
// derived key as initial state.
class Stream {
 public:
  explicit Stream(std::uint64_t key) : state_(key) {}

  std::uint64_t next() {
    state_ += kPhi64;
    return avalanche(state_);
  }

  double u01() { return to_unit(next()); }

  // One variate consumed per call; n <= 8 in all walk uses.
  int uniform_index(int n) {
    const int k = static_cast<int>(u01() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  double exponential() { return -std::log(1.0 - u01()); }

 private:
  std::uint64_t state_;
};

}  // namespace rwdpp::rng

#endif  // RWDPP_RNG_HPP

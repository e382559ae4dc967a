#pragma once

#include <cstdint>

#include "gamelab/vec.hpp"

namespace gamelab {

// Deterministic splittable PRNG (splitmix64 core).
//
// Same seed gives the same sample stream on every platform; derive() spawns
// statistically independent streams keyed on the original seed, so concurrent
// runs and per-component substreams never overlap.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), state_(mix(seed ^ 0x1b873593b87f4a7cULL)) {}

  // Independent child stream. Derivation depends on the construction seed
  // only, not on how many samples were drawn so far.
  Rng derive(uint64_t stream) const {
    return Rng(mix(seed_ + 0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; draws exactly two uniforms per call.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Inverse-CDF exponential sample with the given rate; mean 1/rate.
  double exponential(double rate);

  Vec normal_vec(int n) {
    Vec v(static_cast<size_t>(n));
    for (auto& x : v) x = normal();
    return v;
  }

  uint64_t seed() const { return seed_; }

 private:
  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t seed_;
  uint64_t state_;
};

// Exponential quantile function: -ln(1-u)/rate for u in [0, 1).
inline double exponential_inverse_cdf(double u, double rate) {
  if (!(rate > 0)) throw ConfigError("exponential: rate must be > 0");
  return -std::log1p(-u) / rate;
}

inline double Rng::exponential(double rate) { return exponential_inverse_cdf(uniform(), rate); }

// Exponential noise draw used by the perturbed-leader oracle.
inline double sample_exponential(double zeta, Rng& rng) { return rng.exponential(zeta); }

}  // namespace gamelab

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nsgld {

// Splittable deterministic RNG streams.
//
// Every consumer derives an independent stream from (seed, purpose, index)
// via two rounds of the splitmix64 mixer; the mixed key seeds a mt19937_64
// engine. Gaussians come from a Box-Muller transform over open-interval
// uniforms, so draws are reproducible across platforms for a given libstdc++-
// independent engine state (mt19937_64 output is fully specified by the
// standard; no std::*_distribution is used anywhere).
//
// Purposes keep unrelated consumers off each other's streams: a run with an
// explicitly supplied J consumes exactly the same chain streams as a run
// whose J was derived from tau, which is what makes config-echo round-trips
// byte-identical.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

enum class StreamPurpose : std::uint64_t {
  chain = 1,      // one stream per chain, index = chain number
  drift = 2,      // random antisymmetric J construction
  dataset = 3,    // synthetic dataset generation
  probe = 4,      // regularity verification sampling
};

class Rng {
 public:
  Rng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index)
      : eng_(splitmix64(splitmix64(seed ^ static_cast<std::uint64_t>(purpose) *
                                              0xA24BAED4963EE407ull) ^
                        index)) {}

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via Box-Muller; two uniforms per draw, no cached spare,
  // so the draw count per step is fixed and replayable.
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n); fixed-point multiply keeps the draw count at
  // one engine call.
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(eng_()) * n) >> 64);
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace nsgld

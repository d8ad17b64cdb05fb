#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace homove {

// splitmix64 step; the workhorse behind seed derivation and stateless noise.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Carves an independent stream seed out of a root seed and a path of
// indices (e.g. {kPortfolio, entry, episode}). Every run-wide random choice
// goes through this so that one root seed pins the whole experiment.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = root ^ 0x8f1bbcdcbfa53e0bULL;
  std::uint64_t out = splitmix64(s);
  for (std::uint64_t p : path) {
    s ^= p + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    out = splitmix64(s);
  }
  return out;
}

// Deterministic RNG wrapper. Distributions are implemented by hand; the
// standard library leaves normal_distribution unspecified and caches state,
// which would make replay order-dependent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0 and small relative to 2^64.
  int uniform_int(int n) {
    return static_cast<int>(eng_() % static_cast<std::uint64_t>(n));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller, one value per call; the sine twin is discarded so the
  // stream position never depends on call history.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 eng_;
};

// Stateless N(0,1) keyed by an arbitrary 64-bit key; used for per-(tick,
// cell) measurement jitter so samples are random-access reproducible.
inline double hashed_normal(std::uint64_t key) {
  std::uint64_t s = key ^ 0xd6e8feb86659fd93ULL;
  double u1 = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
  const double u2 = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace homove

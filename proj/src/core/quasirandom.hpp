#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace homove {

// Halton sequence with per-dimension Cranley-Patterson rotation and a
// seeded start offset. Supports up to 64 dimensions (first 64 primes).
class HaltonSampler {
 public:
  HaltonSampler(int dims, std::uint64_t seed);

  // Next point in [0,1)^d.
  Eigen::VectorXd next();

  // n points stacked as rows.
  Eigen::MatrixXd take(int n);

 private:
  int dims_;
  std::uint64_t index_;
  Eigen::VectorXd shift_;
};

// Seeded Latin hypercube sample: n rows in [0,1)^d, one stratum per row and
// dimension, jittered within strata.
Eigen::MatrixXd latin_hypercube(int n, int dims, std::uint64_t seed);

}  // namespace homove

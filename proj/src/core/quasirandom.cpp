#include "core/quasirandom.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "core/rng.hpp"

namespace homove {
namespace {

constexpr int kPrimes[64] = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,
    43,  47,  53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101,
    103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167,
    173, 179, 181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239,
    241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

double radical_inverse(std::uint64_t n, int base) {
  double inv_base = 1.0 / base;
  double scale = inv_base;
  double value = 0.0;
  while (n > 0) {
    value += static_cast<double>(n % static_cast<std::uint64_t>(base)) * scale;
    n /= static_cast<std::uint64_t>(base);
    scale *= inv_base;
  }
  return value;
}

}  // namespace

HaltonSampler::HaltonSampler(int dims, std::uint64_t seed) : dims_(dims) {
  if (dims < 1 || dims > 64)
    throw std::invalid_argument("HaltonSampler supports 1..64 dimensions");
  Rng rng(seed);
  index_ = 17 + (rng.next_u64() % 4096);  // skip the degenerate prefix
  shift_ = Eigen::VectorXd(dims_);
  for (int i = 0; i < dims_; ++i) shift_[i] = rng.uniform();
}

Eigen::VectorXd HaltonSampler::next() {
  Eigen::VectorXd p(dims_);
  for (int i = 0; i < dims_; ++i) {
    double v = radical_inverse(index_, kPrimes[i]) + shift_[i];
    if (v >= 1.0) v -= 1.0;
    p[i] = v;
  }
  ++index_;
  return p;
}

Eigen::MatrixXd HaltonSampler::take(int n) {
  Eigen::MatrixXd out(n, dims_);
  for (int r = 0; r < n; ++r) out.row(r) = next().transpose();
  return out;
}

Eigen::MatrixXd latin_hypercube(int n, int dims, std::uint64_t seed) {
  if (n < 1 || dims < 1)
    throw std::invalid_argument("latin_hypercube needs n >= 1, dims >= 1");
  Rng rng(seed);
  Eigen::MatrixXd out(n, dims);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int d = 0; d < dims; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
    for (int r = 0; r < n; ++r)
      out(r, d) = (perm[static_cast<std::size_t>(r)] + rng.uniform()) / n;
  }
  return out;
}

}  // namespace homove

// Dev probe: TuRBO vs random search on synthetic functions.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "core/quasirandom.hpp"
#include "core/rng.hpp"
#include "core/turbo.hpp"

using namespace homove;

static double ackley(const Eigen::VectorXd& x01) {
  const Eigen::VectorXd x = (x01.array() * 10.0 - 5.0).matrix();  // [-5,5]
  const int d = static_cast<int>(x.size());
  const double a = 20.0, b = 0.2, c = 2.0 * M_PI;
  const double s1 = x.squaredNorm() / d;
  double s2 = 0.0;
  for (int i = 0; i < d; ++i) s2 += std::cos(c * x[i]);
  return -a * std::exp(-b * std::sqrt(s1)) - std::exp(s2 / d) + a + std::exp(1.0);
}

int main(int argc, char** argv) {
  const int d = argc > 1 ? std::atoi(argv[1]) : 10;
  const int budget = argc > 2 ? std::atoi(argv[2]) : 300;
  const int n_init = argc > 3 ? std::atoi(argv[3]) : 20;
  const int n_seeds = argc > 4 ? std::atoi(argv[4]) : 5;

  int wins = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int seed = 0; seed < n_seeds; ++seed) {
    turbo::RunConfig cfg;
    cfg.dims = d;
    cfg.budget = budget;
    cfg.n_init = n_init;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const auto res = turbo::run_bo(
        [](const Eigen::VectorXd& x, std::uint64_t) {
          return turbo::EvalOutcome{ackley(x), true, ""};
        },
        cfg);

    Rng rng(derive_seed(static_cast<std::uint64_t>(seed), {0xabc}));
    double rs_best = 1e300;
    for (int i = 0; i < budget; ++i) {
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j) x[j] = rng.uniform();
      rs_best = std::min(rs_best, ackley(x));
    }
    if (res.best_value < rs_best) ++wins;
    std::printf("seed %d: turbo=%.4f rs=%.4f restarts=%d\n", seed,
                res.best_value, rs_best, res.restarts);
  }
  const auto t1 = std::chrono::steady_clock::now();
  std::printf("wins %d/%d, %.1f s total\n", wins, n_seeds,
              std::chrono::duration<double>(t1 - t0).count());
  return 0;
}

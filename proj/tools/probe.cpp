// Dev probe: benchmark KPI trends on the reference scenario.
#include <cstdio>
#include <cstdlib>

#include "core/objective.hpp"
#include "core/rng.hpp"

using namespace homove;

int main(int argc, char** argv) {
  const double speed = argc > 1 ? std::atof(argv[1]) : 3.0;
  const double alt = argc > 2 ? std::atof(argv[2]) : -1.0;
  const bool aerial = argc > 3 && std::atoi(argv[3]) != 0;
  const int n_seeds = argc > 4 ? std::atoi(argv[4]) : 5;
  const double tilt_lo = argc > 5 ? std::atof(argv[5]) : 0.0;
  const double tilt_hi = argc > 6 ? std::atof(argv[6]) : 0.0;

  for (int seed = 1; seed <= n_seeds; ++seed) {
    Scenario sc = build_reference_scenario(static_cast<std::uint64_t>(seed), aerial);
    if (tilt_hi > 0.0) {
      Rng trng(seed * 977u);
      for (std::size_t s = 0; s < sc.deployment.cells.size(); s += 3) {
        const double tilt = trng.uniform(tilt_lo, tilt_hi);
        for (std::size_t k = 0; k < 3 && s + k < sc.deployment.cells.size(); ++k)
          if (sc.deployment.cells[s + k].tilt_deg > 0)
            sc.deployment.cells[s + k].tilt_deg = tilt;
      }
    }
    Weights w{TradeOff::kPpRlf, 9.0, 9.0, 1.0};
    Portfolio pf = make_portfolio(sc, {speed}, alt, 4,
                                  derive_seed(static_cast<std::uint64_t>(seed), {1}));
    PortfolioEvaluator ev(sc, pf, w);
    const auto r1 = ev.evaluate(benchmark_params(BenchmarkSet::kSet1, 30), 0);
    const auto r5 = ev.evaluate(benchmark_params(BenchmarkSet::kSet5, 30), 0);
    const char* mid_env = std::getenv("PROBE_MID");  // "a3,ttt"
    double mid_a3 = 1.0, mid_ttt = 160.0;
    if (mid_env) std::sscanf(mid_env, "%lf,%lf", &mid_a3, &mid_ttt);
    const auto rm = ev.evaluate(HoParams::uniform(30, mid_a3, mid_ttt), 0);
    std::printf(
        "seed %d speed %.0f: set1 pp=%.3f hof=%.3f rlf=%.3f obj=%.3f nho=%ld | "
        "set5 pp=%.3f hof=%.3f rlf=%.3f obj=%.3f nho=%ld | "
        "mid(%.1f,%.0f) pp=%.3f rlf=%.3f obj=%.3f\n",
        seed, speed, r1.pp, r1.hof, r1.rlf, r1.objective, r1.total.n_ho, r5.pp,
        r5.hof, r5.rlf, r5.objective, r5.total.n_ho, mid_a3, mid_ttt, rm.pp,
        rm.rlf, rm.objective);
  }
  return 0;
}

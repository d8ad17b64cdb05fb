// Dev probe: PPO on the two-cell sanity corridor.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "core/ppo.hpp"

using namespace homove;

static Scenario corridor_scenario(double length_m) {
  // Cell 0 sits well behind the street start (the walk begins ~120 m out,
  // where the gap to cell 1 is ~10 dB), cell 1 just past the street end.
  Scenario sc;
  sc.deployment.area_x_m = length_m + 360.0;
  sc.deployment.area_y_m = 400.0;
  sc.deployment.cells = {
      CellConfig{0, Vec3{100.0, 190.0, 3.0}, 0.0, 0.0, 0.0},
      CellConfig{1, Vec3{length_m + 270.0, 210.0, 3.0}, 180.0, 0.0, 6.0},
  };
  sc.streets = {Street{0, {Vec2{240.0, 200.0}, Vec2{240.0 + length_m, 200.0}}, 1.5}};
  return sc;
}

int main(int argc, char** argv) {
  const int n_seeds = argc > 1 ? std::atoi(argv[1]) : 3;
  const long max_steps = argc > 2 ? std::atol(argv[2]) : 50000;
  const int rollout = argc > 3 ? std::atoi(argv[3]) : 2048;
  const double entropy = argc > 4 ? std::atof(argv[4]) : 0.002;
  const double lr = argc > 5 ? std::atof(argv[5]) : 1e-4;
  const double wpp = argc > 6 ? std::atof(argv[6]) : 9.0;
  const double wrlf = argc > 7 ? std::atof(argv[7]) : 1.0;
  const double speed = argc > 8 ? std::atof(argv[8]) : 30.0;
  const double length = argc > 9 ? std::atof(argv[9]) : 540.0;

  Scenario sc = corridor_scenario(length);
  Weights w{TradeOff::kPpRlf, wpp, 9.0, wrlf};
  Portfolio pf = make_portfolio(sc, {speed}, -1.0, 4, 42);
  PropagationParams prop;
  prop.shadow_std_db = 1.5;
  prop.jitter_std_db = 1.0;
  prop.exponent_nlos = prop.exponent_los;  // no LoS lottery in the sanity env
  PortfolioEvaluator ev(sc, pf, w, HoTimings{}, prop);

  ppo::Config cfg;
  cfg.max_env_steps = max_steps;
  cfg.rollout_steps = rollout;
  cfg.entropy_coeff = entropy;
  cfg.lr = lr;
  cfg.w_pp = wpp;
  cfg.w_rlf = wrlf;

  // Baselines.
  {
    ppo::MobilityEnv env(ev, cfg, 7);
    auto nets = ppo::PolicyValue::make(env.encoding(), 1);
    double stay = 0.0, aho = 0.0;
    const int eps = 10;
    {
      ppo::MobilityEnv e2(ev, cfg, 7);
      for (int k = 0; k < eps; ++k) {
        auto s = e2.reset();
        double r = 0.0;
        for (;;) {
          const auto st = e2.step(0);
          r += st.reward;
          if (st.done) break;
        }
        stay += r;
      }
      for (int k = 0; k < eps; ++k) {
        auto s = e2.reset();
        double r = 0.0;
        for (;;) {
          const auto st = e2.step(1);
          r += st.reward;
          if (st.done) break;
        }
        aho += r;
      }
    }
    std::printf("baselines: always-stay %.2f, always-ho %.2f (mean/episode)\n",
                stay / eps, aho / eps);
  }

  for (int seed = 0; seed < n_seeds; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    ppo::MobilityEnv env(ev, cfg, static_cast<std::uint64_t>(seed));
    auto nets = ppo::PolicyValue::make(env.encoding(),
                                       derive_seed(seed, {0xbe7}));
    const auto res = ppo::train(env, nets, cfg, static_cast<std::uint64_t>(seed));
    const auto t1 = std::chrono::steady_clock::now();

    ppo::MobilityEnv eval_env(ev, cfg, 999);
    const auto stats = ppo::evaluate_policy(eval_env, nets, 10);
    std::printf("seed %d: final eval reward %.3f, conv@%ld steps, %.0f s%s\n",
                seed, stats.mean_episode_reward,
                ppo::convergence_env_steps(res.curve),
                std::chrono::duration<double>(t1 - t0).count(),
                res.diverged ? " DIVERGED" : "");
    std::printf("  curve:");
    for (std::size_t i = 0; i < res.curve.size(); i += 2)
      std::printf(" %.1f", res.curve[i].mean_episode_reward);
    {
      ppo::MobilityEnv probe_env(ev, cfg, 554);
      for (int pe = 0; pe < 2; ++pe) {
        std::printf("  p(ho) ep%d:", pe);
        auto s = probe_env.reset();
        int k = 0;
        for (;;) {
          const auto lp = ppo::log_softmax(nets.policy->forward(s.transpose()));
          if (k % 5 == 0) std::printf(" %.2f", std::exp(lp(0, 1)));
          const auto st = probe_env.step(0);
          ++k;
          if (st.done) break;
          s = st.state;
        }
        std::printf("\n");
      }
      ppo::MobilityEnv eval2(ev, cfg, 999);
      std::printf("  eval episodes:");
      for (int e = 0; e < 10; ++e) {
        auto stats = ppo::evaluate_policy(eval2, nets, 1);
        std::printf(" %.1f", stats.mean_episode_reward);
      }
      std::printf("\n");
    }
  }
  return 0;
}

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "core/hostack.hpp"
#include "core/scenario.hpp"

namespace homove {

enum class TradeOff { kPpHof, kPpRlf };

struct Weights {
  TradeOff mode = TradeOff::kPpRlf;
  double w_pp = 1.0;
  double w_hof = 9.0;
  double w_rlf = 9.0;
};

// One slice of the evaluation mix: a street walked at a speed/altitude,
// with a weight in the aggregate objective.
struct PortfolioEntry {
  int street_id = 0;
  double speed_kmh = 3.0;
  double altitude_m = -1.0;  // < 0: use the street's own altitude
  double weight = 1.0;
};

struct Portfolio {
  std::vector<PortfolioEntry> entries;
  int episodes_per_entry = 4;
  std::vector<std::uint64_t> seeds;  // episode seed pool, rotated per call

  // Normalizes entry weights to sum 1 (throws if the sum is not positive)
  // and fills the seed pool from `root` if empty.
  void finalize(std::uint64_t root);
};

// Convenience: every street crossed with every speed, equal weights.
Portfolio make_portfolio(const Scenario& scenario,
                         const std::vector<double>& speeds_kmh,
                         double altitude_m, int episodes_per_entry,
                         std::uint64_t root);

// Weighted KPI trade-off objectives. Ratios are guarded: with no handover
// attempts both terms are zero; with no successful handovers the ping-pong
// term is zero.
double objective_pp_hof(const KpiCounters& counters, const Weights& w);
double objective_pp_rlf(const KpiCounters& counters, const Weights& w);
double objective_value(const KpiCounters& counters, const Weights& w);

double pp_rate(const KpiCounters& counters);
double hof_rate(const KpiCounters& counters);
double rlf_rate(const KpiCounters& counters);

enum class BenchmarkSet { kSet1, kSet5 };

// Uniform 3GPP benchmark vectors: set-1 = 480 ms / 3 dB (slow, ping-pong
// averse), set-5 = 40 ms / -1 dB (fast, failure averse).
HoParams benchmark_params(BenchmarkSet which, int n_cells);

struct EntryKpis {
  int street_id = 0;
  double speed_kmh = 0.0;
  double altitude_m = 0.0;
  double weight = 0.0;
  KpiCounters counters;
  double objective = 0.0;
  double pp = 0.0;
  double hof = 0.0;
  double rlf = 0.0;
};

struct EvalResult {
  double objective = 0.0;
  double pp = 0.0;
  double hof = 0.0;
  double rlf = 0.0;
  KpiCounters total;
  std::vector<EntryKpis> entries;
};

// Evaluates handover parameter vectors against a fixed scenario/portfolio.
// Radio traces are cached per (entry, seed-pool slot), so repeated
// evaluations (an optimizer loop) only re-run the handover state machine.
// evaluate() is deterministic in (params, eval_seed) and thread-safe.
class PortfolioEvaluator {
 public:
  PortfolioEvaluator(Scenario scenario, Portfolio portfolio, Weights weights,
                     HoTimings timings = {}, PropagationParams propagation = {});

  EvalResult evaluate(const HoParams& params, std::uint64_t eval_seed) const;

  // Raw episodes of one evaluation, for report/event dumps.
  std::vector<EpisodeResult> run_entry_episodes(const HoParams& params,
                                                int entry_index,
                                                std::uint64_t eval_seed) const;

  const Scenario& scenario() const { return scenario_; }
  const Portfolio& portfolio() const { return portfolio_; }
  const Weights& weights() const { return weights_; }
  const HoTimings& timings() const { return timings_; }
  const PropagationParams& propagation() const { return propagation_; }

  const RadioTrace& trace_for(int entry_index, int pool_index) const;

 private:
  std::uint64_t episode_pool_index(std::uint64_t eval_seed, int episode) const;

  Scenario scenario_;
  Portfolio portfolio_;
  Weights weights_;
  HoTimings timings_;
  PropagationParams propagation_;
  std::vector<Street> entry_streets_;  // altitude-resolved copies

  mutable std::mutex cache_mu_;
  mutable std::map<std::pair<int, int>, std::shared_ptr<RadioTrace>> cache_;
};

void aggregate_weighted(EvalResult& result);

}  // namespace homove

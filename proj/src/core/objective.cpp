#include "core/objective.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace homove {

void Portfolio::finalize(std::uint64_t root) {
  if (entries.empty()) throw ConfigError("portfolio has no entries");
  if (episodes_per_entry < 1)
    throw ConfigError("portfolio episodes_per_entry must be >= 1");
  double sum = 0.0;
  for (const PortfolioEntry& e : entries) {
    if (e.weight < 0.0) throw ConfigError("portfolio weights must be >= 0");
    sum += e.weight;
  }
  if (sum <= 0.0) throw ConfigError("portfolio weights sum to zero");
  for (PortfolioEntry& e : entries) e.weight /= sum;

  if (seeds.empty()) {
    const int pool = std::max(2 * episodes_per_entry, 8);
    seeds.reserve(static_cast<std::size_t>(pool));
    for (int i = 0; i < pool; ++i)
      seeds.push_back(derive_seed(root, {0x9f01u, static_cast<std::uint64_t>(i)}));
  }
}

Portfolio make_portfolio(const Scenario& scenario,
                         const std::vector<double>& speeds_kmh,
                         double altitude_m, int episodes_per_entry,
                         std::uint64_t root) {
  Portfolio pf;
  pf.episodes_per_entry = episodes_per_entry;
  for (const Street& st : scenario.streets)
    for (double v : speeds_kmh)
      pf.entries.push_back({st.street_id, v, altitude_m, 1.0});
  pf.finalize(root);
  return pf;
}

namespace {

double guarded_pp_ratio(const KpiCounters& c) {
  const long successes = c.n_ho - c.n_hof;
  return successes > 0 ? static_cast<double>(c.n_pp) / successes : 0.0;
}

double guarded_ratio(long num, long den) {
  return den > 0 ? static_cast<double>(num) / den : 0.0;
}

}  // namespace

double pp_rate(const KpiCounters& c) { return guarded_pp_ratio(c); }
double hof_rate(const KpiCounters& c) { return guarded_ratio(c.n_hof, c.n_ho); }
double rlf_rate(const KpiCounters& c) { return guarded_ratio(c.n_rlf, c.n_ho); }

double objective_pp_hof(const KpiCounters& c, const Weights& w) {
  return w.w_pp * guarded_pp_ratio(c) + w.w_hof * guarded_ratio(c.n_hof, c.n_ho);
}

double objective_pp_rlf(const KpiCounters& c, const Weights& w) {
  return w.w_pp * guarded_pp_ratio(c) + w.w_rlf * guarded_ratio(c.n_rlf, c.n_ho);
}

double objective_value(const KpiCounters& c, const Weights& w) {
  return w.mode == TradeOff::kPpHof ? objective_pp_hof(c, w)
                                    : objective_pp_rlf(c, w);
}

HoParams benchmark_params(BenchmarkSet which, int n_cells) {
  if (n_cells < 1) throw ConfigError("benchmark_params: n_cells must be >= 1");
  return which == BenchmarkSet::kSet1 ? HoParams::uniform(n_cells, 3.0, 480.0)
                                      : HoParams::uniform(n_cells, -1.0, 40.0);
}

PortfolioEvaluator::PortfolioEvaluator(Scenario scenario, Portfolio portfolio,
                                       Weights weights, HoTimings timings,
                                       PropagationParams propagation)
    : scenario_(std::move(scenario)),
      portfolio_(std::move(portfolio)),
      weights_(weights),
      timings_(timings),
      propagation_(propagation) {
  if (portfolio_.seeds.empty())
    throw ConfigError("portfolio not finalized (empty seed pool)");
  entry_streets_.reserve(portfolio_.entries.size());
  for (const PortfolioEntry& e : portfolio_.entries) {
    const auto it = std::find_if(
        scenario_.streets.begin(), scenario_.streets.end(),
        [&](const Street& s) { return s.street_id == e.street_id; });
    if (it == scenario_.streets.end())
      throw ConfigError("portfolio references unknown street_id " +
                        std::to_string(e.street_id));
    Street st = *it;
    if (e.altitude_m >= 0.0) st.altitude_m = e.altitude_m;
    entry_streets_.push_back(std::move(st));
  }
}

std::uint64_t PortfolioEvaluator::episode_pool_index(std::uint64_t eval_seed,
                                                     int episode) const {
  return (eval_seed + static_cast<std::uint64_t>(episode)) %
         portfolio_.seeds.size();
}

const RadioTrace& PortfolioEvaluator::trace_for(int entry_index,
                                                int pool_index) const {
  const auto key = std::make_pair(entry_index, pool_index);
  {
    std::lock_guard<std::mutex> lock(cache_mu_);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }

  const PortfolioEntry& entry =
      portfolio_.entries[static_cast<std::size_t>(entry_index)];
  const Street& street = entry_streets_[static_cast<std::size_t>(entry_index)];
  const std::uint64_t pool_seed =
      portfolio_.seeds[static_cast<std::size_t>(pool_index)];
  const Direction dir =
      pool_index % 2 == 0 ? Direction::kForward : Direction::kReverse;
  const Trajectory traj = sample_trajectory(
      street, entry.speed_kmh, timings_.tick_s, dir,
      derive_seed(pool_seed, {static_cast<std::uint64_t>(entry_index)}));
  auto trace = std::make_shared<RadioTrace>(
      build_radio_trace(scenario_.deployment, traj, propagation_));

  std::lock_guard<std::mutex> lock(cache_mu_);
  auto [it, inserted] = cache_.emplace(key, std::move(trace));
  (void)inserted;
  return *it->second;
}

std::vector<EpisodeResult> PortfolioEvaluator::run_entry_episodes(
    const HoParams& params, int entry_index, std::uint64_t eval_seed) const {
  params.validate(scenario_.deployment.n_cells());
  std::vector<EpisodeResult> episodes;
  episodes.reserve(static_cast<std::size_t>(portfolio_.episodes_per_entry));
  for (int k = 0; k < portfolio_.episodes_per_entry; ++k) {
    const int pool = static_cast<int>(episode_pool_index(eval_seed, k));
    episodes.push_back(run_episode_on_trace(
        scenario_.deployment, trace_for(entry_index, pool), params, timings_));
  }
  return episodes;
}

void aggregate_weighted(EvalResult& r) {
  r.objective = 0.0;
  r.pp = 0.0;
  r.hof = 0.0;
  r.rlf = 0.0;
  r.total = KpiCounters{};
  for (const EntryKpis& e : r.entries) {
    r.objective += e.weight * e.objective;
    r.pp += e.weight * e.pp;
    r.hof += e.weight * e.hof;
    r.rlf += e.weight * e.rlf;
    r.total.accumulate(e.counters);
  }
}

EvalResult PortfolioEvaluator::evaluate(const HoParams& params,
                                        std::uint64_t eval_seed) const {
  params.validate(scenario_.deployment.n_cells());

  EvalResult result;
  result.entries.resize(portfolio_.entries.size());
  for (std::size_t i = 0; i < portfolio_.entries.size(); ++i) {
    const PortfolioEntry& entry = portfolio_.entries[i];
    EntryKpis ek;
    ek.street_id = entry.street_id;
    ek.speed_kmh = entry.speed_kmh;
    ek.altitude_m = entry.altitude_m >= 0.0
                        ? entry.altitude_m
                        : entry_streets_[i].altitude_m;
    ek.weight = entry.weight;
    for (int k = 0; k < portfolio_.episodes_per_entry; ++k) {
      const int pool = static_cast<int>(episode_pool_index(eval_seed, k));
      const EpisodeResult ep = run_episode_on_trace(
          scenario_.deployment, trace_for(static_cast<int>(i), pool), params,
          timings_);
      ek.counters.accumulate(ep.counters);
    }
    ek.objective = objective_value(ek.counters, weights_);
    ek.pp = pp_rate(ek.counters);
    ek.hof = hof_rate(ek.counters);
    ek.rlf = rlf_rate(ek.counters);
    result.entries[i] = std::move(ek);
  }
  aggregate_weighted(result);
  return result;
}

}  // namespace homove

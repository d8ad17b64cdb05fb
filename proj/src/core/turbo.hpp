#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/gp.hpp"
#include "core/rng.hpp"

namespace homove::turbo {

// Trust-region geometry and the success/failure resize schedule.
struct TrustRegion {
  static constexpr int kSuccTolerance = 3;
  static constexpr int kFailTolerance = 15;
  static constexpr double kLengthInit = 0.8;
  static constexpr double kLengthMin = 1.0 / 128.0;  // 2^-7
  static constexpr double kLengthMax = 1.6;

  Eigen::VectorXd center;
  double length = kLengthInit;
  int succ_count = 0;
  int fail_count = 0;

  bool needs_restart() const { return length < kLengthMin; }
};

// Per-dimension side lengths: lambda_i * L / geomean(lambda), computed in
// the log domain. The product over dimensions equals L^d.
Eigen::VectorXd side_lengths(double length,
                             const Eigen::VectorXd& lengthscales);

// One success/failure update. A success zeroes the failure streak and vice
// versa; hitting a tolerance resizes and resets both streaks.
void resize(TrustRegion& tr, bool improved);

// Candidate pool inside the TR hyperrectangle (clipped to the unit box):
// quasi-random points with a per-dimension perturbation mask of probability
// min(20/d, 1); unperturbed coordinates copy the center.
Eigen::MatrixXd gen_candidates(const TrustRegion& tr, const gp::Model& model,
                               int n_candidates, std::uint64_t seed);

// Batched Thompson acquisition: one joint posterior draw per batch,
// minimizing the sampled objective; returns the index of the global winner
// (lowest index on ties).
int select_next(const gp::Model& model, const Eigen::MatrixXd& candidates,
                int batches, Rng& rng);

struct RunConfig {
  int dims = 0;
  int budget = 0;           // total objective evaluations
  int n_init = 0;           // 0: default 2*dims
  int n_candidates = 500;
  int batches = 10;
  int q = 1;                // evaluations per iteration
  int n_trust_regions = 1;  // >1: round-robin allocation (experimental)
  std::uint64_t seed = 0;

  // Surrogate maintenance.
  int max_fit_points = 120;
  int hyper_every = 5;      // full refresh cadence (iterations)
  int fit_restarts = 6;
  int fit_iterations = 60;
  int refit_iterations = 30;

  // Degenerate mode for testing: a fixed trust region spanning the whole
  // domain turns the loop into vanilla Thompson-sampling BO.
  bool resize_enabled = true;
  double init_length = TrustRegion::kLengthInit;

  int effective_n_init() const { return n_init > 0 ? n_init : 2 * dims; }
};

struct EvalOutcome {
  double value = 0.0;
  bool ok = true;
  std::string kpi_json;  // passthrough into the trace
};

using Objective =
    std::function<EvalOutcome(const Eigen::VectorXd& x, std::uint64_t seed)>;

struct TracePoint {
  int iteration = 0;       // global evaluation index
  double value = 0.0;      // observed (NaN when the evaluation failed)
  double best = 0.0;       // best observed so far
  Eigen::VectorXd x;
  std::string kpi_json;
  std::string note;        // "init", "restart_init", "eval_failed", ""
};

struct RunResult {
  gp::Dataset evaluated;           // every point this run evaluated
  Eigen::VectorXd best_x;
  double best_value = 0.0;
  std::vector<TracePoint> trace;
  int restarts = 0;
};

// Trust-region BO loop. `init_override` provides pre-evaluated observations
// (transfer learning); they condition the surrogate and the TR placement
// but consume no budget and do not count as observed bests.
RunResult run_bo(const Objective& objective, const RunConfig& config,
                 std::optional<gp::Dataset> init_override = std::nullopt);

// Transfer-learning initial dataset: round(fraction_target * n_o) most
// recent target observations plus source observations for the remainder.
gp::Dataset mix_init(const gp::Dataset& source, const gp::Dataset& target,
                     double fraction_target, int n_o);

}  // namespace homove::turbo

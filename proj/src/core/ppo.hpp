#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/hostack.hpp"
#include "core/objective.hpp"
#include "core/rng.hpp"

namespace homove::ppo {

// Fully-connected net with ReLU hidden layers and a linear head. Parameters
// live in one flat vector so the optimizer, checkpoints, and the
// finite-difference harness all see the same layout.
class Mlp {
 public:
  Mlp(std::vector<int> layer_sizes, std::uint64_t seed);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;  // rows = batch

  struct Cache {
    std::vector<Eigen::MatrixXd> acts;  // acts[0] = X, then post-ReLU
    std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer
  };
  Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& X, Cache& cache) const;

  // Accumulates parameter gradients for dLoss/dOutput; returns nothing
  // (input gradients are not needed).
  void backward(const Cache& cache, const Eigen::MatrixXd& d_out,
                Eigen::VectorXd& grad) const;

  const std::vector<int>& sizes() const { return sizes_; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }
  int param_count() const { return static_cast<int>(params_.size()); }

 private:
  friend class AdamTests;
  std::vector<int> sizes_;
  Eigen::VectorXd params_;
  std::vector<int> w_offsets_, b_offsets_;

  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
};

class Adam {
 public:
  Adam(int n_params, double lr);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);
  double lr() const { return lr_; }

 private:
  double lr_, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long t_ = 0;
  Eigen::VectorXd m_, v_;
};

struct Config {
  double gamma = 0.95;
  double clip = 0.2;
  double entropy_coeff = 0.002;
  double lr = 1e-4;
  int rollout_steps = 2048;
  int minibatch = 256;
  int epochs = 4;
  int history = 3;
  double w_pp = 9.0;
  double w_rlf = 1.0;
  long max_env_steps = 50000;
};

struct Encoding {
  int n_streets = 0;
  int n_cells = 0;
  int history = 3;

  int size() const {
    return n_streets + n_cells + 1 + n_cells + 1 + history * (n_cells + 1);
  }
  bool operator==(const Encoding&) const = default;
};

// Actor (stay/handover categorical) and critic pair.
struct PolicyValue {
  Encoding encoding;
  std::unique_ptr<Mlp> policy;
  std::unique_ptr<Mlp> value;

  static PolicyValue make(const Encoding& enc, std::uint64_t seed);
  PolicyValue clone() const;
};

// Log-softmax over the two logits, per row.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits);

// Mean squared error between value predictions and observed returns.
double value_loss(const Eigen::VectorXd& values, const Eigen::VectorXd& returns);

// Clipped-surrogate policy objective plus entropy bonus (to be maximized):
// mean(min(r*A, clip(r,1-tau,1+tau)*A)) + entropy_coeff * mean(entropy).
double policy_objective(const Eigen::VectorXd& logp_new,
                        const Eigen::VectorXd& logp_old,
                        const Eigen::VectorXd& advantages,
                        const Eigen::VectorXd& entropy, const Config& cfg);

struct Rollout {
  Eigen::MatrixXd states;
  Eigen::VectorXi actions;
  Eigen::VectorXd logp_old;
  Eigen::VectorXd rewards;
  std::vector<std::uint8_t> done;  // marks episode-final steps
  Eigen::VectorXd returns;
  Eigen::VectorXd advantages;

  int size() const { return static_cast<int>(actions.size()); }
};

// Episode-terminated discounted returns (no bootstrapping past done) and
// batch-normalized advantages G - V(s).
void compute_advantages(Rollout& rollout, const Eigen::VectorXd& values,
                        double gamma);

// Mobility environment: stay/handover decisions on the L3 grid against
// episodes drawn from a portfolio (entries and seed-pool slots cycled
// deterministically). Reward accumulates ping-pong and RLF events observed
// since the previous decision.
class MobilityEnv {
 public:
  MobilityEnv(const PortfolioEvaluator& evaluator, const Config& cfg,
              std::uint64_t seed);

  const Encoding& encoding() const { return encoding_; }

  Eigen::VectorXd reset();

  struct Step {
    Eigen::VectorXd state;
    double reward = 0.0;
    bool done = false;
    int pp_events = 0;
    int rlf_events = 0;
    int ho_events = 0;
    int hof_events = 0;
  };
  Step step(int action);

 private:
  Eigen::VectorXd encode() const;
  void push_history();
  bool start_episode();  // false when the trace ends before any decision

  const PortfolioEvaluator& evaluator_;
  Config cfg_;
  Encoding encoding_;
  long episode_counter_ = 0;
  std::unique_ptr<HoEpisode> episode_;
  HoEpisode::DecisionView last_view_;
  std::deque<std::pair<int, double>> history_;  // (serving, l3 dBm)
  int current_street_ = 0;
};

struct CurvePoint {
  long env_steps = 0;
  double mean_episode_reward = 0.0;
  double pp_rate = 0.0;
  double rlf_rate = 0.0;
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  long env_steps = 0;
  bool diverged = false;
  std::string divergence_note;
};

// PPO training; deterministic given (nets seed, env seed, train seed).
// Rollouts are whole episodes (collection stops at the episode boundary
// after rollout_steps decisions). Halts with diverged=true if the mean
// |ratio - 1| exceeds 10 after an update.
TrainResult train(MobilityEnv& env, PolicyValue& nets, const Config& cfg,
                  std::uint64_t seed);

// Copies pretrained parameters for continued training on a new scenario
// with identical encoding; throws on dimension mismatch.
PolicyValue warm_start(const PolicyValue& pretrained);

// Policy evaluation over n_episodes with actions sampled from the learned
// stochastic policy; returns accumulated KPI counters and mean episode
// reward. Deterministic given the seed.
struct EvalStats {
  KpiCounters counters;
  double mean_episode_reward = 0.0;
};
EvalStats evaluate_policy(MobilityEnv& env, const PolicyValue& nets,
                          int n_episodes, std::uint64_t seed = 0);

// Max relative error between analytic gradients (policy objective and value
// loss) and central finite differences with step h.
double gradient_check(const PolicyValue& nets, const Rollout& batch,
                      const Config& cfg, double h = 1e-5);

// First update whose trailing-5 mean reward is within 5% of the final
// plateau (relative to the improvement range, floored at 0.5 reward units);
// returns the env-step count at that update.
long convergence_env_steps(const std::vector<CurvePoint>& curve);

// Checkpoint round-trip (versioned JSON of layer shapes + parameters).
std::string nets_to_json(const PolicyValue& nets);
PolicyValue nets_from_json(const std::string& text);
void save_nets(const PolicyValue& nets, const std::string& path);
PolicyValue load_nets(const std::string& path);

}  // namespace homove::ppo

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>

#include "core/rng.hpp"

namespace homove::gp {

// Observations over the unit box: X rows are points in [0,1]^d, y holds the
// (noisy) objective values.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;

  int size() const { return static_cast<int>(X.rows()); }
  int dims() const { return static_cast<int>(X.cols()); }
  void append(const Eigen::VectorXd& x, double value);
  Dataset tail(int count) const;  // most recent `count` rows
};

// Matern-5/2 ARD hyperparameters plus a constant mean. Bounds apply in the
// standardized-observation space used by fit_hyper.
struct Hyper {
  Eigen::VectorXd lengthscales;  // per input dimension
  double signal_variance = 1.0;
  double noise_variance = 1e-2;
  double mean_const = 0.0;
};

constexpr double kLengthscaleMin = 0.005;
constexpr double kLengthscaleMax = 2.0;
constexpr double kSignalMin = 0.05;
constexpr double kSignalMax = 20.0;
constexpr double kNoiseMin = 1e-6;
constexpr double kNoiseMax = 0.2;

// Matern-5/2 with per-dimension lengthscales:
//   k(a,b) = s * (1 + sqrt(5) r + 5 r^2 / 3) * exp(-sqrt(5) r),
//   r^2 = sum_i ((a_i - b_i) / lambda_i)^2.
double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
              const Hyper& hyper);

// Exact GP regression model: a single Cholesky factorization of
// K(X) + noise*I backs both prediction and sampling; no explicit inverse.
class Model {
 public:
  // Empty model (prior only).
  explicit Model(Hyper hyper);

  // Fits (factorizes) on the dataset with the given hyperparameters.
  // Adds jitter starting at 1e-6 and doubling up to 3 times if the
  // factorization fails; throws std::runtime_error afterwards.
  static Model fit(Dataset data, Hyper hyper);

  // Posterior mean and variance at one query point. Negative variances
  // within numerical tolerance are clamped to zero.
  std::pair<double, double> posterior(const Eigen::VectorXd& x) const;

  // One draw from the joint posterior over the given candidate rows.
  Eigen::VectorXd sample_joint(const Eigen::MatrixXd& candidates,
                               Rng& rng) const;

  double log_marginal_likelihood() const { return lml_; }
  const Hyper& hyper() const { return hyper_; }
  const Dataset& data() const { return data_; }
  bool empty() const { return data_.size() == 0; }

 private:
  Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& q) const;

  Hyper hyper_;
  Dataset data_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;  // K~^-1 (y - mean)
  double lml_ = 0.0;
};

// Maximizes the log marginal likelihood over log-hyperparameters with a
// multi-start projected quasi-Newton search (deterministic given `seed`).
// Observations are standardized internally; the returned hyperparameters
// are de-standardized so Model::fit(data, hyper) reproduces the fit, with
// mean_const equal to the sample mean of y.
Hyper fit_hyper(const Dataset& data, std::uint64_t seed, int restarts = 8,
                int max_iterations = 80);

// Warm-started refinement around a previous solution (cheaper in-loop
// refit; one extra random restart).
Hyper refit_hyper(const Dataset& data, const Hyper& warm, std::uint64_t seed,
                  int max_iterations = 40);

// Dataset checkpoint (transfer-learning exchange format).
struct DatasetBounds {
  double a3_min_db = -1.0;
  double a3_max_db = 3.0;
  double ttt_min_ms = 40.0;
  double ttt_max_ms = 480.0;
  int n_cells = 0;
  bool one_threshold = false;
};

std::string dataset_to_json(const Dataset& data, const DatasetBounds& bounds);
std::pair<Dataset, DatasetBounds> dataset_from_json(const std::string& text);
void save_dataset(const Dataset& data, const DatasetBounds& bounds,
                  const std::string& path);
std::pair<Dataset, DatasetBounds> load_dataset(const std::string& path);

}  // namespace homove::gp

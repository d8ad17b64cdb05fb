#include "core/gp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "core/errors.hpp"

namespace homove::gp {

using nlohmann::json;

namespace {
constexpr double kSqrt5 = 2.2360679774997896;
}

void Dataset::append(const Eigen::VectorXd& x, double value) {
  const int n = size();
  const int d = n == 0 ? static_cast<int>(x.size()) : dims();
  Eigen::MatrixXd nx(n + 1, d);
  if (n > 0) nx.topRows(n) = X;
  nx.row(n) = x.transpose();
  X = std::move(nx);
  y.conservativeResize(n + 1);
  y[n] = value;
}

Dataset Dataset::tail(int count) const {
  const int n = size();
  const int take = std::min(count, n);
  Dataset out;
  out.X = X.bottomRows(take);
  out.y = y.tail(take);
  return out;
}

double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
              const Hyper& hyper) {
  if (a.size() != b.size() || a.size() != hyper.lengthscales.size())
    throw std::invalid_argument("kernel: dimension mismatch");
  double r2 = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    const double u = (a[i] - b[i]) / hyper.lengthscales[i];
    r2 += u * u;
  }
  const double r = std::sqrt(r2);
  return hyper.signal_variance * (1.0 + kSqrt5 * r + 5.0 * r2 / 3.0) *
         std::exp(-kSqrt5 * r);
}

namespace {

// Noise-free kernel matrix between row sets A (n x d) and B (m x d).
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B, const Hyper& hyper) {
  const Eigen::VectorXd inv_l = hyper.lengthscales.cwiseInverse();
  Eigen::MatrixXd As = A * inv_l.asDiagonal();
  Eigen::MatrixXd Bs = B * inv_l.asDiagonal();
  Eigen::MatrixXd r2 = (-2.0 * As * Bs.transpose());
  r2.colwise() += As.rowwise().squaredNorm();
  r2.rowwise() += Bs.rowwise().squaredNorm().transpose();
  r2 = r2.cwiseMax(0.0);
  const Eigen::MatrixXd r = r2.cwiseSqrt();
  return hyper.signal_variance *
         ((1.0 + kSqrt5 * r.array() + (5.0 / 3.0) * r2.array()) *
          (-kSqrt5 * r.array()).exp())
             .matrix();
}

Eigen::LLT<Eigen::MatrixXd> factorize_with_jitter(Eigen::MatrixXd K) {
  if (!K.allFinite())
    throw std::invalid_argument("GP covariance has non-finite entries");
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() == Eigen::Success) return llt;
  double jitter = 1e-6;
  for (int attempt = 0; attempt < 4; ++attempt) {  // 1e-6 then 3 doublings
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    llt.compute(Kj);
    if (llt.info() == Eigen::Success) return llt;
    jitter *= 2.0;
  }
  throw std::runtime_error("GP covariance not positive definite after jitter");
}

}  // namespace

Model::Model(Hyper hyper) : hyper_(std::move(hyper)) {}

Model Model::fit(Dataset data, Hyper hyper) {
  if (data.size() == 0) return Model(std::move(hyper));
  if (!data.X.allFinite() || !data.y.allFinite())
    throw std::invalid_argument("GP dataset has non-finite entries");
  Model m(hyper);
  m.data_ = std::move(data);
  Eigen::MatrixXd K = kernel_matrix(m.data_.X, m.data_.X, m.hyper_);
  K.diagonal().array() += m.hyper_.noise_variance;
  m.chol_ = factorize_with_jitter(std::move(K));
  const Eigen::VectorXd centered =
      m.data_.y.array() - m.hyper_.mean_const;
  m.alpha_ = m.chol_.solve(centered);

  const int n = m.data_.size();
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(m.chol_.matrixLLT()(i, i));
  m.lml_ = -0.5 * centered.dot(m.alpha_) - 0.5 * logdet -
           0.5 * n * std::log(2.0 * M_PI);
  return m;
}

Eigen::MatrixXd Model::cross_covariance(const Eigen::MatrixXd& q) const {
  return kernel_matrix(data_.X, q, hyper_);
}

std::pair<double, double> Model::posterior(const Eigen::VectorXd& x) const {
  const double prior_var = hyper_.signal_variance;
  if (empty()) return {hyper_.mean_const, prior_var};
  const Eigen::MatrixXd kx =
      cross_covariance(Eigen::MatrixXd(x.transpose()));  // n x 1
  const double mean = hyper_.mean_const + kx.col(0).dot(alpha_);
  const Eigen::VectorXd v = chol_.matrixL().solve(kx.col(0));
  double var = prior_var - v.squaredNorm();
  if (var < 0.0) {
    if (var < -1e-10 * std::max(1.0, prior_var))
      throw std::runtime_error("GP posterior variance strongly negative");
    var = 0.0;
  }
  return {mean, var};
}

Eigen::VectorXd Model::sample_joint(const Eigen::MatrixXd& candidates,
                                    Rng& rng) const {
  const int m = static_cast<int>(candidates.rows());
  if (m < 1) throw std::invalid_argument("sample_joint: no candidates");

  Eigen::VectorXd mean = Eigen::VectorXd::Constant(m, hyper_.mean_const);
  Eigen::MatrixXd cov = kernel_matrix(candidates, candidates, hyper_);
  if (!empty()) {
    const Eigen::MatrixXd kx = cross_covariance(candidates);  // n x m
    mean += kx.transpose() * alpha_;
    const Eigen::MatrixXd v = chol_.matrixL().solve(kx);
    cov -= v.transpose() * v;
  }

  Eigen::VectorXd z(m);
  for (int i = 0; i < m; ++i) z[i] = rng.normal();

  const double scale = std::max(cov.diagonal().maxCoeff(), 1e-12);
  double jitter = 1e-12 * scale;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd cj = cov;
    cj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(cj);
    if (llt.info() == Eigen::Success)
      return mean + Eigen::MatrixXd(llt.matrixL()) * z;
    jitter *= 100.0;
  }
  throw std::runtime_error("sample_joint: covariance not factorizable");
}

// ---------------------------------------------------------------------------
// Marginal-likelihood fitting
// ---------------------------------------------------------------------------

namespace {

struct LmlProblem {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;  // standardized, zero-mean target
  std::vector<Eigen::MatrixXd> sqdiff;  // per-dim squared differences

  explicit LmlProblem(const Eigen::MatrixXd& X_in, const Eigen::VectorXd& y_in)
      : X(X_in), y(y_in) {
    const int d = static_cast<int>(X.cols());
    sqdiff.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      const Eigen::VectorXd c = X.col(i);
      Eigen::MatrixXd diff = c.replicate(1, X.rows()) -
                             c.transpose().replicate(X.rows(), 1);
      sqdiff.push_back(diff.cwiseAbs2());
    }
  }

  int dims() const { return static_cast<int>(X.cols()); }
  int theta_size() const { return dims() + 2; }

  // theta: [log lengthscales..., log signal, log noise]. Returns the log
  // marginal likelihood; fills grad when non-null.
  double eval(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
    const int n = static_cast<int>(X.rows());
    const int d = dims();
    const double signal = std::exp(theta[d]);
    const double noise = std::exp(theta[d + 1]);

    Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < d; ++i)
      r2 += sqdiff[static_cast<std::size_t>(i)] *
            std::exp(-2.0 * theta[i]);
    const Eigen::ArrayXXd r = r2.array().max(0.0).sqrt();
    const Eigen::ArrayXXd e = (-kSqrt5 * r).exp();
    const Eigen::MatrixXd Knf =
        (signal * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r2.array()) * e).matrix();

    Eigen::MatrixXd K = Knf;
    K.diagonal().array() += noise;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) {
      if (grad) grad->setZero(theta_size());
      return -std::numeric_limits<double>::infinity();
    }
    const Eigen::VectorXd alpha = llt.solve(y);
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i));
    const double lml =
        -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * n * std::log(2.0 * M_PI);

    if (grad) {
      grad->resize(theta_size());
      const Eigen::MatrixXd Kinv =
          llt.solve(Eigen::MatrixXd::Identity(n, n));
      const Eigen::MatrixXd M = alpha * alpha.transpose() - Kinv;
      (*grad)[d] = 0.5 * M.cwiseProduct(Knf).sum();
      (*grad)[d + 1] = 0.5 * noise * M.trace();
      const Eigen::MatrixXd T =
          M.cwiseProduct(((5.0 / 3.0) * signal * (1.0 + kSqrt5 * r) * e).matrix());
      for (int i = 0; i < d; ++i)
        (*grad)[i] = 0.5 * std::exp(-2.0 * theta[i]) *
                     T.cwiseProduct(sqdiff[static_cast<std::size_t>(i)]).sum();
    }
    return lml;
  }
};

struct Box {
  Eigen::VectorXd lo, hi;
  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lo).cwiseMin(hi);
  }
};

Box hyper_box(int dims) {
  Box b;
  b.lo.resize(dims + 2);
  b.hi.resize(dims + 2);
  for (int i = 0; i < dims; ++i) {
    b.lo[i] = std::log(kLengthscaleMin);
    b.hi[i] = std::log(kLengthscaleMax);
  }
  b.lo[dims] = std::log(kSignalMin);
  b.hi[dims] = std::log(kSignalMax);
  b.lo[dims + 1] = std::log(kNoiseMin);
  b.hi[dims + 1] = std::log(kNoiseMax);
  return b;
}

// Projected L-BFGS ascent on the LML. History is dropped whenever a step is
// clipped by the box, falling back to projected gradient steps.
double maximize_lml(const LmlProblem& problem, const Box& box,
                    Eigen::VectorXd& theta, int max_iterations) {
  constexpr int kHistory = 8;
  theta = box.clamp(theta);
  Eigen::VectorXd grad(problem.theta_size());
  double f = problem.eval(theta, &grad);
  if (!std::isfinite(f)) return f;

  std::vector<Eigen::VectorXd> s_hist, y_hist;
  std::vector<double> rho_hist;

  for (int it = 0; it < max_iterations; ++it) {
    // Projected gradient for the convergence check.
    Eigen::VectorXd pg = grad;
    for (int i = 0; i < theta.size(); ++i) {
      if (theta[i] <= box.lo[i] + 1e-12 && grad[i] < 0.0) pg[i] = 0.0;
      if (theta[i] >= box.hi[i] - 1e-12 && grad[i] > 0.0) pg[i] = 0.0;
    }
    if (pg.lpNorm<Eigen::Infinity>() < 1e-5) break;

    // Two-loop recursion on the ascent direction.
    Eigen::VectorXd dir = grad;
    const int h = static_cast<int>(s_hist.size());
    std::vector<double> a_coef(static_cast<std::size_t>(h));
    for (int i = h - 1; i >= 0; --i) {
      a_coef[static_cast<std::size_t>(i)] =
          rho_hist[static_cast<std::size_t>(i)] *
          s_hist[static_cast<std::size_t>(i)].dot(dir);
      dir -= a_coef[static_cast<std::size_t>(i)] *
             y_hist[static_cast<std::size_t>(i)];
    }
    if (h > 0) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      dir *= std::max(gamma, 1e-8);
    } else {
      dir *= 1.0 / std::max(1.0, grad.lpNorm<Eigen::Infinity>());
    }
    for (int i = 0; i < h; ++i) {
      const double b = rho_hist[static_cast<std::size_t>(i)] *
                       y_hist[static_cast<std::size_t>(i)].dot(dir);
      dir += (a_coef[static_cast<std::size_t>(i)] - b) *
             s_hist[static_cast<std::size_t>(i)];
    }
    if (dir.dot(grad) <= 0.0) {
      dir = grad / std::max(1.0, grad.lpNorm<Eigen::Infinity>());
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // Backtracking line search with projection.
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd theta_new, grad_new(problem.theta_size());
    double f_new = f;
    for (int ls = 0; ls < 24; ++ls) {
      theta_new = box.clamp(theta + step * dir);
      const Eigen::VectorXd delta = theta_new - theta;
      if (delta.lpNorm<Eigen::Infinity>() < 1e-14) break;
      f_new = problem.eval(theta_new, &grad_new);
      if (std::isfinite(f_new) && f_new >= f + 1e-4 * grad.dot(delta)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = theta_new - theta;
    const Eigen::VectorXd yv = grad - grad_new;  // ascent curvature pair
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      if (static_cast<int>(s_hist.size()) == kHistory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
    }
    theta = theta_new;
    grad = grad_new;
    f = f_new;
  }
  return f;
}

Hyper theta_to_hyper(const Eigen::VectorXd& theta, int dims) {
  Hyper h;
  h.lengthscales = theta.head(dims).array().exp();
  h.signal_variance = std::exp(theta[dims]);
  h.noise_variance = std::exp(theta[dims + 1]);
  h.mean_const = 0.0;
  return h;
}

}  // namespace

Hyper fit_hyper(const Dataset& data, std::uint64_t seed, int restarts,
                int max_iterations) {
  if (data.size() < 2)
    throw std::invalid_argument("fit_hyper needs at least 2 observations");
  const int d = data.dims();

  const double y_mean = data.y.mean();
  double y_std = std::sqrt(
      (data.y.array() - y_mean).square().sum() / data.size());
  const bool degenerate_y = y_std < 1e-12;
  if (degenerate_y) y_std = 1.0;
  const Eigen::VectorXd ys = (data.y.array() - y_mean) / y_std;

  LmlProblem problem(data.X, ys);
  const Box box = hyper_box(d);
  Rng rng(seed);

  Eigen::VectorXd best_theta;
  double best_f = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd theta(d + 2);
    if (r == 0) {
      theta.head(d).setConstant(std::log(0.5));
      theta[d] = std::log(1.0);
      theta[d + 1] = std::log(0.01);
    } else {
      for (int i = 0; i < d; ++i)
        theta[i] = rng.uniform(std::log(0.05), std::log(kLengthscaleMax));
      theta[d] = rng.uniform(std::log(0.2), std::log(5.0));
      theta[d + 1] = rng.uniform(std::log(1e-4), std::log(kNoiseMax));
    }
    const double f = maximize_lml(problem, box, theta, max_iterations);
    if (std::isfinite(f) && f > best_f) {
      best_f = f;
      best_theta = theta;
    }
  }

  Hyper hyper;
  if (!std::isfinite(best_f)) {
    // Fallback when every restart failed to factorize.
    hyper.lengthscales = Eigen::VectorXd::Constant(d, 0.5);
    hyper.signal_variance = 1.0;
    hyper.noise_variance = 0.01;
  } else {
    hyper = theta_to_hyper(best_theta, d);
  }
  hyper.signal_variance *= y_std * y_std;
  hyper.noise_variance *= y_std * y_std;
  hyper.mean_const = y_mean;
  return hyper;
}

Hyper refit_hyper(const Dataset& data, const Hyper& warm, std::uint64_t seed,
                  int max_iterations) {
  if (data.size() < 2)
    throw std::invalid_argument("refit_hyper needs at least 2 observations");
  const int d = data.dims();

  const double y_mean = data.y.mean();
  double y_std = std::sqrt(
      (data.y.array() - y_mean).square().sum() / data.size());
  if (y_std < 1e-12) y_std = 1.0;
  const Eigen::VectorXd ys = (data.y.array() - y_mean) / y_std;

  LmlProblem problem(data.X, ys);
  const Box box = hyper_box(d);
  Rng rng(seed);

  Eigen::VectorXd theta(d + 2);
  for (int i = 0; i < d; ++i)
    theta[i] = std::log(std::clamp(warm.lengthscales[i], kLengthscaleMin,
                                   kLengthscaleMax));
  theta[d] = std::log(std::clamp(warm.signal_variance / (y_std * y_std),
                                 kSignalMin, kSignalMax));
  theta[d + 1] = std::log(std::clamp(warm.noise_variance / (y_std * y_std),
                                     kNoiseMin, kNoiseMax));
  double best_f = maximize_lml(problem, box, theta, max_iterations);
  Eigen::VectorXd best_theta = theta;

  Eigen::VectorXd alt(d + 2);
  for (int i = 0; i < d; ++i)
    alt[i] = rng.uniform(std::log(0.05), std::log(kLengthscaleMax));
  alt[d] = rng.uniform(std::log(0.2), std::log(5.0));
  alt[d + 1] = rng.uniform(std::log(1e-4), std::log(kNoiseMax));
  const double f_alt = maximize_lml(problem, box, alt, max_iterations);
  if (std::isfinite(f_alt) && f_alt > best_f) {
    best_f = f_alt;
    best_theta = alt;
  }

  Hyper hyper = std::isfinite(best_f) ? theta_to_hyper(best_theta, d)
                                      : Hyper{Eigen::VectorXd::Constant(d, 0.5),
                                              1.0, 0.01, 0.0};
  hyper.signal_variance *= y_std * y_std;
  hyper.noise_variance *= y_std * y_std;
  hyper.mean_const = y_mean;
  return hyper;
}

// ---------------------------------------------------------------------------
// Checkpoint format
// ---------------------------------------------------------------------------

std::string dataset_to_json(const Dataset& data, const DatasetBounds& bounds) {
  json j;
  j["schema"] = 1;
  j["bounds"] = {{"a3_db", {bounds.a3_min_db, bounds.a3_max_db}},
                 {"ttt_ms", {bounds.ttt_min_ms, bounds.ttt_max_ms}},
                 {"n_cells", bounds.n_cells},
                 {"one_threshold", bounds.one_threshold}};
  j["X"] = json::array();
  for (int r = 0; r < data.size(); ++r) {
    json row = json::array();
    for (int c = 0; c < data.dims(); ++c) row.push_back(data.X(r, c));
    j["X"].push_back(std::move(row));
  }
  j["y"] = json::array();
  for (int r = 0; r < data.size(); ++r) j["y"].push_back(data.y[r]);
  return j.dump(2) + "\n";
}

std::pair<Dataset, DatasetBounds> dataset_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dataset file: invalid JSON: ") + e.what());
  }
  if (j.value("schema", 0) != 1)
    throw ConfigError("dataset file: missing or unsupported schema");
  DatasetBounds b;
  const json& jb = j.at("bounds");
  b.a3_min_db = jb.at("a3_db").at(0).get<double>();
  b.a3_max_db = jb.at("a3_db").at(1).get<double>();
  b.ttt_min_ms = jb.at("ttt_ms").at(0).get<double>();
  b.ttt_max_ms = jb.at("ttt_ms").at(1).get<double>();
  b.n_cells = jb.value("n_cells", 0);
  b.one_threshold = jb.value("one_threshold", false);

  const json& jx = j.at("X");
  const json& jy = j.at("y");
  if (jx.size() != jy.size())
    throw ConfigError("dataset file: X and y sizes differ");
  Dataset d;
  if (!jx.empty()) {
    const int n = static_cast<int>(jx.size());
    const int dim = static_cast<int>(jx.at(0).size());
    d.X.resize(n, dim);
    d.y.resize(n);
    for (int r = 0; r < n; ++r) {
      if (static_cast<int>(jx.at(static_cast<std::size_t>(r)).size()) != dim)
        throw ConfigError("dataset file: ragged X rows");
      for (int c = 0; c < dim; ++c)
        d.X(r, c) = jx.at(static_cast<std::size_t>(r))
                        .at(static_cast<std::size_t>(c))
                        .get<double>();
      d.y[r] = jy.at(static_cast<std::size_t>(r)).get<double>();
    }
  }
  return {std::move(d), b};
}

void save_dataset(const Dataset& data, const DatasetBounds& bounds,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset: " + path);
  out << dataset_to_json(data, bounds);
}

std::pair<Dataset, DatasetBounds> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return dataset_from_json(ss.str());
}

}  // namespace homove::gp

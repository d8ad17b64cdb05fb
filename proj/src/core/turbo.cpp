#include "core/turbo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "core/quasirandom.hpp"

namespace homove::turbo {

Eigen::VectorXd side_lengths(double length,
                             const Eigen::VectorXd& lengthscales) {
  if ((lengthscales.array() <= 0.0).any())
    throw std::invalid_argument("side_lengths: lengthscales must be > 0");
  const Eigen::ArrayXd logl = lengthscales.array().log();
  const double mean_log = logl.mean();
  return ((logl - mean_log) + std::log(length)).exp().matrix();
}

void resize(TrustRegion& tr, bool improved) {
  if (improved) {
    ++tr.succ_count;
    tr.fail_count = 0;
    if (tr.succ_count >= TrustRegion::kSuccTolerance) {
      tr.length = std::min(2.0 * tr.length, TrustRegion::kLengthMax);
      tr.succ_count = 0;
      tr.fail_count = 0;
    }
  } else {
    ++tr.fail_count;
    tr.succ_count = 0;
    if (tr.fail_count >= TrustRegion::kFailTolerance) {
      tr.length /= 2.0;
      tr.succ_count = 0;
      tr.fail_count = 0;
    }
  }
}

Eigen::MatrixXd gen_candidates(const TrustRegion& tr, const gp::Model& model,
                               int n_candidates, std::uint64_t seed) {
  const int d = static_cast<int>(tr.center.size());
  const Eigen::VectorXd widths =
      side_lengths(tr.length, model.hyper().lengthscales);
  Eigen::VectorXd lo = (tr.center - 0.5 * widths).cwiseMax(0.0);
  Eigen::VectorXd hi = (tr.center + 0.5 * widths).cwiseMin(1.0);

  HaltonSampler sampler(d, derive_seed(seed, {0xca9d}));
  Rng mask_rng(derive_seed(seed, {0x3a5c}));
  const double p_perturb = std::min(20.0 / d, 1.0);

  Eigen::MatrixXd cands(n_candidates, d);
  for (int c = 0; c < n_candidates; ++c) {
    const Eigen::VectorXd u = sampler.next();
    int n_perturbed = 0;
    for (int i = 0; i < d; ++i) {
      if (mask_rng.uniform() < p_perturb) {
        cands(c, i) = lo[i] + u[i] * (hi[i] - lo[i]);
        ++n_perturbed;
      } else {
        cands(c, i) = tr.center[i];
      }
    }
    if (n_perturbed == 0) {
      const int i = mask_rng.uniform_int(d);
      cands(c, i) = lo[i] + u[i] * (hi[i] - lo[i]);
    }
  }
  return cands;
}

int select_next(const gp::Model& model, const Eigen::MatrixXd& candidates,
                int batches, Rng& rng) {
  const int n = static_cast<int>(candidates.rows());
  if (n < 1) throw std::invalid_argument("select_next: no candidates");
  batches = std::max(1, std::min(batches, n));
  const int per_batch = n / batches;

  int best_index = -1;
  double best_sample = std::numeric_limits<double>::infinity();
  for (int b = 0; b < batches; ++b) {
    const int start = b * per_batch;
    const int count = b == batches - 1 ? n - start : per_batch;
    const Eigen::VectorXd draw =
        model.sample_joint(candidates.middleRows(start, count), rng);
    for (int i = 0; i < count; ++i) {
      if (draw[i] < best_sample) {
        best_sample = draw[i];
        best_index = start + i;
      }
    }
  }
  return best_index;
}

namespace {

struct TrState {
  TrustRegion tr;
  gp::Dataset local;      // observations since this TR was (re)started
  gp::Hyper hyper;
  bool hyper_valid = false;
  int iters_since_fit = 0;
  double incumbent = std::numeric_limits<double>::infinity();
  Eigen::VectorXd incumbent_x;

  void reset(int dims, double init_length) {
    tr = TrustRegion{};
    tr.length = init_length;
    tr.center = Eigen::VectorXd::Constant(dims, 0.5);
    local = gp::Dataset{};
    hyper_valid = false;
    iters_since_fit = 0;
    incumbent = std::numeric_limits<double>::infinity();
  }

  void absorb(const Eigen::VectorXd& x, double value) {
    local.append(x, value);
    if (value < incumbent) {
      incumbent = value;
      incumbent_x = x;
      tr.center = x;
    }
  }
};

// Observations inside the isotropic TR box; falls back to the whole local
// set when fewer than dims/2 are inside, then caps at the most recent
// max_fit_points (keeping the incumbent).
gp::Dataset tr_fit_subset(const TrState& st, int dims, int max_fit_points) {
  const double half = 0.5 * st.tr.length + 1e-12;
  std::vector<int> inside;
  for (int i = 0; i < st.local.size(); ++i) {
    if (((st.local.X.row(i).transpose() - st.tr.center).cwiseAbs().array() <=
         half)
            .all())
      inside.push_back(i);
  }
  std::vector<int> chosen;
  if (static_cast<int>(inside.size()) >= (dims + 1) / 2) {
    chosen = inside;
  } else {
    chosen.resize(static_cast<std::size_t>(st.local.size()));
    for (int i = 0; i < st.local.size(); ++i)
      chosen[static_cast<std::size_t>(i)] = i;
  }
  if (static_cast<int>(chosen.size()) > max_fit_points)
    chosen.erase(chosen.begin(),
                 chosen.end() - max_fit_points);  // keep most recent

  gp::Dataset out;
  out.X.resize(static_cast<int>(chosen.size()), st.local.dims());
  out.y.resize(static_cast<int>(chosen.size()));
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    out.X.row(static_cast<int>(i)) = st.local.X.row(chosen[i]);
    out.y[static_cast<int>(i)] = st.local.y[chosen[i]];
  }
  return out;
}

}  // namespace

RunResult run_bo(const Objective& objective, const RunConfig& config,
                 std::optional<gp::Dataset> init_override) {
  if (config.dims < 1) throw std::invalid_argument("run_bo: dims must be >= 1");
  if (config.budget < 1)
    throw std::invalid_argument("run_bo: budget must be >= 1");
  const int d = config.dims;
  const int m = std::max(1, config.n_trust_regions);

  RunResult result;
  result.best_value = std::numeric_limits<double>::infinity();
  int evals = 0;

  std::vector<TrState> regions(static_cast<std::size_t>(m));
  for (auto& st : regions) st.reset(d, config.init_length);

  auto evaluate_point = [&](const Eigen::VectorXd& x, TrState& st,
                            const char* note) -> bool {
    const EvalOutcome out =
        objective(x, static_cast<std::uint64_t>(evals));
    TracePoint tp;
    tp.iteration = evals;
    tp.x = x;
    tp.note = note;
    ++evals;
    if (!out.ok) {
      tp.value = std::numeric_limits<double>::quiet_NaN();
      tp.best = result.best_value;
      tp.note = "eval_failed";
      result.trace.push_back(std::move(tp));
      return false;
    }
    st.absorb(x, out.value);
    result.evaluated.append(x, out.value);
    if (out.value < result.best_value) {
      result.best_value = out.value;
      result.best_x = x;
    }
    tp.value = out.value;
    tp.best = result.best_value;
    tp.kpi_json = out.kpi_json;
    result.trace.push_back(std::move(tp));
    return true;
  };

  auto seed_init_design = [&](TrState& st, const char* note,
                              std::uint64_t salt) {
    const int count = std::min(config.effective_n_init(),
                               config.budget - evals);
    if (count <= 0) return;
    const Eigen::MatrixXd pts = latin_hypercube(
        count, d, derive_seed(config.seed, {0x111d, salt}));
    for (int i = 0; i < count && evals < config.budget; ++i)
      evaluate_point(pts.row(i).transpose(), st, note);
  };

  if (init_override) {
    if (init_override->dims() != d)
      throw std::invalid_argument("run_bo: init dataset dimension mismatch");
    for (int i = 0; i < init_override->size(); ++i)
      regions[0].absorb(init_override->X.row(i).transpose(),
                        init_override->y[i]);
    for (int l = 1; l < m; ++l)
      for (int i = 0; i < init_override->size(); ++i)
        regions[static_cast<std::size_t>(l)].absorb(
            init_override->X.row(i).transpose(), init_override->y[i]);
  } else {
    for (int l = 0; l < m && evals < config.budget; ++l)
      seed_init_design(regions[static_cast<std::size_t>(l)], "init",
                       static_cast<std::uint64_t>(l));
  }

  Rng thompson_rng(derive_seed(config.seed, {0x7505}));
  long iteration = 0;
  while (evals < config.budget) {
    TrState& st = regions[static_cast<std::size_t>(iteration % m)];
    ++iteration;

    if (st.local.size() < 2) {
      // Not enough data to model; fall back to exploration.
      seed_init_design(st, "restart_init", 0x9000 + iteration);
      if (st.local.size() < 2) break;
      continue;
    }

    const gp::Dataset subset = tr_fit_subset(st, d, config.max_fit_points);
    const std::uint64_t fit_seed =
        derive_seed(config.seed, {0xf17, static_cast<std::uint64_t>(iteration)});
    if (!st.hyper_valid) {
      st.hyper = gp::fit_hyper(subset, fit_seed, config.fit_restarts,
                               config.fit_iterations);
      st.hyper_valid = true;
      st.iters_since_fit = 0;
    } else if (++st.iters_since_fit >= config.hyper_every) {
      st.hyper = gp::refit_hyper(subset, st.hyper, fit_seed,
                                 config.refit_iterations);
      st.iters_since_fit = 0;
    }
    const gp::Model model = gp::Model::fit(subset, st.hyper);

    Eigen::MatrixXd candidates = gen_candidates(
        st.tr, model, config.n_candidates,
        derive_seed(config.seed, {0xca4d, static_cast<std::uint64_t>(iteration)}));

    const int q = std::max(1, config.q);
    for (int k = 0; k < q && evals < config.budget; ++k) {
      const int pick =
          select_next(model, candidates, config.batches, thompson_rng);
      const Eigen::VectorXd x = candidates.row(pick).transpose();

      const double incumbent_before = st.incumbent;
      const bool ok = evaluate_point(x, st, "");
      bool improved = false;
      if (ok) {
        const double latest = st.local.y[st.local.size() - 1];
        improved = latest < incumbent_before -
                                (1e-3 * std::abs(incumbent_before) + 1e-6);
      }
      if (config.resize_enabled) {
        resize(st.tr, improved);
        if (st.tr.needs_restart()) {
          ++result.restarts;
          st.reset(d, config.init_length);
          seed_init_design(st, "restart_init",
                           0xa000 + static_cast<std::uint64_t>(iteration));
          break;
        }
      }
    }
  }

  return result;
}

gp::Dataset mix_init(const gp::Dataset& source, const gp::Dataset& target,
                     double fraction_target, int n_o) {
  if (source.size() > 0 && target.size() > 0 && source.dims() != target.dims())
    throw std::invalid_argument("mix_init: dataset dimensions differ");
  const int n_target =
      static_cast<int>(std::lround(fraction_target * n_o));
  const int n_source = n_o - n_target;
  if (target.size() < n_target)
    throw std::invalid_argument("mix_init: target dataset too small");
  if (source.size() < n_source)
    throw std::invalid_argument("mix_init: source dataset too small");

  const gp::Dataset src = source.tail(n_source);
  const gp::Dataset tgt = target.tail(n_target);
  gp::Dataset out;
  const int dims = n_source > 0 ? src.dims() : tgt.dims();
  out.X.resize(n_o, dims);
  out.y.resize(n_o);
  if (n_source > 0) {
    out.X.topRows(n_source) = src.X;
    out.y.head(n_source) = src.y;
  }
  if (n_target > 0) {
    out.X.bottomRows(n_target) = tgt.X;
    out.y.tail(n_target) = tgt.y;
  }
  return out;
}

}  // namespace homove::turbo

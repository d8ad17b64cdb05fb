#include "core/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "core/errors.hpp"

namespace homove::ppo {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Networks
// ---------------------------------------------------------------------------

Mlp::Mlp(std::vector<int> layer_sizes, std::uint64_t seed)
    : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs >= 2 layers");
  int total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    w_offsets_.push_back(total);
    total += sizes_[l] * sizes_[l + 1];
    b_offsets_.push_back(total);
    total += sizes_[l + 1];
  }
  params_.resize(total);

  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int fan_in = sizes_[l];
    const int fan_out = sizes_[l + 1];
    const bool last = l + 2 == sizes_.size();
    // He init for the ReLU stack; a small head keeps the initial policy
    // near uniform.
    const double scale = last ? 0.01 : std::sqrt(2.0 / fan_in);
    for (int i = 0; i < fan_in * fan_out; ++i)
      params_[w_offsets_[l] + i] = scale * rng.normal();
    for (int i = 0; i < fan_out; ++i) params_[b_offsets_[l] + i] = 0.0;
  }
}

Eigen::Map<const Eigen::MatrixXd> Mlp::weight(int layer) const {
  return {params_.data() + w_offsets_[static_cast<std::size_t>(layer)],
          sizes_[static_cast<std::size_t>(layer) + 1],
          sizes_[static_cast<std::size_t>(layer)]};
}

Eigen::Map<const Eigen::VectorXd> Mlp::bias(int layer) const {
  return {params_.data() + b_offsets_[static_cast<std::size_t>(layer)],
          sizes_[static_cast<std::size_t>(layer) + 1]};
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd a = X;
  const int n_layers = static_cast<int>(sizes_.size()) - 1;
  for (int l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = a * weight(l).transpose();
    z.rowwise() += bias(l).transpose();
    a = l + 1 == n_layers ? z : z.cwiseMax(0.0);
  }
  return a;
}

Eigen::MatrixXd Mlp::forward_cached(const Eigen::MatrixXd& X,
                                    Cache& cache) const {
  const int n_layers = static_cast<int>(sizes_.size()) - 1;
  cache.acts.clear();
  cache.pre.clear();
  cache.acts.push_back(X);
  Eigen::MatrixXd a = X;
  for (int l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = a * weight(l).transpose();
    z.rowwise() += bias(l).transpose();
    cache.pre.push_back(z);
    a = l + 1 == n_layers ? z : z.cwiseMax(0.0);
    if (l + 1 < n_layers) cache.acts.push_back(a);
  }
  return a;
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& d_out,
                   Eigen::VectorXd& grad) const {
  const int n_layers = static_cast<int>(sizes_.size()) - 1;
  if (grad.size() != params_.size()) grad.setZero(params_.size());
  Eigen::MatrixXd dz = d_out;
  for (int l = n_layers - 1; l >= 0; --l) {
    const Eigen::MatrixXd& a_prev = cache.acts[static_cast<std::size_t>(l)];
    Eigen::Map<Eigen::MatrixXd> dW(
        grad.data() + w_offsets_[static_cast<std::size_t>(l)],
        sizes_[static_cast<std::size_t>(l) + 1],
        sizes_[static_cast<std::size_t>(l)]);
    Eigen::Map<Eigen::VectorXd> db(
        grad.data() + b_offsets_[static_cast<std::size_t>(l)],
        sizes_[static_cast<std::size_t>(l) + 1]);
    dW += dz.transpose() * a_prev;
    db += dz.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd da = dz * weight(l);
      const Eigen::MatrixXd& z_prev = cache.pre[static_cast<std::size_t>(l - 1)];
      dz = (z_prev.array() > 0.0).cast<double>() * da.array();
    }
  }
}

Adam::Adam(int n_params, double lr) : lr_(lr) {
  m_ = Eigen::VectorXd::Zero(n_params);
  v_ = Eigen::VectorXd::Zero(n_params);
}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  params -= (lr_ / c1) * m_.cwiseQuotient(
                             ((v_ / c2).cwiseSqrt().array() + eps_).matrix());
}

PolicyValue PolicyValue::make(const Encoding& enc, std::uint64_t seed) {
  PolicyValue pv;
  pv.encoding = enc;
  pv.policy = std::make_unique<Mlp>(
      std::vector<int>{enc.size(), 256, 128, 256, 2}, derive_seed(seed, {1}));
  pv.value = std::make_unique<Mlp>(std::vector<int>{enc.size(), 64, 64, 64, 1},
                                   derive_seed(seed, {2}));
  return pv;
}

PolicyValue PolicyValue::clone() const {
  PolicyValue pv;
  pv.encoding = encoding;
  pv.policy = std::make_unique<Mlp>(*policy);
  pv.value = std::make_unique<Mlp>(*value);
  return pv;
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd lp = logits;
  for (int i = 0; i < lp.rows(); ++i) {
    const double mx = lp.row(i).maxCoeff();
    lp.row(i).array() -= mx;
    const double lse = std::log(lp.row(i).array().exp().sum());
    lp.row(i).array() -= lse;
  }
  return lp;
}

double value_loss(const Eigen::VectorXd& values,
                  const Eigen::VectorXd& returns) {
  if (values.size() != returns.size())
    throw std::invalid_argument("value_loss: size mismatch");
  return (values - returns).squaredNorm() / values.size();
}

double policy_objective(const Eigen::VectorXd& logp_new,
                        const Eigen::VectorXd& logp_old,
                        const Eigen::VectorXd& advantages,
                        const Eigen::VectorXd& entropy, const Config& cfg) {
  const int n = static_cast<int>(logp_new.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ratio = std::exp(logp_new[i] - logp_old[i]);
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    acc += std::min(ratio * advantages[i], clipped * advantages[i]);
  }
  return acc / n + cfg.entropy_coeff * entropy.mean();
}

void compute_advantages(Rollout& rollout, const Eigen::VectorXd& values,
                        double gamma) {
  const int n = rollout.size();
  if (static_cast<int>(values.size()) != n)
    throw std::invalid_argument("compute_advantages: size mismatch");
  rollout.returns.resize(n);
  double running = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    if (rollout.done[static_cast<std::size_t>(i)]) running = 0.0;
    running = rollout.rewards[i] + gamma * running;
    rollout.returns[i] = running;
  }
  rollout.advantages = rollout.returns - values;
  const double mean = rollout.advantages.mean();
  const double std = std::sqrt(
      (rollout.advantages.array() - mean).square().sum() / n);
  rollout.advantages =
      (rollout.advantages.array() - mean) / (std + 1e-8);
}

namespace {

struct PolicyBatch {
  const Eigen::MatrixXd& states;
  const Eigen::VectorXi& actions;
  const Eigen::VectorXd& logp_old;
  const Eigen::VectorXd& advantages;
};

// Loss = -(clipped surrogate + entropy bonus); fills the parameter gradient
// when grad != nullptr.
double policy_loss_and_grad(const Mlp& policy, const PolicyBatch& batch,
                            const Config& cfg, Eigen::VectorXd* grad) {
  const int n = static_cast<int>(batch.actions.size());
  Mlp::Cache cache;
  const Eigen::MatrixXd logits =
      grad ? policy.forward_cached(batch.states, cache)
           : policy.forward(batch.states);
  const Eigen::MatrixXd lp = log_softmax(logits);
  const Eigen::MatrixXd p = lp.array().exp().matrix();

  double obj = 0.0;
  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(n, 2);
  for (int i = 0; i < n; ++i) {
    const int a = batch.actions[i];
    const double logp_new = lp(i, a);
    const double ratio = std::exp(logp_new - batch.logp_old[i]);
    const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
    const double s1 = ratio * batch.advantages[i];
    const double s2 = clipped * batch.advantages[i];
    obj += std::min(s1, s2);

    const double h =
        -(p(i, 0) * lp(i, 0) + p(i, 1) * lp(i, 1));
    obj += cfg.entropy_coeff * h;

    if (grad) {
      const double coeff = s1 <= s2 ? ratio * batch.advantages[i] : 0.0;
      for (int k = 0; k < 2; ++k) {
        const double d_logp_a = (k == a ? 1.0 : 0.0) - p(i, k);
        const double d_ent = -p(i, k) * (lp(i, k) + h);
        dlogits(i, k) = -(coeff * d_logp_a + cfg.entropy_coeff * d_ent) / n;
      }
    }
  }
  if (grad) {
    grad->setZero(policy.param_count());
    policy.backward(cache, dlogits, *grad);
  }
  return -obj / n;
}

double value_loss_and_grad(const Mlp& value, const Eigen::MatrixXd& states,
                           const Eigen::VectorXd& returns,
                           Eigen::VectorXd* grad) {
  const int n = static_cast<int>(returns.size());
  Mlp::Cache cache;
  const Eigen::MatrixXd out =
      grad ? value.forward_cached(states, cache) : value.forward(states);
  const Eigen::VectorXd diff = out.col(0) - returns;
  if (grad) {
    grad->setZero(value.param_count());
    const Eigen::MatrixXd d_out = (2.0 / n) * diff;
    value.backward(cache, d_out, *grad);
  }
  return diff.squaredNorm() / n;
}

}  // namespace

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

MobilityEnv::MobilityEnv(const PortfolioEvaluator& evaluator,
                         const Config& cfg, std::uint64_t seed)
    : evaluator_(evaluator), cfg_(cfg) {
  encoding_.n_streets =
      static_cast<int>(evaluator.scenario().streets.size());
  encoding_.n_cells = evaluator.scenario().deployment.n_cells();
  encoding_.history = cfg.history;
  episode_counter_ = static_cast<long>(seed % 100003);
}

bool MobilityEnv::start_episode() {
  const auto& pf = evaluator_.portfolio();
  const int n_entries = static_cast<int>(pf.entries.size());
  const int n_pool = static_cast<int>(pf.seeds.size());
  const long ep = episode_counter_++;
  const int entry = static_cast<int>(ep % n_entries);
  const int pool = static_cast<int>((ep / n_entries) % n_pool);

  const int street_id = pf.entries[static_cast<std::size_t>(entry)].street_id;
  current_street_ = 0;
  const auto& streets = evaluator_.scenario().streets;
  for (std::size_t i = 0; i < streets.size(); ++i)
    if (streets[i].street_id == street_id) current_street_ = static_cast<int>(i);

  episode_ = std::make_unique<HoEpisode>(evaluator_.scenario().deployment,
                                         evaluator_.trace_for(entry, pool),
                                         evaluator_.timings());
  history_.clear();
  episode_->run_to_decision();
  if (episode_->finished()) return false;
  last_view_ = episode_->view();
  return true;
}

Eigen::VectorXd MobilityEnv::reset() {
  for (int attempt = 0; attempt < 64; ++attempt) {
    if (start_episode()) {
      Eigen::VectorXd s = encode();
      push_history();
      return s;
    }
  }
  throw std::runtime_error("MobilityEnv: no usable episode in portfolio");
}

namespace {
double norm_rsrp(double dbm) {
  return std::clamp((dbm + 140.0) / 100.0, 0.0, 1.0);
}
}  // namespace

Eigen::VectorXd MobilityEnv::encode() const {
  const int S = encoding_.n_streets;
  const int B = encoding_.n_cells;
  Eigen::VectorXd s = Eigen::VectorXd::Zero(encoding_.size());
  s[current_street_] = 1.0;
  int off = S;
  if (last_view_.serving >= 0) s[off + last_view_.serving] = 1.0;
  off += B;
  s[off] = std::clamp(last_view_.tos_s / 10.0, 0.0, 1.0);
  off += 1;
  if (last_view_.candidate >= 0) {
    s[off + last_view_.candidate] = 1.0;
    s[off + B] =
        norm_rsrp(last_view_.l3->l3_dbm()[last_view_.candidate]);
  }
  off += B + 1;
  for (int h = 0; h < encoding_.history; ++h) {
    if (h < static_cast<int>(history_.size())) {
      const auto& [cell, dbm] =
          history_[history_.size() - 1 - static_cast<std::size_t>(h)];
      if (cell >= 0) {
        s[off + cell] = 1.0;
        s[off + B] = norm_rsrp(dbm);
      }
    }
    off += B + 1;
  }
  return s;
}

void MobilityEnv::push_history() {
  double dbm = -200.0;
  if (last_view_.serving >= 0)
    dbm = last_view_.l3->l3_dbm()[last_view_.serving];
  history_.emplace_back(last_view_.serving, dbm);
  while (static_cast<int>(history_.size()) > encoding_.history)
    history_.pop_front();
}

MobilityEnv::Step MobilityEnv::step(int action) {
  std::optional<int> target;
  if (action == 1 && last_view_.handover_allowed)
    target = last_view_.candidate;
  episode_->apply_decision(target);

  const std::size_t ev0 = episode_->run_to_decision();
  Step out;
  const auto& events = episode_->result().events;
  for (std::size_t e = ev0; e < events.size(); ++e) {
    switch (events[e].type) {
      case HoEventType::kPingPong: ++out.pp_events; break;
      case HoEventType::kRlf: ++out.rlf_events; break;
      case HoEventType::kHo: ++out.ho_events; break;
      case HoEventType::kHof: ++out.hof_events; break;
      default: break;
    }
  }
  out.reward = -cfg_.w_pp * out.pp_events - cfg_.w_rlf * out.rlf_events;
  out.done = episode_->finished();
  if (!out.done) {
    last_view_ = episode_->view();
    out.state = encode();
    push_history();
  } else {
    out.state = Eigen::VectorXd::Zero(encoding_.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

TrainResult train(MobilityEnv& env, PolicyValue& nets, const Config& cfg,
                  std::uint64_t seed) {
  if (env.encoding() != nets.encoding)
    throw std::invalid_argument("train: net/env encoding mismatch");
  TrainResult result;
  Adam opt_policy(nets.policy->param_count(), cfg.lr);
  Adam opt_value(nets.value->param_count(), cfg.lr);
  Rng act_rng(derive_seed(seed, {0xac7}));
  Rng shuffle_rng(derive_seed(seed, {0x54f}));

  while (result.env_steps < cfg.max_env_steps && !result.diverged) {
    // Collect whole episodes until the rollout is full.
    std::vector<Eigen::VectorXd> states;
    std::vector<int> actions;
    std::vector<double> logps, rewards;
    std::vector<std::uint8_t> done;
    std::vector<double> episode_rewards;
    long pp = 0, rlf = 0, ho = 0, hof = 0;

    while (static_cast<int>(states.size()) < cfg.rollout_steps) {
      Eigen::VectorXd s = env.reset();
      double ep_reward = 0.0;
      for (;;) {
        const Eigen::MatrixXd lp =
            log_softmax(nets.policy->forward(s.transpose()));
        const double p0 = std::exp(lp(0, 0));
        const int a = act_rng.uniform() < p0 ? 0 : 1;
        const auto st = env.step(a);
        states.push_back(s);
        actions.push_back(a);
        logps.push_back(lp(0, a));
        rewards.push_back(st.reward);
        done.push_back(st.done ? 1 : 0);
        ep_reward += st.reward;
        pp += st.pp_events;
        rlf += st.rlf_events;
        ho += st.ho_events;
        hof += st.hof_events;
        ++result.env_steps;
        if (st.done) break;
        s = st.state;
      }
      episode_rewards.push_back(ep_reward);
    }

    const int n = static_cast<int>(states.size());
    Rollout rollout;
    rollout.states.resize(n, states[0].size());
    rollout.actions.resize(n);
    rollout.logp_old.resize(n);
    rollout.rewards.resize(n);
    rollout.done = done;
    for (int i = 0; i < n; ++i) {
      rollout.states.row(i) = states[static_cast<std::size_t>(i)].transpose();
      rollout.actions[i] = actions[static_cast<std::size_t>(i)];
      rollout.logp_old[i] = logps[static_cast<std::size_t>(i)];
      rollout.rewards[i] = rewards[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd values =
        nets.value->forward(rollout.states).col(0);
    compute_advantages(rollout, values, cfg.gamma);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Eigen::VectorXd grad_p(nets.policy->param_count());
    Eigen::VectorXd grad_v(nets.value->param_count());
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (int i = n - 1; i > 0; --i)
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(shuffle_rng.uniform_int(i + 1))]);
      for (int start = 0; start < n; start += cfg.minibatch) {
        const int count = std::min(cfg.minibatch, n - start);
        Eigen::MatrixXd mb_states(count, rollout.states.cols());
        Eigen::VectorXi mb_actions(count);
        Eigen::VectorXd mb_logp(count), mb_adv(count), mb_ret(count);
        for (int i = 0; i < count; ++i) {
          const int src = order[static_cast<std::size_t>(start + i)];
          mb_states.row(i) = rollout.states.row(src);
          mb_actions[i] = rollout.actions[src];
          mb_logp[i] = rollout.logp_old[src];
          mb_adv[i] = rollout.advantages[src];
          mb_ret[i] = rollout.returns[src];
        }
        PolicyBatch pb{mb_states, mb_actions, mb_logp, mb_adv};
        policy_loss_and_grad(*nets.policy, pb, cfg, &grad_p);
        opt_policy.step(nets.policy->params(), grad_p);
        value_loss_and_grad(*nets.value, mb_states, mb_ret, &grad_v);
        opt_value.step(nets.value->params(), grad_v);
      }
    }

    // Divergence guard on the post-update ratios.
    const Eigen::MatrixXd lp_all =
        log_softmax(nets.policy->forward(rollout.states));
    double ratio_dev = 0.0;
    for (int i = 0; i < n; ++i)
      ratio_dev += std::abs(
          std::exp(lp_all(i, rollout.actions[i]) - rollout.logp_old[i]) - 1.0);
    ratio_dev /= n;
    if (ratio_dev > 10.0) {
      result.diverged = true;
      result.divergence_note =
          "mean |ratio - 1| = " + std::to_string(ratio_dev) + " after update";
    }

    CurvePoint cp;
    cp.env_steps = result.env_steps;
    cp.mean_episode_reward =
        std::accumulate(episode_rewards.begin(), episode_rewards.end(), 0.0) /
        static_cast<double>(episode_rewards.size());
    const long successes = ho - hof;
    cp.pp_rate = successes > 0 ? static_cast<double>(pp) / successes : 0.0;
    cp.rlf_rate = ho > 0 ? static_cast<double>(rlf) / ho : 0.0;
    result.curve.push_back(cp);
  }
  return result;
}

PolicyValue warm_start(const PolicyValue& pretrained) {
  if (!pretrained.policy || !pretrained.value)
    throw std::invalid_argument("warm_start: empty networks");
  if (pretrained.encoding.size() != pretrained.policy->sizes().front())
    throw std::invalid_argument("warm_start: encoding/network mismatch");
  return pretrained.clone();
}

EvalStats evaluate_policy(MobilityEnv& env, const PolicyValue& nets,
                          int n_episodes, std::uint64_t seed) {
  EvalStats stats;
  Rng rng(derive_seed(seed, {0xe7a1}));
  double total = 0.0;
  for (int e = 0; e < n_episodes; ++e) {
    Eigen::VectorXd s = env.reset();
    double ep_reward = 0.0;
    for (;;) {
      const Eigen::MatrixXd lp = log_softmax(nets.policy->forward(s.transpose()));
      const int a = rng.uniform() < std::exp(lp(0, 0)) ? 0 : 1;
      const auto st = env.step(a);
      ep_reward += st.reward;
      stats.counters.n_pp += st.pp_events;
      stats.counters.n_rlf += st.rlf_events;
      stats.counters.n_ho += st.ho_events;
      stats.counters.n_hof += st.hof_events;
      if (st.done) break;
      s = st.state;
    }
    total += ep_reward;
  }
  stats.mean_episode_reward = total / n_episodes;
  return stats;
}

double gradient_check(const PolicyValue& nets, const Rollout& batch,
                      const Config& cfg, double h) {
  PolicyBatch pb{batch.states, batch.actions, batch.logp_old,
                 batch.advantages};
  double max_rel = 0.0;

  auto check = [&](Mlp& net, auto&& loss_fn) {
    Eigen::VectorXd analytic(net.param_count());
    loss_fn(&analytic);
    for (int i = 0; i < net.param_count(); ++i) {
      const double saved = net.params()[i];
      net.params()[i] = saved + h;
      const double up = loss_fn(nullptr);
      net.params()[i] = saved - h;
      const double dn = loss_fn(nullptr);
      net.params()[i] = saved;
      const double fd = (up - dn) / (2.0 * h);
      const double rel = std::abs(analytic[i] - fd) /
                         std::max(std::abs(analytic[i]) + std::abs(fd), 1e-6);
      max_rel = std::max(max_rel, rel);
    }
  };

  PolicyValue work = nets.clone();
  check(*work.policy, [&](Eigen::VectorXd* g) {
    return policy_loss_and_grad(*work.policy, pb, cfg, g);
  });
  check(*work.value, [&](Eigen::VectorXd* g) {
    return value_loss_and_grad(*work.value, batch.states, batch.returns, g);
  });
  return max_rel;
}

long convergence_env_steps(const std::vector<CurvePoint>& curve) {
  if (curve.empty()) return 0;
  const int n = static_cast<int>(curve.size());
  const int tail = std::min(5, n);
  double plateau = 0.0;
  for (int i = n - tail; i < n; ++i) plateau += curve[static_cast<std::size_t>(i)].mean_episode_reward;
  plateau /= tail;

  double worst = plateau;
  for (const auto& cp : curve)
    worst = std::min(worst, cp.mean_episode_reward);
  const double range = std::max(plateau - worst, 0.5);
  const double threshold = plateau - 0.05 * range;

  for (int u = 0; u < n; ++u) {
    const int lo = std::max(0, u - 4);
    double trail = 0.0;
    for (int i = lo; i <= u; ++i)
      trail += curve[static_cast<std::size_t>(i)].mean_episode_reward;
    trail /= (u - lo + 1);
    if (trail >= threshold) return curve[static_cast<std::size_t>(u)].env_steps;
  }
  return curve.back().env_steps;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

json mlp_to_json(const Mlp& net) {
  json j;
  j["sizes"] = net.sizes();
  j["params"] = std::vector<double>(
      net.params().data(), net.params().data() + net.param_count());
  return j;
}

std::unique_ptr<Mlp> mlp_from_json(const json& j) {
  auto net = std::make_unique<Mlp>(j.at("sizes").get<std::vector<int>>(), 0);
  const auto params = j.at("params").get<std::vector<double>>();
  if (static_cast<int>(params.size()) != net->param_count())
    throw ConfigError("network checkpoint: parameter count mismatch");
  net->params() = Eigen::Map<const Eigen::VectorXd>(
      params.data(), static_cast<Eigen::Index>(params.size()));
  return net;
}

}  // namespace

std::string nets_to_json(const PolicyValue& nets) {
  json j;
  j["schema"] = 1;
  j["encoding"] = {{"n_streets", nets.encoding.n_streets},
                   {"n_cells", nets.encoding.n_cells},
                   {"history", nets.encoding.history}};
  j["policy"] = mlp_to_json(*nets.policy);
  j["value"] = mlp_to_json(*nets.value);
  return j.dump() + "\n";
}

PolicyValue nets_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("network checkpoint: invalid JSON: ") +
                      e.what());
  }
  if (j.value("schema", 0) != 1)
    throw ConfigError("network checkpoint: missing or unsupported schema");
  PolicyValue pv;
  pv.encoding.n_streets = j.at("encoding").at("n_streets").get<int>();
  pv.encoding.n_cells = j.at("encoding").at("n_cells").get<int>();
  pv.encoding.history = j.at("encoding").at("history").get<int>();
  pv.policy = mlp_from_json(j.at("policy"));
  pv.value = mlp_from_json(j.at("value"));
  if (pv.policy->sizes().front() != pv.encoding.size())
    throw ConfigError("network checkpoint: encoding/network mismatch");
  return pv;
}

void save_nets(const PolicyValue& nets, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write network checkpoint: " + path);
  out << nets_to_json(nets);
}

PolicyValue load_nets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open network checkpoint: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return nets_from_json(ss.str());
}

}  // namespace homove::ppo

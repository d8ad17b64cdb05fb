#include "core/hostack.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "core/errors.hpp"
#include "core/units.hpp"

namespace homove {

namespace {
constexpr double kTimeEps = 1e-9;
}

void HoParams::validate(int n_cells) const {
  if (static_cast<int>(a3_offset_db.size()) != n_cells ||
      static_cast<int>(ttt_ms.size()) != n_cells)
    throw BoundsError("handover params: expected " + std::to_string(n_cells) +
                      " per-cell entries");
  for (int b = 0; b < n_cells; ++b) {
    const double a3 = a3_offset_db[static_cast<std::size_t>(b)];
    const double ttt = ttt_ms[static_cast<std::size_t>(b)];
    if (a3 < kA3OffsetMinDb - 1e-9 || a3 > kA3OffsetMaxDb + 1e-9)
      throw BoundsError("A3-offset out of [-1,3] dB for cell " +
                        std::to_string(b));
    if (ttt < kTttMinMs - 1e-9 || ttt > kTttMaxMs + 1e-9)
      throw BoundsError("TTT out of [40,480] ms for cell " +
                        std::to_string(b));
  }
}

HoParams HoParams::uniform(int n_cells, double a3_db, double ttt_ms) {
  HoParams p;
  p.a3_offset_db.assign(static_cast<std::size_t>(n_cells), a3_db);
  p.ttt_ms.assign(static_cast<std::size_t>(n_cells), quantize_ttt_ms(ttt_ms));
  return p;
}

double quantize_ttt_ms(double ttt_ms) {
  const double snapped = std::round(ttt_ms / kTttGridMs) * kTttGridMs;
  return std::clamp(snapped, kTttMinMs, kTttMaxMs);
}

double l1_filter_dbm(const std::vector<double>& buffer_dbm) {
  if (buffer_dbm.empty()) throw std::invalid_argument("empty L1 buffer");
  double acc_mw = 0.0;
  for (double s : buffer_dbm) acc_mw += dbm_to_mw(s);
  return mw_to_dbm(acc_mw / static_cast<double>(buffer_dbm.size()));
}

double l3_filter_dbm(double prev_l3_dbm, double l1_dbm, double coeff) {
  return (1.0 - coeff) * prev_l3_dbm + coeff * l1_dbm;
}

L3State::L3State(int n_cells, double iir, int window)
    : iir_coeff(iir), l1_window(window) {
  l3_dbm_ = Eigen::ArrayXd::Zero(n_cells);
  buffer_.assign(static_cast<std::size_t>(n_cells), {});
  for (auto& b : buffer_) b.reserve(static_cast<std::size_t>(window));
}

void L3State::push_sample(const Eigen::Ref<const Eigen::ArrayXd>& rsrp_dbm) {
  for (std::size_t b = 0; b < buffer_.size(); ++b)
    buffer_[b].push_back(rsrp_dbm[static_cast<Eigen::Index>(b)]);
  ++fill_;
}

bool L3State::l1_ready() const { return fill_ >= l1_window; }

void L3State::update_l3() {
  for (std::size_t b = 0; b < buffer_.size(); ++b) {
    const double l1 = l1_filter_dbm(buffer_[b]);
    l3_dbm_[static_cast<Eigen::Index>(b)] =
        initialized_
            ? l3_filter_dbm(l3_dbm_[static_cast<Eigen::Index>(b)], l1, iir_coeff)
            : l1;
    buffer_[b].clear();
  }
  fill_ = 0;
  initialized_ = true;
}

void L3State::reset() { initialized_ = false; }

int L3State::strongest(int excluding) const {
  if (!initialized_) return -1;
  int best = -1;
  for (int b = 0; b < static_cast<int>(l3_dbm_.size()); ++b) {
    if (b == excluding) continue;
    if (best < 0 || l3_dbm_[b] > l3_dbm_[best]) best = b;
  }
  return best;
}

void KpiCounters::accumulate(const KpiCounters& other) {
  n_ho += other.n_ho;
  n_hof += other.n_hof;
  n_pp += other.n_pp;
  n_rlf += other.n_rlf;
  time_of_stay_s.insert(time_of_stay_s.end(), other.time_of_stay_s.begin(),
                        other.time_of_stay_s.end());
}

const char* to_string(HoEventType type) {
  switch (type) {
    case HoEventType::kA3Start: return "A3_START";
    case HoEventType::kA3Abort: return "A3_ABORT";
    case HoEventType::kHo: return "HO";
    case HoEventType::kHof: return "HOF";
    case HoEventType::kPingPong: return "PP";
    case HoEventType::kRlf: return "RLF";
  }
  return "?";
}

HoTimeline step_a3(const L3State& l3, int serving, const HoParams& params,
                   HoTimeline timeline, double dt_ms,
                   std::vector<HoEvent>* log, long tick) {
  if (timeline.phase != HoPhase::kIdle &&
      timeline.phase != HoPhase::kTttRunning)
    return timeline;

  const int candidate = l3.strongest(serving);
  const bool condition =
      candidate >= 0 &&
      l3.l3_dbm()[candidate] >
          l3.l3_dbm()[serving] +
              params.a3_offset_db[static_cast<std::size_t>(serving)];

  if (!condition) {
    if (timeline.phase == HoPhase::kTttRunning && log)
      log->push_back({tick, HoEventType::kA3Abort, serving,
                      timeline.target_cell, 0.0});
    timeline = HoTimeline{};
    return timeline;
  }

  if (timeline.phase == HoPhase::kIdle || timeline.target_cell != candidate) {
    if (timeline.phase == HoPhase::kTttRunning && log)
      log->push_back({tick, HoEventType::kA3Abort, serving,
                      timeline.target_cell, 0.0});
    timeline.phase = HoPhase::kTttRunning;
    timeline.target_cell = candidate;
    timeline.ttt_elapsed_ms = 0.0;
    if (log)
      log->push_back({tick, HoEventType::kA3Start, serving, candidate, 0.0});
  }

  timeline.ttt_elapsed_ms += dt_ms;
  if (timeline.ttt_elapsed_ms >=
      params.ttt_ms[static_cast<std::size_t>(serving)] - kTimeEps) {
    timeline.phase = HoPhase::kPreparing;
    timeline.phase_elapsed_ms = 0.0;
  }
  return timeline;
}

bool step_rlf(RlfState& rlf, double sinr_db_now, double dt_s) {
  if (!rlf.t310_running) {
    if (sinr_db_now < rlf.qout_db) {
      rlf.t310_running = true;
      rlf.t310_elapsed_s = 0.0;
    } else {
      return false;
    }
  } else if (sinr_db_now > rlf.qin_db) {
    rlf.reset();
    return false;
  }
  rlf.t310_elapsed_s += dt_s;
  return rlf.t310_elapsed_s >= rlf.t310_s - kTimeEps;
}

bool detect_pingpong(int prev_source, int new_target, double time_of_stay_s,
                     double tp_s) {
  return prev_source >= 0 && new_target == prev_source &&
         time_of_stay_s < tp_s - kTimeEps;
}

HoEpisode::HoEpisode(const Deployment& deployment, const RadioTrace& trace,
                     const HoTimings& timings)
    : deployment_(deployment),
      trace_(trace),
      timings_(timings),
      l3_(trace.n_cells(), timings.iir_coeff, timings.l1_window) {
  rlf_.qout_db = timings.qout_db;
  rlf_.qin_db = timings.qin_db;
  rlf_.t310_s = timings.t310_s;
}

bool HoEpisode::finished() const { return tick_ >= trace_.ticks(); }

std::size_t HoEpisode::run_to_decision() {
  const std::size_t first_event = result_.events.size();
  decision_ready_ = false;
  while (!finished() && !decision_ready_) process_tick();
  return first_event;
}

HoEpisode::DecisionView HoEpisode::view() const {
  DecisionView v;
  v.tick = tick_ - 1;  // the tick just processed
  v.serving = serving_;
  v.candidate = l3_.strongest(serving_);
  v.tos_s = static_cast<double>((tick_ - 1) - tos_start_tick_) * timings_.tick_s;
  v.handover_allowed = phase_ == Phase::kIdle && v.candidate >= 0;
  v.l3 = &l3_;
  return v;
}

void HoEpisode::apply_decision(std::optional<int> handover_target) {
  decision_ready_ = false;
  if (!handover_target) return;
  const int target = *handover_target;
  if (phase_ != Phase::kIdle) return;  // HO already in flight: no-op
  if (target < 0 || target >= trace_.n_cells() || target == serving_) return;
  phase_ = Phase::kPreparing;
  ho_target_ = target;
  phase_elapsed_ms_ = 0.0;
}

void HoEpisode::enter_reestablish() {
  phase_ = Phase::kReestablishing;
  reestablish_elapsed_ms_ = 0.0;
  phase_elapsed_ms_ = 0.0;
  pre_failure_serving_ = serving_;
  ho_target_ = -1;
  l3_.reset();
  rlf_.reset();
}

void HoEpisode::complete_handover(double sinr_now) {
  const long t = tick_;
  ++result_.counters.n_ho;
  result_.events.push_back(
      {t, HoEventType::kHo, serving_, ho_target_, sinr_now});

  if (sinr_now < timings_.qout_db) {
    ++result_.counters.n_hof;
    result_.events.push_back(
        {t, HoEventType::kHof, serving_, ho_target_, sinr_now});
    enter_reestablish();
    return;
  }

  const double tos_s =
      static_cast<double>(t - tos_start_tick_) * timings_.tick_s;
  result_.counters.time_of_stay_s.push_back(tos_s);
  if (detect_pingpong(prev_ho_source_, ho_target_, tos_s, timings_.tp_s)) {
    ++result_.counters.n_pp;
    result_.events.push_back(
        {t, HoEventType::kPingPong, serving_, ho_target_, sinr_now});
  }
  prev_ho_source_ = serving_;
  serving_ = ho_target_;
  ho_target_ = -1;
  tos_start_tick_ = t;
  phase_ = Phase::kIdle;
  rlf_.reset();
}

void HoEpisode::process_tick() {
  const long t = tick_;
  const double tick_ms = timings_.tick_s * 1000.0;

  l3_.push_sample(trace_.rsrp_dbm.row(t).array());
  const bool l3_tick = l3_.l1_ready();

  if (phase_ == Phase::kReestablishing) {
    // Penalty window: the UE has no serving link; no events accrue. L1/L3
    // keep running so a fresh measurement exists at re-attach.
    if (l3_tick) l3_.update_l3();
    reestablish_elapsed_ms_ += tick_ms;
    if (reestablish_elapsed_ms_ >= timings_.reestablish_ms - kTimeEps &&
        l3_.initialized()) {
      serving_ = l3_.strongest();
      phase_ = Phase::kIdle;
      tos_start_tick_ = t;
      // The previous-source chain survives re-establishment: it tracks the
      // serving cell before the most recent serving-cell change, whether
      // that change was a handover or a re-attach.
      if (serving_ != pre_failure_serving_)
        prev_ho_source_ = pre_failure_serving_;
      pre_failure_serving_ = -1;
    }
    ++tick_;
    return;
  }

  if (phase_ == Phase::kUnattached) {
    if (l3_tick) {
      l3_.update_l3();
      serving_ = l3_.strongest();
      phase_ = Phase::kIdle;
      tos_start_tick_ = t;
      const double sinr = sinr_db(deployment_, trace_.gain_db.row(t).array(),
                                  serving_);
      result_.trace_tick.push_back(t);
      result_.trace_serving.push_back(serving_);
      result_.trace_sinr_db.push_back(sinr);
    }
    ++tick_;
    return;
  }

  if (l3_tick) l3_.update_l3();

  const double sinr =
      sinr_db(deployment_, trace_.gain_db.row(t).array(), serving_);
  result_.trace_tick.push_back(t);
  result_.trace_serving.push_back(serving_);
  result_.trace_sinr_db.push_back(sinr);

  if (step_rlf(rlf_, sinr, timings_.tick_s)) {
    ++result_.counters.n_rlf;
    result_.events.push_back({t, HoEventType::kRlf, serving_, ho_target_, sinr});
    if (phase_ == Phase::kPreparing || phase_ == Phase::kExecuting) {
      // A handover aborted by RLF counts as an attempt and a failure.
      ++result_.counters.n_ho;
      ++result_.counters.n_hof;
      result_.events.push_back(
          {t, HoEventType::kHof, serving_, ho_target_, sinr});
    }
    enter_reestablish();
    ++tick_;
    return;
  }

  if (phase_ == Phase::kPreparing) {
    phase_elapsed_ms_ += tick_ms;
    if (phase_elapsed_ms_ >= timings_.prep_ms - kTimeEps) {
      phase_ = Phase::kExecuting;
      phase_elapsed_ms_ = 0.0;
    }
  } else if (phase_ == Phase::kExecuting) {
    phase_elapsed_ms_ += tick_ms;
    if (phase_elapsed_ms_ >= timings_.exec_ms - kTimeEps)
      complete_handover(sinr);
  }

  if (l3_tick && phase_ != Phase::kReestablishing) decision_ready_ = true;
  ++tick_;
}

A3Controller::A3Controller(const HoParams& params, std::vector<HoEvent>* log)
    : params_(params), log_(log) {}

std::optional<int> A3Controller::decide(const HoEpisode::DecisionView& view,
                                        double l3_period_ms) {
  if (!view.handover_allowed) {
    // HO in flight or no eligible neighbor; A3 runs only in idle, so any
    // running TTT is dropped.
    timeline_ = HoTimeline{};
    return std::nullopt;
  }
  timeline_ = step_a3(*view.l3, view.serving, params_, timeline_,
                      l3_period_ms, log_, view.tick);
  if (timeline_.phase == HoPhase::kPreparing) {
    const int target = timeline_.target_cell;
    timeline_ = HoTimeline{};
    return target;
  }
  return std::nullopt;
}

EpisodeResult run_episode_on_trace(const Deployment& deployment,
                                   const RadioTrace& trace,
                                   const HoParams& params,
                                   const HoTimings& timings) {
  params.validate(trace.n_cells());
  HoEpisode episode(deployment, trace, timings);
  A3Controller controller(params, &episode.event_log());
  for (;;) {
    episode.run_to_decision();
    if (episode.finished()) break;
    const auto view = episode.view();
    episode.apply_decision(controller.decide(view, timings.l3_period_ms()));
  }
  return episode.result();
}

EpisodeResult run_episode(const Deployment& deployment,
                          const Trajectory& trajectory, const HoParams& params,
                          const HoTimings& timings,
                          const PropagationParams& propagation) {
  const RadioTrace trace = build_radio_trace(deployment, trajectory, propagation);
  return run_episode_on_trace(deployment, trace, params, timings);
}

void write_event_csv(const EpisodeResult& episode, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write event log: " + path);
  out << "tick,event,serving,target,sinr_db\n";
  char buf[128];
  for (const HoEvent& e : episode.events) {
    std::snprintf(buf, sizeof(buf), "%ld,%s,%d,%d,%.6g\n", e.tick,
                  to_string(e.type), e.serving, e.target, e.sinr_db);
    out << buf;
  }
}

void write_sinr_csv(const EpisodeResult& episode, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write sinr trace: " + path);
  out << "tick,serving,sinr_db\n";
  char buf[96];
  for (std::size_t i = 0; i < episode.trace_tick.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%ld,%d,%.6g\n", episode.trace_tick[i],
                  episode.trace_serving[i], episode.trace_sinr_db[i]);
    out << buf;
  }
}

}  // namespace homove

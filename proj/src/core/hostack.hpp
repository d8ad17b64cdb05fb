#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/radio.hpp"
#include "core/scenario.hpp"

namespace homove {

// Per-cell handover decision vector: one A3-offset and one TTT per cell,
// indexed by the current serving cell.
struct HoParams {
  std::vector<double> a3_offset_db;
  std::vector<double> ttt_ms;

  int n_cells() const { return static_cast<int>(a3_offset_db.size()); }

  // Throws BoundsError when outside [-1,3] dB x [40,480] ms or when the
  // vector length does not match the deployment. TTT is snapped to the
  // 40 ms tick grid.
  void validate(int n_cells) const;
  static HoParams uniform(int n_cells, double a3_db, double ttt_ms);
};

constexpr double kA3OffsetMinDb = -1.0;
constexpr double kA3OffsetMaxDb = 3.0;
constexpr double kTttMinMs = 40.0;
constexpr double kTttMaxMs = 480.0;
constexpr double kTttGridMs = 40.0;

double quantize_ttt_ms(double ttt_ms);

// Stack timing/threshold constants. Defaults follow common evaluation
// assumptions; everything is configurable.
struct HoTimings {
  double tick_s = 0.040;        // RSRP sampling period
  int l1_window = 5;            // samples per L1 output (=> 200 ms L3 grid)
  double iir_coeff = 0.5;       // L3 first-order IIR coefficient
  double prep_ms = 50.0;        // HO preparation duration
  double exec_ms = 40.0;        // HO execution duration
  double reestablish_ms = 200.0; // penalty after RLF/HOF before re-attach
  double qout_db = -8.0;
  double qin_db = -6.0;
  double t310_s = 1.0;
  double tp_s = 1.0;            // ping-pong time-of-stay threshold

  double l3_period_ms() const { return tick_s * 1000.0 * l1_window; }
};

// L1 linear-domain average of the last five RSRP samples.
double l1_filter_dbm(const std::vector<double>& buffer_dbm);

// L3 IIR smoothing in the dB domain: (1-a)*prev + a*l1.
double l3_filter_dbm(double prev_l3_dbm, double l1_dbm, double coeff);

// Per-cell L3 filtering state fed by per-tick RSRP samples.
struct L3State {
  explicit L3State(int n_cells, double iir_coeff = 0.5, int l1_window = 5);

  void push_sample(const Eigen::Ref<const Eigen::ArrayXd>& rsrp_dbm);
  bool l1_ready() const;     // a full window has accumulated
  void update_l3();          // consume the window into the IIR state
  void reset();              // forget IIR state (keeps the sample buffer)

  bool initialized() const { return initialized_; }
  const Eigen::ArrayXd& l3_dbm() const { return l3_dbm_; }

  // Strongest cell / strongest cell excluding `excluding`; ties go to the
  // lowest cell_id. Returns -1 when there is no eligible cell.
  int strongest(int excluding = -1) const;

  double iir_coeff;
  int l1_window;

 private:
  Eigen::ArrayXd l3_dbm_;
  std::vector<std::vector<double>> buffer_;
  int fill_ = 0;
  bool initialized_ = false;
};

enum class HoPhase { kIdle, kTttRunning, kPreparing, kExecuting };

// A3/TTT timeline for one UE. TTT advances on the L3 grid; preparation and
// execution advance on the RSRP tick grid.
struct HoTimeline {
  HoPhase phase = HoPhase::kIdle;
  double ttt_elapsed_ms = 0.0;
  int target_cell = -1;
  double phase_elapsed_ms = 0.0;
};

// Radio-link-failure monitor (Q_out / Q_in / T310).
struct RlfState {
  bool t310_running = false;
  double t310_elapsed_s = 0.0;
  double qout_db = -8.0;
  double qin_db = -6.0;
  double t310_s = 1.0;

  void reset() {
    t310_running = false;
    t310_elapsed_s = 0.0;
  }
};

struct KpiCounters {
  long n_ho = 0;
  long n_hof = 0;
  long n_pp = 0;
  long n_rlf = 0;
  std::vector<double> time_of_stay_s;

  void accumulate(const KpiCounters& other);
};

enum class HoEventType { kA3Start, kA3Abort, kHo, kHof, kPingPong, kRlf };

const char* to_string(HoEventType type);

struct HoEvent {
  long tick = 0;
  HoEventType type = HoEventType::kHo;
  int serving = -1;
  int target = -1;
  double sinr_db = 0.0;
};

// One entry A3 evaluation on the L3 grid. The entry condition is strict:
// l3[candidate] > l3[serving] + a3_offset[serving]. Each check where the
// condition holds accounts for one elapsed L3 period (the period leading up
// to the check), so a 480 ms TTT fires on the third consecutive true check.
// A candidate change mid-TTT restarts the timer on the new candidate.
HoTimeline step_a3(const L3State& l3, int serving, const HoParams& params,
                   HoTimeline timeline, double dt_ms,
                   std::vector<HoEvent>* log = nullptr, long tick = 0);

// One RLF tick on instantaneous wideband SINR. Returns true when T310
// expires (RLF declared); the caller handles re-establishment.
bool step_rlf(RlfState& rlf, double sinr_db_now, double dt_s);

// Ping-pong rule: the new target equals the source of the previous
// handover and the time of stay is below the threshold.
bool detect_pingpong(int prev_source, int new_target, double time_of_stay_s,
                     double tp_s);

struct EpisodeResult {
  KpiCounters counters;
  std::vector<HoEvent> events;
  // Attached ticks only (warm-up and re-establishment excluded).
  std::vector<long> trace_tick;
  std::vector<int> trace_serving;
  std::vector<double> trace_sinr_db;
};

// Incremental episode engine over a fixed radio trace. Handover *triggering*
// is delegated to a controller (the A3 rule, or an external agent); the
// engine owns filtering, SINR, the preparation/execution timeline, RLF,
// failure accounting, ping-pong detection, and re-establishment.
class HoEpisode {
 public:
  HoEpisode(const Deployment& deployment, const RadioTrace& trace,
            const HoTimings& timings);

  // Runs ticks until the next decision point (an L3-grid tick while
  // attached) or to the end of the trace. Returns the index into
  // result().events of the first event that fired during this call.
  std::size_t run_to_decision();

  bool finished() const;
  bool at_decision_point() const { return decision_ready_; }

  struct DecisionView {
    long tick = 0;
    int serving = -1;
    int candidate = -1;      // strongest neighbor, -1 if none
    double tos_s = 0.0;      // time since last HO-complete / attach
    bool handover_allowed = false;  // engine idle, candidate exists
    const L3State* l3 = nullptr;
  };
  DecisionView view() const;

  // Applies a stay (nullopt) or start-handover decision at the pending
  // decision point. Handover requests are ignored unless the engine is
  // idle and the target is a valid neighbor.
  void apply_decision(std::optional<int> handover_target);

  const EpisodeResult& result() const { return result_; }
  const HoTimings& timings() const { return timings_; }

  // Shared event sink, so controller-level events (A3 start/abort)
  // interleave with engine events in tick order.
  std::vector<HoEvent>& event_log() { return result_.events; }

 private:
  enum class Phase { kUnattached, kIdle, kPreparing, kExecuting, kReestablishing };

  void process_tick();
  void enter_reestablish();
  void complete_handover(double sinr_now);

  const Deployment& deployment_;
  const RadioTrace& trace_;
  HoTimings timings_;

  long tick_ = 0;
  Phase phase_ = Phase::kUnattached;
  L3State l3_;
  RlfState rlf_;
  int serving_ = -1;
  int ho_target_ = -1;
  double phase_elapsed_ms_ = 0.0;
  double reestablish_elapsed_ms_ = 0.0;
  long tos_start_tick_ = 0;
  int prev_ho_source_ = -1;
  int pre_failure_serving_ = -1;
  bool decision_ready_ = false;
  EpisodeResult result_;
};

// A3-rule controller state (TTT bookkeeping lives here, per the timeline
// contract above).
class A3Controller {
 public:
  A3Controller(const HoParams& params, std::vector<HoEvent>* log = nullptr);
  std::optional<int> decide(const HoEpisode::DecisionView& view,
                            double l3_period_ms);

 private:
  const HoParams& params_;
  HoTimeline timeline_;
  std::vector<HoEvent>* log_;
};

// Full episode under the A3/TTT rule.
EpisodeResult run_episode_on_trace(const Deployment& deployment,
                                   const RadioTrace& trace,
                                   const HoParams& params,
                                   const HoTimings& timings);

// Convenience wrapper building the radio trace first.
EpisodeResult run_episode(const Deployment& deployment,
                          const Trajectory& trajectory, const HoParams& params,
                          const HoTimings& timings,
                          const PropagationParams& propagation);

// Event log CSV: tick,event,serving,target,sinr_db.
void write_event_csv(const EpisodeResult& episode, const std::string& path);

// SINR trace CSV: tick,serving,sinr_db (attached ticks).
void write_sinr_csv(const EpisodeResult& episode, const std::string& path);

}  // namespace homove

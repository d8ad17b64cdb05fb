#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "core/scenario.hpp"

namespace homove {

struct PropagationParams {
  // Log-distance path loss anchored at free space for 1 m @ 2 GHz.
  double pl0_db = 38.46;
  double ref_distance_m = 1.0;
  double exponent_los = 2.2;
  double exponent_nlos = 3.5;
  double always_los_above_m = 100.0;

  // Gauss-Markov shadowing.
  double shadow_std_db = 6.0;
  double shadow_decorr_m = 25.0;

  // Per-tick measurement jitter on RSRP samples (fast-fading stand-in).
  double jitter_std_db = 2.0;
};

// Distance-dependent line-of-sight probability for ground users.
double los_probability(double d2d_m);

// Log-distance path loss; 3D distance clamped to the 1 m anchor.
double pathloss_db(const CellConfig& cell, const Vec3& pos, bool los,
                   const PropagationParams& params);

// Standard 3-sector pattern: 65 deg horizontal and 10 deg vertical HPBW,
// 14 dBi peak, -30 dB combined floor.
double antenna_gain_db(const CellConfig& cell, const Vec3& pos);

// Wideband downlink SINR in dB for the given serving cell, with every other
// cell treated as interference and thermal noise from the deployment
// constants. gains_db excludes per-tick jitter.
double sinr_db(const Deployment& deployment,
               const Eigen::Ref<const Eigen::ArrayXd>& gains_db, int serving);

// Per-cell correlated shadowing, advanced by traveled distance. Stationary
// marginal N(0, std^2); correlation over distance d is exp(-d/decorr).
class ShadowingField {
 public:
  ShadowingField(int n_cells, double std_db, double decorr_m,
                 std::uint64_t seed);

  void advance(double step_m);
  double value_db(int cell) const { return values_[cell]; }
  const std::vector<double>& values_db() const { return values_; }

 private:
  double std_db_;
  double decorr_m_;
  std::vector<double> values_;
  std::vector<std::uint64_t> streams_;
  std::vector<std::uint64_t> draws_;
};

// One tick of per-cell measurements.
struct RadioSample {
  long tick = 0;
  Eigen::ArrayXd rsrp_dbm;  // L1-input instantaneous samples (with jitter)
  Eigen::ArrayXd gain_db;   // large-scale gain, jitter excluded
};

// Whole-trajectory channel realization: rows are ticks, columns cells.
// Built once per (deployment, trajectory, seed) and reusable across any
// number of handover-parameter evaluations.
struct RadioTrace {
  Eigen::MatrixXd rsrp_dbm;
  Eigen::MatrixXd gain_db;
  std::vector<bool> los;

  long ticks() const { return rsrp_dbm.rows(); }
  int n_cells() const { return static_cast<int>(rsrp_dbm.cols()); }
};

// Large-scale gain (antenna + path loss + shadowing) for one cell/position.
double channel_gain_db(const CellConfig& cell, const Vec3& pos, bool los,
                       double shadow_db, const PropagationParams& params);

// Single-tick sample at a position. LoS states are passed in because they
// are frozen per (cell, trajectory). Jitter is keyed by (seed, tick, cell).
RadioSample sample_radio(const Deployment& deployment, const Vec3& pos,
                         long tick, const std::vector<bool>& los,
                         const ShadowingField& shadow,
                         const PropagationParams& params, std::uint64_t seed);

RadioTrace build_radio_trace(const Deployment& deployment,
                             const Trajectory& trajectory,
                             const PropagationParams& params);

// CSV gain map over a grid at the given altitude: cell_id,x,y,z,gain_db.
// Shadowing excluded; intended for visual inspection of the layout.
void dump_gain_map_csv(const Deployment& deployment,
                       const PropagationParams& params, double altitude_m,
                       double grid_step_m, const std::string& path);

}  // namespace homove

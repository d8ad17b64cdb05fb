#include "core/radio.hpp"

#include <cmath>
#include <fstream>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/units.hpp"

namespace homove {

double los_probability(double d2d_m) {
  if (d2d_m <= 0.0) return 1.0;
  const double decay = std::exp(-d2d_m / 63.0);
  return std::min(18.0 / d2d_m, 1.0) * (1.0 - decay) + decay;
}

double pathloss_db(const CellConfig& cell, const Vec3& pos, bool los,
                   const PropagationParams& params) {
  const double d = std::max(dist3d(cell.site, pos), params.ref_distance_m);
  const double n = los ? params.exponent_los : params.exponent_nlos;
  return params.pl0_db + 10.0 * n * std::log10(d / params.ref_distance_m);
}

double antenna_gain_db(const CellConfig& cell, const Vec3& pos) {
  const double dx = pos.x - cell.site.x;
  const double dy = pos.y - cell.site.y;
  const double d2d = std::hypot(dx, dy);

  const double bearing_deg = rad_to_deg(std::atan2(dy, dx));
  const double daz = wrap_deg(bearing_deg - cell.azimuth_deg);

  // Depression angle, positive below the horizon, matching the downtilt
  // sign convention.
  const double depression_deg =
      rad_to_deg(std::atan2(cell.site.z - pos.z, d2d));

  const double ah = -std::min(12.0 * (daz / 65.0) * (daz / 65.0), 30.0);
  const double dv = depression_deg - cell.tilt_deg;
  const double av = -std::min(12.0 * (dv / 10.0) * (dv / 10.0), 30.0);
  return 14.0 + std::max(ah + av, -30.0);
}

double sinr_db(const Deployment& deployment,
               const Eigen::Ref<const Eigen::ArrayXd>& gains_db, int serving) {
  const int n = deployment.n_cells();
  double interference_mw = dbm_to_mw(deployment.noise_dbm());
  double signal_mw = 0.0;
  for (int b = 0; b < n; ++b) {
    const double rx_mw =
        dbm_to_mw(deployment.cells[static_cast<std::size_t>(b)].tx_power_dbm +
                  gains_db[b]);
    if (b == serving)
      signal_mw = rx_mw;
    else
      interference_mw += rx_mw;
  }
  return 10.0 * std::log10(signal_mw / interference_mw);
}

ShadowingField::ShadowingField(int n_cells, double std_db, double decorr_m,
                               std::uint64_t seed)
    : std_db_(std_db), decorr_m_(decorr_m) {
  values_.resize(static_cast<std::size_t>(n_cells));
  streams_.resize(static_cast<std::size_t>(n_cells));
  draws_.resize(static_cast<std::size_t>(n_cells), 0);
  for (int b = 0; b < n_cells; ++b) {
    streams_[static_cast<std::size_t>(b)] =
        derive_seed(seed, {0x5ad0u, static_cast<std::uint64_t>(b)});
    // Stationary start.
    values_[static_cast<std::size_t>(b)] =
        std_db_ * hashed_normal(derive_seed(
                      streams_[static_cast<std::size_t>(b)], {0}));
  }
}

void ShadowingField::advance(double step_m) {
  if (step_m <= 0.0) return;
  const double rho = std::exp(-step_m / decorr_m_);
  const double innov = std_db_ * std::sqrt(1.0 - rho * rho);
  for (std::size_t b = 0; b < values_.size(); ++b) {
    ++draws_[b];
    values_[b] = rho * values_[b] +
                 innov * hashed_normal(derive_seed(streams_[b], {draws_[b]}));
  }
}

double channel_gain_db(const CellConfig& cell, const Vec3& pos, bool los,
                       double shadow_db, const PropagationParams& params) {
  return antenna_gain_db(cell, pos) - pathloss_db(cell, pos, los, params) +
         shadow_db;
}

RadioSample sample_radio(const Deployment& deployment, const Vec3& pos,
                         long tick, const std::vector<bool>& los,
                         const ShadowingField& shadow,
                         const PropagationParams& params, std::uint64_t seed) {
  const int n = deployment.n_cells();
  RadioSample s;
  s.tick = tick;
  s.rsrp_dbm = Eigen::ArrayXd(n);
  s.gain_db = Eigen::ArrayXd(n);
  for (int b = 0; b < n; ++b) {
    const CellConfig& cell = deployment.cells[static_cast<std::size_t>(b)];
    const double g = channel_gain_db(cell, pos, los[static_cast<std::size_t>(b)],
                                     shadow.value_db(b), params);
    s.gain_db[b] = g;
    const double jitter =
        params.jitter_std_db *
        hashed_normal(derive_seed(seed, {0x11f7u, static_cast<std::uint64_t>(tick),
                                         static_cast<std::uint64_t>(b)}));
    s.rsrp_dbm[b] = cell.tx_power_dbm + g + jitter;
  }
  return s;
}

RadioTrace build_radio_trace(const Deployment& deployment,
                             const Trajectory& trajectory,
                             const PropagationParams& params) {
  const int n = deployment.n_cells();
  const long ticks = trajectory.ticks();
  if (ticks == 0) throw std::invalid_argument("empty trajectory");

  RadioTrace trace;
  trace.rsrp_dbm = Eigen::MatrixXd(ticks, n);
  trace.gain_db = Eigen::MatrixXd(ticks, n);
  trace.los.resize(static_cast<std::size_t>(n));

  // LoS state is resolved once per (cell, trajectory) at a representative
  // distance (the trajectory midpoint) and held fixed along the route.
  const Vec3& mid =
      trajectory.positions[static_cast<std::size_t>(ticks / 2)];
  Rng los_rng(derive_seed(trajectory.seed, {0x105u}));
  for (int b = 0; b < n; ++b) {
    const CellConfig& cell = deployment.cells[static_cast<std::size_t>(b)];
    if (mid.z > params.always_los_above_m) {
      trace.los[static_cast<std::size_t>(b)] = true;
    } else {
      const double d2d = dist2d(cell.site, mid);
      trace.los[static_cast<std::size_t>(b)] =
          los_rng.bernoulli(los_probability(d2d));
    }
  }

  ShadowingField shadow(n, params.shadow_std_db, params.shadow_decorr_m,
                        derive_seed(trajectory.seed, {0x5ad0u}));
  const double step_m = kmh_to_ms(trajectory.speed_kmh) * trajectory.tick_s;

  for (long t = 0; t < ticks; ++t) {
    if (t > 0) shadow.advance(step_m);
    const RadioSample s =
        sample_radio(deployment, trajectory.positions[static_cast<std::size_t>(t)],
                     t, trace.los, shadow, params, trajectory.seed);
    trace.rsrp_dbm.row(t) = s.rsrp_dbm.transpose();
    trace.gain_db.row(t) = s.gain_db.transpose();
  }
  return trace;
}

void dump_gain_map_csv(const Deployment& deployment,
                       const PropagationParams& params, double altitude_m,
                       double grid_step_m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write gain map: " + path);
  out << "cell_id,x,y,z,gain_db\n";
  char buf[160];
  for (const CellConfig& cell : deployment.cells) {
    for (double y = 0.0; y <= deployment.area_y_m; y += grid_step_m) {
      for (double x = 0.0; x <= deployment.area_x_m; x += grid_step_m) {
        const Vec3 pos{x, y, altitude_m};
        const bool los = altitude_m > params.always_los_above_m ||
                         los_probability(dist2d(cell.site, pos)) >= 0.5;
        const double g = channel_gain_db(cell, pos, los, 0.0, params);
        std::snprintf(buf, sizeof(buf), "%d,%.1f,%.1f,%.1f,%.3f\n",
                      cell.cell_id, x, y, altitude_m, g);
        out << buf;
      }
    }
  }
}

}  // namespace homove

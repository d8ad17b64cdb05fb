#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace homove {

// One sector antenna. site.z is the antenna height; tilt is mechanical plus
// electrical downtilt, positive pointing below the horizon.
struct CellConfig {
  int cell_id = 0;
  Vec3 site;
  double azimuth_deg = 0.0;
  double tilt_deg = 0.0;
  double tx_power_dbm = 46.0;
};

struct Deployment {
  std::vector<CellConfig> cells;
  double area_x_m = 1400.0;
  double area_y_m = 1275.0;
  double carrier_hz = 2e9;
  double bandwidth_hz = 1e7;
  double noise_psd_dbm_hz = -174.0;

  int n_cells() const { return static_cast<int>(cells.size()); }

  // Thermal noise over the full bandwidth: -104 dBm for 10 MHz.
  double noise_dbm() const;
};

struct Street {
  int street_id = 0;
  std::vector<Vec2> waypoints;
  double altitude_m = 1.5;

  double length_m() const;
};

enum class Direction { kForward, kReverse };

// Positions sampled every tick along a street polyline at constant speed.
struct Trajectory {
  int street_id = 0;
  double speed_kmh = 3.0;
  double tick_s = 0.040;
  std::uint64_t seed = 0;
  std::vector<Vec3> positions;

  int ticks() const { return static_cast<int>(positions.size()); }
};

struct Scenario {
  Deployment deployment;
  std::vector<Street> streets;
};

// Seeded synthetic stand-in for a production macro deployment: 10 sites
// placed blue-noise style (minimum inter-site distance 200 m) on a
// 1400 x 1275 m area, three sectors per site at azimuths {0, 120, 240},
// antenna heights uniform in [22, 56] m, 46 dBm per cell.
//
// With aerial_coverage set, one sector per site is uptilted so that a
// 150 m corridor sees usable signal; the other sectors keep their ground
// tilts. Same site geometry either way.
Deployment build_reference_deployment(std::uint64_t seed,
                                      bool aerial_coverage = false);

// Five seeded polylines, 400-900 m each, routed through the deployment so
// they cross several cell boundaries. Ground altitude (1.5 m).
std::vector<Street> build_reference_streets(std::uint64_t seed,
                                            const Deployment& deployment);

Scenario build_reference_scenario(std::uint64_t seed,
                                  bool aerial_coverage = false);

// Walks the street polyline at speed_kmh, emitting one position every
// tick_s, clamped at the street end. Throws on non-positive speed/tick or a
// degenerate (zero length) street.
Trajectory sample_trajectory(const Street& street, double speed_kmh,
                             double tick_s, Direction direction,
                             std::uint64_t seed);

// Scenario file round-trip (JSON, schema 1).
std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const Scenario& scenario, const std::string& path);
Scenario load_scenario(const std::string& path);

}  // namespace homove

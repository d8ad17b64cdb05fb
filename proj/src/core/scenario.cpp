#include "core/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/units.hpp"

namespace homove {

using nlohmann::json;

double Deployment::noise_dbm() const {
  return noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz);
}

double Street::length_m() const {
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i)
    total += dist2d(waypoints[i - 1], waypoints[i]);
  return total;
}

namespace {

constexpr double kSiteMinDistanceM = 200.0;
constexpr double kSiteEdgeMarginM = 120.0;
constexpr double kStreetEdgeMarginM = 120.0;
constexpr int kReferenceSites = 10;
constexpr int kSectorsPerSite = 3;

}  // namespace

Deployment build_reference_deployment(std::uint64_t seed,
                                      bool aerial_coverage) {
  Deployment dep;
  Rng rng(derive_seed(seed, {0x5173}));

  // Dart-throwing blue noise for the site layout.
  std::vector<Vec2> sites;
  int attempts = 0;
  while (static_cast<int>(sites.size()) < kReferenceSites) {
    Vec2 p{rng.uniform(kSiteEdgeMarginM, dep.area_x_m - kSiteEdgeMarginM),
           rng.uniform(kSiteEdgeMarginM, dep.area_y_m - kSiteEdgeMarginM)};
    bool ok = true;
    for (const Vec2& q : sites)
      if (dist2d(p, q) < kSiteMinDistanceM) {
        ok = false;
        break;
      }
    if (ok) sites.push_back(p);
    if (++attempts > 100000)
      throw std::runtime_error("site placement did not converge");
  }

  int cell_id = 0;
  for (int s = 0; s < kReferenceSites; ++s) {
    const double height_m = rng.uniform(22.0, 56.0);
    const double down_tilt = rng.uniform(5.0, 9.0);
    const double up_tilt = -rng.uniform(8.0, 12.0);
    const double az0 = rng.uniform(0.0, 360.0);
    for (int k = 0; k < kSectorsPerSite; ++k) {
      CellConfig c;
      c.cell_id = cell_id++;
      c.site = Vec3{sites[static_cast<std::size_t>(s)].x,
                    sites[static_cast<std::size_t>(s)].y, height_m};
      c.azimuth_deg = wrap_deg(az0 + 120.0 * k);
      c.tilt_deg = (aerial_coverage && k == 0) ? up_tilt : down_tilt;
      c.tx_power_dbm = 46.0;
      dep.cells.push_back(c);
    }
  }
  return dep;
}

std::vector<Street> build_reference_streets(std::uint64_t seed,
                                            const Deployment& deployment) {
  std::vector<Street> streets;
  Rng rng(derive_seed(seed, {0x57a3}));
  const double ax = deployment.area_x_m;
  const double ay = deployment.area_y_m;

  for (int id = 0; id < 5; ++id) {
    Street st;
    st.street_id = id;
    st.altitude_m = 1.5;

    const double target_len = rng.uniform(400.0, 900.0);
    const int segments = 4 + rng.uniform_int(4);
    const double seg_len = target_len / segments;

    Vec2 p{rng.uniform(kStreetEdgeMarginM + 100.0, ax - kStreetEdgeMarginM - 100.0),
           rng.uniform(kStreetEdgeMarginM + 100.0, ay - kStreetEdgeMarginM - 100.0)};
    double heading = rng.uniform(0.0, 2.0 * kPi);
    st.waypoints.push_back(p);

    for (int s = 0; s < segments; ++s) {
      if (s > 0) {
        // Urban-style corners: frequent sharp turns force serving-cell
        // changes over short distances.
        const double turn = rng.uniform(35.0, 100.0);
        heading += deg_to_rad(rng.bernoulli(0.5) ? turn : -turn);
      }
      Vec2 q{p.x + seg_len * std::cos(heading),
             p.y + seg_len * std::sin(heading)};
      // Steer back toward the interior rather than clipping the segment,
      // so segment lengths (and the street total) stay as drawn.
      int bounce = 0;
      while ((q.x < kStreetEdgeMarginM || q.x > ax - kStreetEdgeMarginM ||
              q.y < kStreetEdgeMarginM || q.y > ay - kStreetEdgeMarginM) &&
             bounce < 64) {
        const double to_center =
            std::atan2(ay / 2.0 - p.y, ax / 2.0 - p.x);
        heading = to_center + deg_to_rad(rng.uniform(-30.0, 30.0));
        q = Vec2{p.x + seg_len * std::cos(heading),
                 p.y + seg_len * std::sin(heading)};
        ++bounce;
      }
      st.waypoints.push_back(q);
      p = q;
    }
    streets.push_back(std::move(st));
  }
  return streets;
}

Scenario build_reference_scenario(std::uint64_t seed, bool aerial_coverage) {
  Scenario sc;
  sc.deployment = build_reference_deployment(seed, aerial_coverage);
  sc.streets = build_reference_streets(seed, sc.deployment);
  return sc;
}

Trajectory sample_trajectory(const Street& street, double speed_kmh,
                             double tick_s, Direction direction,
                             std::uint64_t seed) {
  if (speed_kmh <= 0.0)
    throw std::invalid_argument("trajectory speed must be > 0");
  if (tick_s <= 0.0) throw std::invalid_argument("trajectory tick must be > 0");
  if (street.waypoints.size() < 2)
    throw std::invalid_argument("street needs at least 2 waypoints");
  const double total_len = street.length_m();
  if (total_len <= 0.0) throw std::invalid_argument("degenerate street");

  const double step_m = kmh_to_ms(speed_kmh) * tick_s;
  const int n_steps =
      static_cast<int>(std::ceil(total_len / step_m - 1e-9));

  Trajectory traj;
  traj.street_id = street.street_id;
  traj.speed_kmh = speed_kmh;
  traj.tick_s = tick_s;
  traj.seed = seed;
  traj.positions.reserve(static_cast<std::size_t>(n_steps) + 1);

  // Walk the polyline once; sampling arcs are monotone.
  std::size_t seg = 0;
  double seg_start_arc = 0.0;
  double seg_len = dist2d(street.waypoints[0], street.waypoints[1]);
  for (int k = 0; k <= n_steps; ++k) {
    const double arc = std::min(k * step_m, total_len);
    while (arc > seg_start_arc + seg_len &&
           seg + 2 < street.waypoints.size()) {
      seg_start_arc += seg_len;
      ++seg;
      seg_len = dist2d(street.waypoints[seg], street.waypoints[seg + 1]);
    }
    const double t =
        seg_len > 0.0 ? std::clamp((arc - seg_start_arc) / seg_len, 0.0, 1.0)
                      : 0.0;
    const Vec2& a = street.waypoints[seg];
    const Vec2& b = street.waypoints[seg + 1];
    traj.positions.push_back(Vec3{a.x + t * (b.x - a.x),
                                  a.y + t * (b.y - a.y), street.altitude_m});
  }

  if (direction == Direction::kReverse)
    std::reverse(traj.positions.begin(), traj.positions.end());
  return traj;
}

namespace {

json scenario_json(const Scenario& sc) {
  json j;
  j["schema"] = 1;
  j["constants"] = {{"area_m", {sc.deployment.area_x_m, sc.deployment.area_y_m}},
                    {"bandwidth_hz", sc.deployment.bandwidth_hz},
                    {"carrier_hz", sc.deployment.carrier_hz},
                    {"noise_psd_dbm_hz", sc.deployment.noise_psd_dbm_hz}};
  j["cells"] = json::array();
  for (const CellConfig& c : sc.deployment.cells) {
    j["cells"].push_back({{"cell_id", c.cell_id},
                          {"site", {c.site.x, c.site.y, c.site.z}},
                          {"azimuth_deg", c.azimuth_deg},
                          {"tilt_deg", c.tilt_deg},
                          {"tx_power_dbm", c.tx_power_dbm}});
  }
  j["streets"] = json::array();
  for (const Street& s : sc.streets) {
    json w = json::array();
    for (const Vec2& p : s.waypoints) w.push_back({p.x, p.y});
    j["streets"].push_back({{"street_id", s.street_id},
                            {"altitude_m", s.altitude_m},
                            {"waypoints", w}});
  }
  return j;
}

Scenario scenario_parse(const json& j) {
  if (!j.is_object() || j.value("schema", 0) != 1)
    throw ConfigError("scenario file: missing or unsupported schema");
  Scenario sc;
  const json& cst = j.at("constants");
  const auto& area = cst.at("area_m");
  sc.deployment.area_x_m = area.at(0).get<double>();
  sc.deployment.area_y_m = area.at(1).get<double>();
  sc.deployment.bandwidth_hz = cst.value("bandwidth_hz", 1e7);
  sc.deployment.carrier_hz = cst.value("carrier_hz", 2e9);
  sc.deployment.noise_psd_dbm_hz = cst.value("noise_psd_dbm_hz", -174.0);

  std::set<int> seen_ids;
  for (const json& c : j.at("cells")) {
    CellConfig cc;
    cc.cell_id = c.at("cell_id").get<int>();
    cc.site = Vec3{c.at("site").at(0).get<double>(),
                   c.at("site").at(1).get<double>(),
                   c.at("site").at(2).get<double>()};
    cc.azimuth_deg = c.at("azimuth_deg").get<double>();
    cc.tilt_deg = c.at("tilt_deg").get<double>();
    cc.tx_power_dbm = c.value("tx_power_dbm", 46.0);
    if (!seen_ids.insert(cc.cell_id).second)
      throw ConfigError("scenario file: duplicate cell_id " +
                        std::to_string(cc.cell_id));
    sc.deployment.cells.push_back(cc);
  }
  if (sc.deployment.cells.empty())
    throw ConfigError("scenario file: no cells");

  for (const json& s : j.value("streets", json::array())) {
    Street st;
    st.street_id = s.at("street_id").get<int>();
    st.altitude_m = s.value("altitude_m", 1.5);
    for (const json& w : s.at("waypoints"))
      st.waypoints.push_back(Vec2{w.at(0).get<double>(), w.at(1).get<double>()});
    if (st.waypoints.size() < 2)
      throw ConfigError("scenario file: street " +
                        std::to_string(st.street_id) + " has < 2 waypoints");
    for (std::size_t i = 1; i < st.waypoints.size(); ++i)
      if (dist2d(st.waypoints[i - 1], st.waypoints[i]) <= 0.0)
        throw ConfigError("scenario file: street " +
                          std::to_string(st.street_id) +
                          " has coincident consecutive waypoints");
    sc.streets.push_back(std::move(st));
  }
  return sc;
}

}  // namespace

std::string scenario_to_json(const Scenario& scenario) {
  return scenario_json(scenario).dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario file: invalid JSON: ") + e.what());
  }
  return scenario_parse(j);
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path);
  out << scenario_to_json(scenario);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

}  // namespace homove

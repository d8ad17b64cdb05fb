#pragma once

#include <cmath>

namespace homove {

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }
inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double kmh_to_ms(double kmh) { return kmh * (1000.0 / 3600.0); }

constexpr double kPi = 3.14159265358979323846;
inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle in degrees into (-180, 180].
inline double wrap_deg(double deg) {
  double a = std::fmod(deg + 180.0, 360.0);
  if (a <= 0.0) a += 360.0;
  return a - 180.0;
}

}  // namespace homove

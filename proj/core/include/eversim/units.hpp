#pragma once

#include <cmath>
#include <numbers>

namespace eversim {

// All library quantities are SI (m, N, Pa, N*m, s) except pressures, which
// are kPa like the regulator, and angles at external boundaries, which are
// degrees. Internally angles are radians.

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kGravity = 9.81;  // m/s^2, as used for servo datasheet conversion

constexpr double deg_to_rad(double deg) noexcept { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / kPi; }

// Wraps an azimuth into [0, 360).
inline double normalize_azimuth_deg(double deg) noexcept {
  double a = std::fmod(deg, 360.0);
  if (a < 0.0) a += 360.0;
  if (a >= 360.0) a -= 360.0;
  return a;
}

// Smallest absolute difference between two azimuths, in [0, 180].
inline double azimuth_distance_deg(double a, double b) noexcept {
  const double d = std::fabs(normalize_azimuth_deg(a) - normalize_azimuth_deg(b));
  return d > 180.0 ? 360.0 - d : d;
}

}  // namespace eversim

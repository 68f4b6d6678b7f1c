#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace ambient {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
  double norm() const { return std::sqrt(dot(*this, *this)); }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

// How a reflector's path distance d maps to delay. The model default is
// tau = d / c (d already a full path length); RoundTrip treats d as the
// one-way range and doubles it.
enum class PathModel { OneWay, RoundTrip };

inline double delay_of(double distance_m, PathModel model) {
  return (model == PathModel::RoundTrip ? 2.0 : 1.0) * distance_m / kSpeedOfLight;
}

// Hot kernels ship a straightforward serial version (kept as the reference
// the tests compare against) and an OpenMP version.
enum class Exec { Serial, Parallel };

}  // namespace ambient

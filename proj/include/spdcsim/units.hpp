#pragma once

#include <numbers>

namespace spdcsim {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Angular frequency (rad/s) of light with the given vacuum wavelength (m).
constexpr double angular_frequency(double wavelength) { return 2.0 * kPi * kSpeedOfLight / wavelength; }

/// Vacuum wavelength (m) of light at angular frequency omega (rad/s).
constexpr double vacuum_wavelength(double omega) { return 2.0 * kPi * kSpeedOfLight / omega; }

/// Vacuum wavenumber omega / c (rad/m).
constexpr double vacuum_wavenumber(double omega) { return omega / kSpeedOfLight; }

/// Angular-frequency width equivalent to a wavelength width around a centre
/// wavelength, d(omega) = 2 pi c d(lambda) / lambda^2.
constexpr double angular_bandwidth(double center_wavelength, double wavelength_width) {
  return 2.0 * kPi * kSpeedOfLight * wavelength_width / (center_wavelength * center_wavelength);
}

}  // namespace spdcsim

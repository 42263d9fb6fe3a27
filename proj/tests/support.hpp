#pragma once

#include <cmath>

#include "spdcsim/config.hpp"
#include "spdcsim/crystal.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim::test {

// Independent references: evaluate the Eimerl BBO data directly and find the
// extraordinary k_z by fixed-point iteration on the propagation angle instead
// of the closed-form quadratic the library uses.
struct Oracle {
  double cut_angle;
  double axis_sign = 1.0;

  static double sellmeier(double wavelength, double a, double b, double c, double d) {
    const double l = wavelength * 1e6;
    return std::sqrt(a + b / (l * l - c) - d * l * l);
  }
  static double n_o(double wavelength) { return sellmeier(wavelength, 2.7405, 0.0184, 0.0179, 0.0155); }
  static double n_e(double wavelength) { return sellmeier(wavelength, 2.3730, 0.0128, 0.0156, 0.0044); }

  double kz_e(double kx, double omega) const {
    const double lambda = 2.0 * kPi * kSpeedOfLight / omega;
    const double k0 = omega / kSpeedOfLight;
    const double o = n_o(lambda), e = n_e(lambda);
    const double ax = axis_sign * std::sin(cut_angle), az = std::cos(cut_angle);
    double kz = o * k0;
    for (int i = 0; i < 200; ++i) {
      const double ct = (kx * ax + kz * az) / std::hypot(kx, kz);
      const double n = 1.0 / std::sqrt(ct * ct / (o * o) + (1.0 - ct * ct) / (e * e));
      kz = std::sqrt(n * n * k0 * k0 - kx * kx);
    }
    return kz;
  }
  static double kz_o(double kx, double omega) {
    const double n = n_o(2.0 * kPi * kSpeedOfLight / omega);
    const double k = n * omega / kSpeedOfLight;
    return std::sqrt(k * k - kx * kx);
  }
  // Signal ordinary, idler extraordinary.
  double delta_kz(double ks, double ki, double kp, double ws, double wi, double wp) const {
    return kz_e(ks + ki - kp, wp) - kz_o(ks, ws) - kz_e(ki, wi);
  }
};

inline CrystalSpec default_crystal() { return default_config().crystal_spec(); }
inline double pump_frequency() { return default_config().pump_frequency(); }

}  // namespace spdcsim::test

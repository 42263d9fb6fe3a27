#include "spdcsim/propagation.hpp"

#include <cmath>

#include <fmt/format.h>

#include "spdcsim/errors.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

namespace {
constexpr double kMaxD = 1e3;  // m
}

void OpticalTrain::validate() const {
  if (!(focal > 0.0 && p > 0.0 && q > 0.0)) throw ConfigError("focal length, p and q must be positive");
  if (!(wavelength > 0.0)) throw ConfigError("train wavelength must be positive");
  (void)d();
}

double OpticalTrain::d() const {
  const double inv = 1.0 / focal - 1.0 / p - 1.0 / q;
  if (!(std::abs(inv) * kMaxD > 1.0)) {
    throw ConfigError(fmt::format("degenerate optical train: 1/D = {:.3e} 1/m (f = {}, p = {}, q = {})", inv,
                                  focal, p, q));
  }
  return 1.0 / inv;
}

double OpticalTrain::scale() const { return wavelength * p * q / (2.0 * kPi * d()); }

double OpticalTrain::effective_focal_length() const { return std::abs(p * q / d()); }

OpticalTrain OpticalTrain::focal_reference(double focal, double wavelength) {
  return {focal, focal, focal, wavelength};
}

double map_centroid(double k_sx0, const OpticalTrain& train) { return k_sx0 * train.scale(); }

double map_width(double w_s, const OpticalTrain& train) {
  if (!(w_s > 0.0)) throw InputError("signal width must be positive");
  return std::abs(train.scale()) / w_s;
}

double scaling_factor(double measured_width, double focal_plane_width) {
  if (!(measured_width > 0.0 && focal_plane_width > 0.0)) throw InputError("widths must be positive");
  return measured_width / focal_plane_width;
}

}  // namespace spdcsim

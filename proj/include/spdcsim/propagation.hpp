#pragma once

namespace spdcsim {

/// Crystal -> lens (distance p) -> detector (distance q) with a thin lens of
/// focal length f, for light of wavelength lambda.
struct OpticalTrain {
  double focal = 0.3;  // m
  double p = 0.3;      // m
  double q = 0.3;      // m
  double wavelength = 808e-9;

  /// 1/D = 1/f - 1/p - 1/q. ConfigError when |D| > 1e3 m.
  double d() const;
  /// lambda p q / (2 pi D), the factor shared by the centroid and width maps.
  double scale() const;
  /// |p q / D|: the focal length a detector would need in its own focal plane
  /// to reproduce this train's angular magnification.
  double effective_focal_length() const;
  void validate() const;

  /// Detector in the back focal plane (p = f). The scale is then -lambda f / 2 pi
  /// for any q, so q = f is taken.
  static OpticalTrain focal_reference(double focal, double wavelength);
};

/// x0 = k_sx0 lambda p q / (2 pi D). The sign of the map is kept; the harness
/// absorbs the lens inversion into array indexing.
double map_centroid(double k_sx0, const OpticalTrain& train);

/// w_out = (1/w_s) |lambda p q / (2 pi D)|.
double map_width(double w_s, const OpticalTrain& train);

/// measured / focal-plane width.
double scaling_factor(double measured_width, double focal_plane_width);

}  // namespace spdcsim

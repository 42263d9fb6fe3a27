#pragma once

#include <array>
#include <string>
#include <vector>

#include "spdcsim/errors.hpp"
#include "spdcsim/histogram.hpp"

namespace spdcsim {

/// A exp(-(x - c)^2 / w^2) + b fitted over pixel indices.
struct GaussianFit {
  double amplitude = 0.0;
  double center = 0.0;  // pixels
  double width = 0.0;   // pixels, 1/e half-width; 2w is the 13.5% diameter
  double offset = 0.0;
  double amplitude_sigma = 0.0;
  double center_sigma = 0.0;
  double width_sigma = 0.0;
  double offset_sigma = 0.0;
  double reduced_chi2 = 0.0;
  int iterations = 0;

  double diameter() const { return 2.0 * width; }
  double eval(double x) const;
};

/// One Levenberg-Marquardt iterate: (A, c, w, b) and the weighted residual norm.
struct FitIterate {
  std::array<double, 4> parameters{};
  double residual_norm = 0.0;
};

class FitError : public SpdcError {
 public:
  FitError(const std::string& what, std::vector<FitIterate> trace) : SpdcError(what), trace_(std::move(trace)) {}
  const std::vector<FitIterate>& trace() const noexcept { return trace_; }

 private:
  std::vector<FitIterate> trace_;
};

enum class FitWeights {
  poisson,  // variance max(y, 1); covariance taken as absolute
  uniform   // unit weights; covariance scaled by the reduced chi^2
};

/// Fits counts over live pixels with Poisson weights.
GaussianFit fit_gaussian(const PixelHistogram& h);

/// Fits arbitrary per-pixel values (e.g. expected counts or probabilities).
GaussianFit fit_gaussian(const std::vector<double>& values, const std::vector<bool>& live,
                         FitWeights weights = FitWeights::poisson);

/// Affine pixel <-> external signal angle map. Pixel `reference_pixel` looks
/// along `reference_angle_deg`; one pixel step is `degrees_per_pixel`.
struct PixelCalibration {
  double reference_pixel = 16.0;
  double reference_angle_deg = 3.0;
  double degrees_per_pixel = 0.0;

  double angle_of(double pixel) const { return reference_angle_deg + (pixel - reference_pixel) * degrees_per_pixel; }
  double pixel_of(double angle_deg) const {
    return reference_pixel + (angle_deg - reference_angle_deg) / degrees_per_pixel;
  }
};

/// Angle (deg) seen by a fractional pixel position.
double angle_from_center(double center, const PixelCalibration& calib);

struct LinearPoint {
  double x = 0.0;
  double y = 0.0;
  double sigma = 1.0;
};

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_sigma = 0.0;
  double slope_sigma = 0.0;
  double covariance = 0.0;  // cov(intercept, slope)
  double chi2 = 0.0;
};

/// Weighted least squares y = intercept + slope x with weights 1/sigma^2.
/// Uncertainties come from the inverse normal matrix.
LinearFit fit_linear(const std::vector<LinearPoint>& points);

/// Pearson correlation of two equal-length series restricted to `live`.
double correlation(const std::vector<double>& a, const std::vector<double>& b, const std::vector<bool>& live);

}  // namespace spdcsim

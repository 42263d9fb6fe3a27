#pragma once

#include <stdexcept>
#include <string>

namespace spdcsim {

/// Base class of every error raised by the simulator.
class SpdcError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the physical domain of a model (wavelength out of
/// the dispersion range, evanescent longitudinal component, ...).
class DomainError : public SpdcError {
 public:
  using SpdcError::SpdcError;
};

/// A caller-side precondition does not hold.
class InputError : public SpdcError {
 public:
  using SpdcError::SpdcError;
};

class ConfigError : public SpdcError {
 public:
  using SpdcError::SpdcError;
};

class NoPhaseMatchingError : public SpdcError {
 public:
  using SpdcError::SpdcError;
};

/// Adaptive quadrature could not reach its tolerance.
class NumericFailure : public SpdcError {
 public:
  NumericFailure(const std::string& what, double residual) : SpdcError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Cut-angle calibration could not bracket the target angle.
class CalibrationError : public SpdcError {
 public:
  CalibrationError(const std::string& what, double min_angle_deg, double max_angle_deg)
      : SpdcError(what), min_angle_deg_(min_angle_deg), max_angle_deg_(max_angle_deg) {}
  double min_angle_deg() const noexcept { return min_angle_deg_; }
  double max_angle_deg() const noexcept { return max_angle_deg_; }

 private:
  double min_angle_deg_;
  double max_angle_deg_;
};

}  // namespace spdcsim

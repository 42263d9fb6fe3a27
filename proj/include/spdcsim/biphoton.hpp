#pragma once

#include <cmath>

#include "spdcsim/crystal.hpp"
#include "spdcsim/wavevector.hpp"

namespace spdcsim {

enum class FilterShape { gaussian, tophat };

/// Bandpass filter on the idler arm. `fwhm` is the full width at half maximum
/// of the intensity transmission |Lambda|^2.
struct FilterSpec {
  double center = 0.0;  // rad/s
  double fwhm = 0.0;    // rad/s
  FilterShape shape = FilterShape::gaussian;

  void validate() const;
};

/// Transmission amplitude Lambda(omega). Gaussian: exp(-2 ln2 (w - c)^2 / fwhm^2).
double filter_amplitude(double omega, const FilterSpec& filter);

/// Pump beam and the phase-matched daughter directions it produces.
struct BeamGeometry {
  TransverseWavevector pump;
  double waist = 100e-6;  // m, w_p as it appears in exp(-w_p^2/2 (...)^2)
  double pump_frequency = 0.0;
  TransverseWavevector signal0;
  TransverseWavevector idler0;

  static BeamGeometry from_phase_matching(const PhaseMatchPoint& point, double waist);
  void validate() const;
  double degenerate_frequency() const { return 0.5 * pump_frequency; }
};

/// sin(x)/x with the removable singularity filled in.
double sinc(double x);

/// exp(-x^2/5), the Gaussian stand-in for sinc used by the closed-form model.
inline double sinc_gaussian_approximation(double x) { return std::exp(-x * x / 5.0); }

/// Pump envelope exp(-(w_p^2/2)|ks + ki - kp|^2).
double pump_envelope(TransverseWavevector ks, TransverseWavevector ki, const BeamGeometry& geom);

/// Lambda(wi) * envelope * sinc(L delta_kz / 2) with ws = wp - wi.
/// A Gaussian filter requires |wi - centre| <= 5 FWHM (InputError otherwise).
double amplitude_exact(TransverseWavevector ks, TransverseWavevector ki, double omega_i,
                       const BeamGeometry& geom, const FilterSpec& filter, const CrystalSpec& spec);

/// Closed-form approximation with the linearized mismatch inside
/// exp(-(L^2/10)(...)^2). The frequency term is written as
/// beta_s (wi - wp/2) + beta_i (wp/2 - wi), the pairing used by the model;
/// only beta_s - beta_i reaches any observable.
double amplitude_gaussian(TransverseWavevector ks, TransverseWavevector ki, double omega_i,
                          const BeamGeometry& geom, const FilterSpec& filter, const CrystalSpec& spec,
                          const ExpansionCoefficients& coeffs);

/// The bracket of amplitude_gaussian: linearized mismatch with the model's
/// beta pairing.
double gaussian_mismatch(TransverseWavevector ks, TransverseWavevector ki, double omega_i,
                         const BeamGeometry& geom, const ExpansionCoefficients& coeffs);

}  // namespace spdcsim

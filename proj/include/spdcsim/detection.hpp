#pragma once

#include <cstdint>
#include <vector>

#include "spdcsim/biphoton.hpp"
#include "spdcsim/crystal.hpp"
#include "spdcsim/histogram.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

/// Linear SPAD array.
struct SpadArraySpec {
  int n_pixels = 32;
  double pitch = 100e-6;    // m
  double diameter = 20e-6;  // m
  std::vector<int> dead_pixels{19};
  double dark_rate = 100.0;  // counts/s per pixel

  void validate() const;
  bool is_live(int pixel) const;
  std::vector<bool> live_mask() const;
};

/// Fiber-coupled idler arm: a Gaussian intensity weight
/// exp(-|ki - axis|^2 / (2 sigma_k^2)) with sigma_k = sigma * omega_p / (2c).
struct IdlerChannelSpec {
  double angular_acceptance_sigma = 1e-3;  // rad
  double coupling_efficiency = 0.025;
  TransverseWavevector axis;  // fiber direction

  void validate() const;
  /// sigma_k in rad/m for an idler of angular frequency omega.
  double sigma_k(double omega) const { return angular_acceptance_sigma * vacuum_wavenumber(omega); }
};

enum class AccidentalModel { none, rate_product };

struct CoincidenceSettings {
  double window = 2e-9;  // s
  AccidentalModel accidental_model = AccidentalModel::rate_product;
  double spad_singles_rate = 1e4;  // counts/s per pixel, before dark counts
  double spcm_singles_rate = 1e5;  // counts/s

  void validate() const;
};

/// Range of signal wavevectors one pixel of diameter d sees behind a lens of
/// focal length f: 2 pi d / (lambda0 f).
double pixel_delta_k(const SpadArraySpec& array, double focal, double lambda0);

/// k_sx = 2 pi sin(alpha_s) / lambda0.
double pixel_wavevector(double alpha_s, double lambda0);

enum class IntegrationMethod { analytic, numeric };

struct IntegrationSettings {
  /// Half-range of the idler-frequency integral in filter FWHM around the
  /// filter centre. 0 means unbounded (analytic method only).
  double frequency_span_fwhm = 0.0;
  /// Half-range of the idler-wavevector integral of the numeric method, in
  /// units of sigma_k.
  double idler_span_sigma = 7.0;
  /// Frequency half-range of the numeric method, in FWHM.
  double numeric_frequency_span_fwhm = 5.0;
  double relative_tolerance = 1e-4;
  double absolute_floor = 1e-12;
  unsigned max_depth = 15;
};

/// Signal-wavevector density of the closed-form model after integrating over
/// idler wavevector and (unbounded) idler frequency:
/// density(k) = peak * exp(-(k - mean)^2 / width^2).
struct SignalMarginal {
  double mean = 0.0;   // rad/m
  double width = 0.0;  // rad/m, 1/e half-width of the intensity
  double peak = 0.0;   // (rad/m)^-1 (rad/s)

  double density(double k) const;
  /// Integral over [k1, k2].
  double integral(double k1, double k2) const;
};

/// Requires a Gaussian filter.
SignalMarginal signal_marginal(const BeamGeometry& geom, const FilterSpec& filter, const CrystalSpec& spec,
                               const ExpansionCoefficients& coeffs, const IdlerChannelSpec& idler);

/// Coincidence probability (unnormalized) of a pixel centred on k_sx with
/// acceptance dk, integrated over the idler's wavevector and frequency.
///
/// `analytic` integrates |amplitude_gaussian|^2 in closed form and needs a
/// Gaussian filter. `numeric` runs nested adaptive Gauss-Kronrod quadrature of
/// |amplitude_exact|^2 and throws NumericFailure when the tolerance is missed.
/// Both return the same quantity in the same units.
double coincidence_probability(double k_sx, const BeamGeometry& geom, const FilterSpec& filter,
                               const CrystalSpec& spec, const ExpansionCoefficients& coeffs,
                               const IdlerChannelSpec& idler, double dk, IntegrationMethod method,
                               const IntegrationSettings& settings = {});

/// Per-pixel expected counts:
/// pair_rate * duration * P[i] * coupling_efficiency + accidentals[i], with
/// rate_product accidentals (spad_singles + dark_rate) * spcm_singles * window
/// * duration. Dead pixels read 0. `profile` must sum to at most 1 over live
/// pixels.
std::vector<double> expected_counts(const std::vector<double>& profile, double pair_rate, double duration,
                                    const CoincidenceSettings& settings, const SpadArraySpec& array,
                                    const IdlerChannelSpec& idler);

/// profile / sum(profile over live pixels), dead pixels set to 0.
std::vector<double> normalize_profile(const std::vector<double>& profile, const SpadArraySpec& array);

/// Independent Poisson draw per pixel from a generator seeded with `seed`.
/// `live` (default: all live) is copied into the histogram mask.
PixelHistogram sample_histogram(const std::vector<double>& expected, std::uint64_t seed,
                                const std::vector<bool>& live = {});

}  // namespace spdcsim

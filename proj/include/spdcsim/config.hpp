#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spdcsim/biphoton.hpp"
#include "spdcsim/crystal.hpp"
#include "spdcsim/detection.hpp"
#include "spdcsim/propagation.hpp"

namespace spdcsim {

/// Everything a sweep depends on, in the units used by the config file.
struct ExperimentConfig {
  struct Crystal {
    double length_mm = 1.0;
    double cut_angle_deg = 43.856707494884;  // calibrated for the default data set
    std::string dispersion{kDefaultDispersion};
    Polarization signal_polarization = Polarization::ordinary;
  } crystal;

  struct Pump {
    double wavelength_nm = 404.0;
    double waist_um = 100.0;
  } pump;

  struct Filter {
    double center_nm = 808.0;
    double fwhm_nm = 10.0;
    FilterShape shape = FilterShape::gaussian;
  } filter;

  struct Array {
    int n_pixels = 32;
    double pitch_um = 100.0;
    double diameter_um = 20.0;
    std::vector<int> dead_pixels{19};
    double dark_rate_hz = 100.0;
    double reference_pixel = 16.0;
  } array;

  struct Idler {
    double acceptance_sigma_mrad = 1.0;
    double coupling_efficiency = 0.025;
  } idler;

  struct Train {
    double focal_m = 0.3;
    double p_m = 0.3;
    double q_m = 0.3;
    double wavelength_nm = 808.0;
  } train;

  struct Sweep {
    std::vector<double> alpha_p_deg{-0.092, -0.069, -0.046, -0.023, 0.0, 0.023, 0.046, 0.069, 0.092};
    double target_alpha_s_deg = 3.0;
    double calibration_window_deg = 1.0;
  } sweep;

  struct Acquisition {
    double duration_s = 60.0;
    double pair_rate_hz = 2000.0;
    std::uint64_t seed = 42;
  } acquisition;

  struct Coincidence {
    double window_ns = 2.0;
    AccidentalModel accidental_model = AccidentalModel::rate_product;
    double spad_singles_hz = 1e4;
    double spcm_singles_hz = 1e5;
  } coincidence;

  struct Integration {
    double relative_tolerance = 1e-4;
    double absolute_floor = 1e-12;
    double frequency_span_fwhm = 0.0;
    double idler_span_sigma = 7.0;
    double numeric_frequency_span_fwhm = 5.0;
  } integration;

  /// Builds every spec once to check all section invariants.
  void validate() const;

  CrystalSpec crystal_spec() const;
  double pump_frequency() const;
  FilterSpec filter_spec() const;
  SpadArraySpec array_spec() const;
  IdlerChannelSpec idler_spec() const;  // axis left at 0; the harness sets it
  OpticalTrain optical_train() const;
  CoincidenceSettings coincidence_settings() const;
  IntegrationSettings integration_settings() const;
  /// Degenerate (signal) vacuum wavelength 2 lambda_pump.
  double signal_wavelength() const { return 2.0 * pump.wavelength_nm * 1e-9; }
};

ExperimentConfig default_config();

/// INI text: `[section]` headers, `key = value` lines, `;` comments. Unknown
/// sections or keys are rejected; missing keys keep their defaults.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical INI text with every key in a fixed order.
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace spdcsim

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spdcsim/analysis.hpp"
#include "spdcsim/config.hpp"

namespace spdcsim {

enum class SweepMode { analytic, synthetic, oracle };

std::string to_string(SweepMode mode);
SweepMode parse_sweep_mode(const std::string& name);

/// A sweep failed at one pump angle.
class SweepError : public SpdcError {
 public:
  SweepError(const std::string& what, double alpha_p_deg) : SpdcError(what), alpha_p_deg_(alpha_p_deg) {}
  double alpha_p_deg() const noexcept { return alpha_p_deg_; }

 private:
  double alpha_p_deg_;
};

/// Trims the cut angle within +-sweep.calibration_window_deg of the configured
/// value until the pump-normal signal angle equals sweep.target_alpha_s_deg to
/// 1e-5 deg. Throws CalibrationError with the achieved angle range on failure.
CrystalSpec calibrate(const ExperimentConfig& cfg);

/// `cfg` with crystal.cut_angle_deg replaced by the calibrated value.
ExperimentConfig calibrated_config(const ExperimentConfig& cfg);

/// Geometry shared by every angle of a sweep.
struct SweepSetup {
  CrystalSpec crystal;
  FilterSpec filter;
  SpadArraySpec array;
  IdlerChannelSpec idler;  // axis along the pump-normal idler direction
  OpticalTrain train;
  PhaseMatchingSearch search;
  double pump_frequency = 0.0;
  double signal_wavelength = 0.0;
  double delta_k = 0.0;                // pixel acceptance, rad/m
  double radians_per_pixel = 0.0;      // physical pitch / |pq/D|
  double reference_angle = 0.0;        // rad, seen by the reference pixel
  std::vector<double> pixel_k;         // k_sx at each pixel centre
  PixelCalibration calibration;        // used to read angles off fitted centres
};

struct RunOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  /// Train assumed when converting pixels to angles. Defaults to the physical
  /// train; setting the focal-plane reference here mimics an experimenter
  /// who does not know the array sits off the focal plane.
  std::optional<OpticalTrain> analysis_train;
};

SweepSetup prepare_sweep(const ExperimentConfig& cfg, const RunOptions& options = {});

struct AngleResult {
  double alpha_p_deg = 0.0;
  PhaseMatchPoint point;
  ExpansionCoefficients coeffs;
  double model_alpha_s0_deg = 0.0;     // free phase-matching solution
  std::vector<double> profile;         // normalized analytic probabilities
  double peak_probability = 0.0;       // fitted peak of the unnormalized analytic profile
  std::vector<double> numeric_profile; // normalized, oracle mode only
  std::vector<double> expected;        // synthetic mode only
  std::optional<PixelHistogram> histogram;
  GaussianFit fit;                     // the fit alpha_s0 is read from
  double alpha_s0_deg = 0.0;
  double alpha_s0_sigma_deg = 0.0;
  double oracle_correlation = 0.0;     // oracle mode only
  double oracle_center_difference = 0.0;
};

struct SweepReport {
  SweepMode mode = SweepMode::analytic;
  std::vector<AngleResult> angles;
  LinearFit line;
  double flatness = 0.0;  // max |peak(alpha_p) / peak(0) - 1|
  double oracle_min_correlation = 0.0;
  double oracle_max_center_difference = 0.0;
  PixelCalibration calibration;
  double target_alpha_s_deg = 3.0;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string timestamp;  // UTC wall clock; not written by emit()
};

/// Seed of the histogram drawn at sweep index `index`.
std::uint64_t derive_seed(std::uint64_t seed, std::size_t index);

SweepReport run_sweep(const ExperimentConfig& cfg, SweepMode mode, const RunOptions& options = {});

/// Writes sweep_summary.csv, profile_<alpha_p>.csv per angle, fit_report.json
/// and acceptance.txt into `dir` (created if needed). Returns the paths.
std::vector<std::filesystem::path> emit(const SweepReport& report, const std::filesystem::path& dir);

/// File name of the per-angle profile, e.g. profile_+0.0920.csv.
std::string profile_file_name(double alpha_p_deg);

}  // namespace spdcsim

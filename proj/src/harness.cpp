#include "spdcsim/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <boost/math/tools/roots.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "spdcsim/acceptance.hpp"
#include "spdcsim/parallel.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

std::string to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::analytic: return "analytic";
    case SweepMode::synthetic: return "synthetic";
    case SweepMode::oracle: return "oracle";
  }
  return "?";
}

SweepMode parse_sweep_mode(const std::string& name) {
  if (name == "analytic") return SweepMode::analytic;
  if (name == "synthetic") return SweepMode::synthetic;
  if (name == "oracle") return SweepMode::oracle;
  throw InputError(fmt::format("unknown sweep mode '{}' (analytic, synthetic or oracle)", name));
}

namespace {

PhaseMatchingSearch search_for(const ExperimentConfig& cfg) {
  PhaseMatchingSearch s;
  s.branch_hint = deg_to_rad(cfg.sweep.target_alpha_s_deg);
  return s;
}

double normal_signal_angle_deg(const CrystalSpec& spec, double pump_frequency, const PhaseMatchingSearch& search) {
  return rad_to_deg(signal_external_angle(solve_phase_matching({0.0, 0.0}, pump_frequency, spec, search)));
}

}  // namespace

CrystalSpec calibrate(const ExperimentConfig& cfg) {
  CrystalSpec spec = cfg.crystal_spec();
  const double wp = cfg.pump_frequency();
  const auto search = search_for(cfg);
  const double target = cfg.sweep.target_alpha_s_deg;
  const double center = cfg.crystal.cut_angle_deg;
  const double window = cfg.sweep.calibration_window_deg;

  const auto offset_at = [&](double cut_deg) {
    CrystalSpec trial = spec;
    trial.cut_angle = deg_to_rad(cut_deg);
    try {
      return normal_signal_angle_deg(trial, wp, search) - target;
    } catch (const SpdcError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  const double tolerance = 1e-5;
  const double at_center = offset_at(center);
  if (std::abs(at_center) < 0.1 * tolerance) return spec;

  // Tabulate the window, then refine the sign change nearest the configured cut.
  constexpr int kSteps = 40;
  std::vector<double> cuts, offsets;
  for (int j = 0; j <= kSteps; ++j) {
    cuts.push_back(center - window + 2.0 * window * j / kSteps);
    offsets.push_back(offset_at(cuts.back()));
  }
  int best = -1;
  for (int j = 0; j < kSteps; ++j) {
    const double a = offsets[static_cast<std::size_t>(j)];
    const double b = offsets[static_cast<std::size_t>(j + 1)];
    if (!std::isfinite(a) || !std::isfinite(b) || (a < 0.0) == (b < 0.0)) continue;
    const double mid = 0.5 * (cuts[static_cast<std::size_t>(j)] + cuts[static_cast<std::size_t>(j + 1)]);
    if (best < 0 || std::abs(mid - center) < std::abs(0.5 * (cuts[static_cast<std::size_t>(best)] +
                                                              cuts[static_cast<std::size_t>(best + 1)]) -
                                                      center)) {
      best = j;
    }
  }
  if (best < 0) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double o : offsets) {
      if (!std::isfinite(o)) continue;
      lo = std::min(lo, o + target);
      hi = std::max(hi, o + target);
    }
    throw CalibrationError(fmt::format("cut angles {:.4f} +- {:.4f} deg give signal angles in [{:.5f}, {:.5f}] deg, "
                                       "which do not bracket the {:.5f} deg target",
                                       center, window, lo, hi, target),
                           lo, hi);
  }

  const auto b = static_cast<std::size_t>(best);
  std::uintmax_t iterations = 100;
  const auto [lo, hi] = boost::math::tools::toms748_solve(offset_at, cuts[b], cuts[b + 1], offsets[b], offsets[b + 1],
                                                          boost::math::tools::eps_tolerance<double>(45), iterations);
  const double cut = std::abs(offset_at(lo)) < std::abs(offset_at(hi)) ? lo : hi;
  const double miss = offset_at(cut);
  if (!(std::abs(miss) < tolerance)) {
    throw CalibrationError(fmt::format("calibration converged to {:.6f} deg but misses the target by {:.2e} deg", cut,
                                       miss),
                           miss + target, miss + target);
  }
  spec.cut_angle = deg_to_rad(cut);
  return spec;
}

ExperimentConfig calibrated_config(const ExperimentConfig& cfg) {
  ExperimentConfig out = cfg;
  out.crystal.cut_angle_deg = rad_to_deg(calibrate(cfg).cut_angle);
  return out;
}

SweepSetup prepare_sweep(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  SweepSetup s;
  s.crystal = cfg.crystal_spec();
  s.filter = cfg.filter_spec();
  s.array = cfg.array_spec();
  s.idler = cfg.idler_spec();
  s.train = cfg.optical_train();
  s.search = search_for(cfg);
  s.pump_frequency = cfg.pump_frequency();
  s.signal_wavelength = cfg.signal_wavelength();

  const double f_eff = s.train.effective_focal_length();
  s.radians_per_pixel = s.array.pitch / f_eff;
  s.delta_k = pixel_delta_k(s.array, f_eff, s.signal_wavelength);

  // The fiber looks along the idler of the pump-normal solution, and the
  // array is shifted so that solution's signal peak falls on the reference
  // pixel.
  const PhaseMatchPoint normal = solve_phase_matching({0.0, 0.0}, s.pump_frequency, s.crystal, s.search);
  s.idler.axis = normal.idler;
  double reference_k = normal.signal.kx;
  if (s.filter.shape == FilterShape::gaussian) {
    const auto geom = BeamGeometry::from_phase_matching(normal, cfg.pump.waist_um * 1e-6);
    const auto coeffs = expansion_coefficients(normal, s.crystal);
    reference_k = signal_marginal(geom, s.filter, s.crystal, coeffs, s.idler).mean;
  }
  s.reference_angle = std::asin(reference_k * s.signal_wavelength / (2.0 * kPi));

  const double ref_pixel = cfg.array.reference_pixel;
  s.pixel_k.resize(static_cast<std::size_t>(s.array.n_pixels));
  for (int i = 0; i < s.array.n_pixels; ++i) {
    const double alpha = s.reference_angle + (i - ref_pixel) * s.radians_per_pixel;
    s.pixel_k[static_cast<std::size_t>(i)] = pixel_wavevector(alpha, s.signal_wavelength);
  }

  const OpticalTrain analysis = options.analysis_train.value_or(s.train);
  analysis.validate();
  s.calibration.reference_pixel = ref_pixel;
  s.calibration.reference_angle_deg = rad_to_deg(s.reference_angle);
  s.calibration.degrees_per_pixel = rad_to_deg(s.array.pitch / analysis.effective_focal_length());
  return s;
}

std::uint64_t derive_seed(std::uint64_t seed, std::size_t index) {
  const auto idx = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

SweepReport run_sweep(const ExperimentConfig& cfg, SweepMode mode, const RunOptions& options) {
  const SweepSetup setup = prepare_sweep(cfg, options);
  const auto& angles_deg = cfg.sweep.alpha_p_deg;
  const std::size_t n_angles = angles_deg.size();
  const auto n_pix = static_cast<std::size_t>(setup.array.n_pixels);
  const double waist = cfg.pump.waist_um * 1e-6;
  const auto integration = cfg.integration_settings();
  const auto live = setup.array.live_mask();

  SweepReport report;
  report.mode = mode;
  report.calibration = setup.calibration;
  report.target_alpha_s_deg = cfg.sweep.target_alpha_s_deg;
  report.config_hash = config_hash(cfg);
  report.seed = cfg.acquisition.seed;
  report.timestamp = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", std::chrono::floor<std::chrono::seconds>(
                                                              std::chrono::system_clock::now()));
  report.angles.resize(n_angles);

  const auto at_angle = [&](std::size_t i, auto&& body) {
    try {
      body();
    } catch (const SpdcError& e) {
      throw SweepError(fmt::format("sweep failed at alpha_p = {} deg: {}", angles_deg[i], e.what()), angles_deg[i]);
    }
  };

  std::vector<BeamGeometry> geometry(n_angles);
  parallel_for(n_angles, options.threads, [&](std::size_t i) {
    at_angle(i, [&] {
      AngleResult& r = report.angles[i];
      r.alpha_p_deg = angles_deg[i];
      const auto kp = from_external_angle(deg_to_rad(r.alpha_p_deg), setup.pump_frequency);
      r.point = solve_phase_matching(kp, setup.pump_frequency, setup.crystal, setup.search);
      r.coeffs = expansion_coefficients(r.point, setup.crystal);
      r.model_alpha_s0_deg = rad_to_deg(signal_external_angle(r.point));
      geometry[i] = BeamGeometry::from_phase_matching(r.point, waist);
    });
  });

  // Every (angle, pixel) pair is independent; the numeric oracle dominates.
  std::vector<double> analytic(n_angles * n_pix), numeric(mode == SweepMode::oracle ? n_angles * n_pix : 0);
  parallel_for(n_angles * n_pix, options.threads, [&](std::size_t task) {
    const std::size_t i = task / n_pix, px = task % n_pix;
    at_angle(i, [&] {
      const double k = setup.pixel_k[px];
      analytic[task] = coincidence_probability(k, geometry[i], setup.filter, setup.crystal, report.angles[i].coeffs,
                                               setup.idler, setup.delta_k, IntegrationMethod::analytic, integration);
      if (mode == SweepMode::oracle) {
        numeric[task] = coincidence_probability(k, geometry[i], setup.filter, setup.crystal, report.angles[i].coeffs,
                                                setup.idler, setup.delta_k, IntegrationMethod::numeric, integration);
      }
    });
  });

  const double deg_per_pixel = std::abs(setup.calibration.degrees_per_pixel);
  const auto coincidence = cfg.coincidence_settings();
  parallel_for(n_angles, options.threads, [&](std::size_t i) {
    at_angle(i, [&] {
      AngleResult& r = report.angles[i];
      const std::vector<double> raw(analytic.begin() + static_cast<std::ptrdiff_t>(i * n_pix),
                                    analytic.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_pix));
      const double scale = *std::max_element(raw.begin(), raw.end());
      if (!(scale > 0.0)) throw NumericFailure("analytic profile vanishes on the array", 0.0);
      std::vector<double> scaled(raw.size());
      std::transform(raw.begin(), raw.end(), scaled.begin(), [&](double v) { return v / scale; });
      r.peak_probability = fit_gaussian(scaled, live, FitWeights::uniform).amplitude * scale;
      r.profile = normalize_profile(raw, setup.array);
      const GaussianFit analytic_fit = fit_gaussian(r.profile, live, FitWeights::uniform);

      switch (mode) {
        case SweepMode::analytic:
          r.fit = analytic_fit;
          break;
        case SweepMode::oracle: {
          const std::vector<double> raw_num(numeric.begin() + static_cast<std::ptrdiff_t>(i * n_pix),
                                            numeric.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_pix));
          r.numeric_profile = normalize_profile(raw_num, setup.array);
          r.fit = fit_gaussian(r.numeric_profile, live, FitWeights::uniform);
          r.oracle_correlation = correlation(r.profile, r.numeric_profile, live);
          r.oracle_center_difference = r.fit.center - analytic_fit.center;
          break;
        }
        case SweepMode::synthetic: {
          r.expected = expected_counts(r.profile, cfg.acquisition.pair_rate_hz, cfg.acquisition.duration_s,
                                       coincidence, setup.array, setup.idler);
          PixelHistogram h = sample_histogram(r.expected, derive_seed(cfg.acquisition.seed, i), live);
          h.alpha_p_deg = r.alpha_p_deg;
          h.duration = cfg.acquisition.duration_s;
          r.fit = fit_gaussian(h);
          r.histogram = std::move(h);
          break;
        }
      }
      r.alpha_s0_deg = angle_from_center(r.fit.center, setup.calibration);
      r.alpha_s0_sigma_deg = r.fit.center_sigma * deg_per_pixel;
    });
  });

  std::vector<LinearPoint> points;
  for (const auto& r : report.angles) {
    const double sigma = mode == SweepMode::synthetic ? r.alpha_s0_sigma_deg : 1.0;
    points.push_back({r.alpha_p_deg, r.alpha_s0_deg, sigma});
  }
  if (points.size() >= 3) report.line = fit_linear(points);
  else report.line = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};

  const auto center = std::min_element(report.angles.begin(), report.angles.end(), [](const auto& a, const auto& b) {
    return std::abs(a.alpha_p_deg) < std::abs(b.alpha_p_deg);
  });
  report.oracle_min_correlation = mode == SweepMode::oracle ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  report.oracle_max_center_difference = mode == SweepMode::oracle ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : report.angles) {
    report.flatness = std::max(report.flatness, std::abs(r.peak_probability / center->peak_probability - 1.0));
    if (mode == SweepMode::oracle) {
      report.oracle_min_correlation = std::min(report.oracle_min_correlation, r.oracle_correlation);
      report.oracle_max_center_difference =
          std::max(report.oracle_max_center_difference, std::abs(r.oracle_center_difference));
    }
  }
  return report;
}

std::string profile_file_name(double alpha_p_deg) { return fmt::format("profile_{:+.4f}.csv", alpha_p_deg); }

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(fmt::format("cannot open {} for writing", path.string()));
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw InputError(fmt::format("write to {} failed", path.string()));
}

nlohmann::ordered_json number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json fit_json(const GaussianFit& f) {
  return {{"amplitude", number(f.amplitude)},    {"center_pix", number(f.center)},
          {"width_pix", number(f.width)},        {"width_2w_pix", number(f.diameter())},
          {"offset", number(f.offset)},          {"sigma_amplitude", number(f.amplitude_sigma)},
          {"sigma_center_pix", number(f.center_sigma)}, {"sigma_width_pix", number(f.width_sigma)},
          {"sigma_offset", number(f.offset_sigma)},     {"reduced_chi2", number(f.reduced_chi2)},
          {"iterations", f.iterations}};
}

}  // namespace

std::vector<std::filesystem::path> emit(const SweepReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
  std::vector<std::filesystem::path> written;

  {
    const auto path = dir / "sweep_summary.csv";
    auto out = open_for_write(path);
    out << "alpha_p,center_pix,alpha_s0,width_2w,sigma_center_pix,sigma_alpha_s0,sigma_width_2w,peak_probability,"
           "model_alpha_s0\n";
    for (const auto& r : report.angles) {
      out << fmt::format("{},{:.10f},{:.10f},{:.10f},{:.10g},{:.10g},{:.10g},{:.10g},{:.10f}\n", r.alpha_p_deg,
                         r.fit.center, r.alpha_s0_deg, r.fit.diameter(), r.fit.center_sigma, r.alpha_s0_sigma_deg,
                         2.0 * r.fit.width_sigma, r.peak_probability, r.model_alpha_s0_deg);
    }
    finish(out, path);
    written.push_back(path);
  }

  for (const auto& r : report.angles) {
    const auto path = dir / profile_file_name(r.alpha_p_deg);
    auto out = open_for_write(path);
    out << fmt::format("# alpha_p_deg={}\n# mode={}\n", r.alpha_p_deg, to_string(report.mode));
    if (r.histogram) out << fmt::format("# seed={}\n# duration_s={}\n", r.histogram->seed, r.histogram->duration);
    out << "pixel_index,alpha_s_deg,probability";
    if (!r.numeric_profile.empty()) out << ",numeric_probability";
    if (r.histogram) out << ",expected,counts,live";
    out << '\n';
    for (std::size_t px = 0; px < r.profile.size(); ++px) {
      out << fmt::format("{},{:.10f},{:.10e}", px, report.calibration.angle_of(static_cast<double>(px)),
                         r.profile[px]);
      if (!r.numeric_profile.empty()) out << fmt::format(",{:.10e}", r.numeric_profile[px]);
      if (r.histogram) {
        out << fmt::format(",{:.6f},{},{}", r.expected[px], r.histogram->counts[px], r.histogram->live[px] ? 1 : 0);
      }
      out << '\n';
    }
    finish(out, path);
    written.push_back(path);
  }

  {
    nlohmann::ordered_json j;
    j["provenance"] = {{"config_hash", report.config_hash}, {"seed", report.seed}, {"mode", to_string(report.mode)}};
    j["calibration"] = {{"reference_pixel", report.calibration.reference_pixel},
                        {"reference_angle_deg", number(report.calibration.reference_angle_deg)},
                        {"degrees_per_pixel", number(report.calibration.degrees_per_pixel)}};
    j["linear_fit"] = {{"intercept_deg", number(report.line.intercept)},
                       {"slope", number(report.line.slope)},
                       {"sigma_intercept_deg", number(report.line.intercept_sigma)},
                       {"sigma_slope", number(report.line.slope_sigma)},
                       {"covariance", number(report.line.covariance)},
                       {"chi2", number(report.line.chi2)}};
    j["flatness"] = number(report.flatness);
    if (report.mode == SweepMode::oracle) {
      j["oracle"] = {{"min_correlation", number(report.oracle_min_correlation)},
                     {"max_center_difference_pix", number(report.oracle_max_center_difference)}};
    }
    auto& angles = j["angles"] = nlohmann::ordered_json::array();
    for (const auto& r : report.angles) {
      nlohmann::ordered_json a = {{"alpha_p_deg", r.alpha_p_deg},
                                  {"alpha_s0_deg", number(r.alpha_s0_deg)},
                                  {"sigma_alpha_s0_deg", number(r.alpha_s0_sigma_deg)},
                                  {"model_alpha_s0_deg", number(r.model_alpha_s0_deg)},
                                  {"peak_probability", number(r.peak_probability)},
                                  {"fit", fit_json(r.fit)}};
      if (report.mode == SweepMode::oracle) {
        a["oracle_correlation"] = number(r.oracle_correlation);
        a["oracle_center_difference_pix"] = number(r.oracle_center_difference);
      }
      if (r.histogram) a["seed"] = r.histogram->seed;
      angles.push_back(std::move(a));
    }
    const auto path = dir / "fit_report.json";
    auto out = open_for_write(path);
    out << j.dump(2) << '\n';
    finish(out, path);
    written.push_back(path);
  }

  {
    const auto path = dir / "acceptance.txt";
    auto out = open_for_write(path);
    for (const auto& c : evaluate_report(report)) out << format_result(c) << '\n';
    finish(out, path);
    written.push_back(path);
  }
  return written;
}

}  // namespace spdcsim

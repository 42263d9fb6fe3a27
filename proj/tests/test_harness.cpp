#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spdcsim/acceptance.hpp"
#include "spdcsim/config.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/harness.hpp"
#include "spdcsim/units.hpp"

using namespace spdcsim;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("spdcsim_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double normal_angle_deg(const ExperimentConfig& cfg) {
  const auto setup = prepare_sweep(cfg);
  return rad_to_deg(signal_external_angle(solve_phase_matching({0.0, 0.0}, setup.pump_frequency, setup.crystal,
                                                               setup.search)));
}

}  // namespace

TEST_CASE("config text round trip") {
  auto cfg = default_config();
  cfg.pump.waist_um = 55.5;
  cfg.array.dead_pixels = {3, 19};
  cfg.sweep.alpha_p_deg = {-0.1, 0.0, 0.05};
  cfg.acquisition.seed = 18446744073709551615ULL;
  cfg.filter.shape = FilterShape::tophat;
  const auto text = serialize_config(cfg);
  const auto back = parse_config(text);
  CHECK(serialize_config(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(back.pump.waist_um == 55.5);
  CHECK(back.acquisition.seed == cfg.acquisition.seed);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("[pump]\nwaist_um = 100\nwasit_um = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[pump]\nwaist_um = fast\n"), ConfigError);
  auto cfg = default_config();
  cfg.sweep.alpha_p_deg = {};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.sweep.alpha_p_deg = {0.0, -0.1};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = default_config();
  cfg.array.diameter_um = 150.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("config hash") {
  const auto a = default_config();
  auto b = a;
  b.pump.waist_um = 50.0;
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) == config_hash(default_config()));
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("calibration") {
  const auto cfg = default_config();
  SUBCASE("the default cut is already a fixed point") {
    CHECK(rad_to_deg(calibrate(cfg).cut_angle) == doctest::Approx(cfg.crystal.cut_angle_deg).epsilon(1e-9));
  }
  SUBCASE("a perturbed cut is pulled back onto the target") {
    auto off = cfg;
    off.crystal.cut_angle_deg += 0.5;
    CHECK(std::abs(normal_angle_deg(off) - 3.0) > 1e-2);
    const auto fixed = calibrated_config(off);
    CHECK(fixed.crystal.cut_angle_deg == doctest::Approx(cfg.crystal.cut_angle_deg).epsilon(1e-9));
    CHECK(std::abs(normal_angle_deg(fixed) - 3.0) < 1e-5);
  }
  SUBCASE("another target") {
    auto other = cfg;
    other.sweep.target_alpha_s_deg = 2.5;
    const auto fixed = calibrated_config(other);
    CHECK(fixed.crystal.cut_angle_deg != doctest::Approx(cfg.crystal.cut_angle_deg));
    CHECK(std::abs(normal_angle_deg(fixed) - 2.5) < 1e-5);
  }
  SUBCASE("unreachable target reports the achievable range") {
    auto far = cfg;
    far.sweep.target_alpha_s_deg = 30.0;
    far.sweep.calibration_window_deg = 0.1;
    try {
      (void)calibrate(far);
      FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
      CHECK(e.min_angle_deg() < e.max_angle_deg());
      CHECK(e.max_angle_deg() < 30.0);
    }
  }
}

TEST_CASE("analytic sweep") {
  const auto report = run_sweep(default_config(), SweepMode::analytic, {});
  REQUIRE(report.angles.size() == 9);
  for (std::size_t i = 1; i < report.angles.size(); ++i) {
    CHECK(report.angles[i].alpha_s0_deg > report.angles[i - 1].alpha_s0_deg);
    CHECK(report.angles[i].model_alpha_s0_deg > report.angles[i - 1].model_alpha_s0_deg);
  }
  const auto& centre = report.angles[4];
  CHECK(std::abs(centre.fit.center - 16.0) < 0.5);
  CHECK(centre.alpha_s0_deg == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(report.line.slope > 1.0);
  CHECK(report.angles[0].profile[19] == 0.0);

  const auto results = evaluate_report(report);
  CHECK(results.size() == static_cast<std::size_t>(kCriterionCount));
}

TEST_CASE("synthetic sweep is reproducible and thread-count independent") {
  auto cfg = default_config();
  cfg.sweep.alpha_p_deg = {-0.046, 0.0, 0.046};
  const auto one = run_sweep(cfg, SweepMode::synthetic, {1, {}});
  const auto four = run_sweep(cfg, SweepMode::synthetic, {4, {}});
  for (std::size_t i = 0; i < one.angles.size(); ++i) {
    REQUIRE(one.angles[i].histogram);
    CHECK(one.angles[i].histogram->counts == four.angles[i].histogram->counts);
    CHECK(one.angles[i].fit.center == four.angles[i].fit.center);
    CHECK(one.angles[i].histogram->seed == derive_seed(cfg.acquisition.seed, i));
  }
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto files_a = emit(one, a);
  const auto files_b = emit(four, b);
  CHECK(files_a.size() == cfg.sweep.alpha_p_deg.size() + 3);
  REQUIRE(files_a.size() == files_b.size());
  for (std::size_t i = 0; i < files_a.size(); ++i) {
    CAPTURE(files_a[i]);
    CHECK(slurp(files_a[i]) == slurp(files_b[i]));
  }
  cfg.acquisition.seed += 1;
  const auto other = run_sweep(cfg, SweepMode::synthetic, {1, {}});
  CHECK(other.angles[1].histogram->counts != one.angles[1].histogram->counts);
}

TEST_CASE("emit writes every artefact") {
  const auto report = run_sweep(default_config(), SweepMode::analytic, {});
  const auto dir = scratch("emit");
  const auto files = emit(report, dir);
  CHECK(files.size() == 12);
  for (const auto& f : files) CHECK(std::filesystem::file_size(f) > 0);
  CHECK(std::filesystem::exists(dir / "sweep_summary.csv"));
  CHECK(std::filesystem::exists(dir / "fit_report.json"));
  CHECK(std::filesystem::exists(dir / profile_file_name(-0.092)));
  const auto summary = slurp(dir / "sweep_summary.csv");
  CHECK(summary.rfind("alpha_p,center_pix,alpha_s0,width_2w", 0) == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 10);
}

TEST_CASE("failures name the pump angle") {
  auto cfg = default_config();
  cfg.filter.shape = FilterShape::tophat;
  try {
    (void)run_sweep(cfg, SweepMode::analytic, {});
    FAIL("expected SweepError");
  } catch (const SweepError& e) {
    CHECK(std::find(cfg.sweep.alpha_p_deg.begin(), cfg.sweep.alpha_p_deg.end(), e.alpha_p_deg()) !=
          cfg.sweep.alpha_p_deg.end());
  }
}

TEST_CASE("sweep mode names") {
  for (auto m : {SweepMode::analytic, SweepMode::synthetic, SweepMode::oracle}) CHECK(parse_sweep_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_sweep_mode("fast"), InputError);
}

TEST_CASE("result lines") {
  CriterionResult r{1, "theoretical slope", CriterionStatus::pass, "slope 1.92", 0.0};
  CHECK(format_result(r).rfind("PASS C1 theoretical slope", 0) == 0);
  r.status = CriterionStatus::fail;
  CHECK(format_result(r).rfind("FAIL C1", 0) == 0);
}

// Command-line front end: calibrate, sweep, check, emit-defaults.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spdcsim/acceptance.hpp"
#include "spdcsim/config.hpp"
#include "spdcsim/harness.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 0;
};

spdcsim::ExperimentConfig load(const Common& c) {
  auto cfg = c.config.empty() ? spdcsim::default_config() : spdcsim::load_config(c.config);
  if (c.seed) cfg.acquisition.seed = *c.seed;
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw spdcsim::InputError(fmt::format("cannot open {} for writing", path));
  out << text;
}

void add_common(CLI::App* sub, Common& c, bool seed, bool out, const std::string& out_help) {
  sub->add_option("--config", c.config, "Config file (INI); defaults are used when omitted")->check(CLI::ExistingFile);
  if (seed) sub->add_option("--seed", c.seed, "Override acquisition.seed");
  if (out) sub->add_option("--out", c.out, out_help);
  sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pump-to-signal angle correlation simulator for type-II SPDC"};
  app.require_subcommand(1);

  Common calib_opts, sweep_opts, check_opts, defaults_opts;
  std::string mode = "analytic";
  std::vector<int> criteria;
  int seeds = 100;

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Trim the crystal cut so the pump-normal signal angle hits the target");
  add_common(calibrate_cmd, calib_opts, false, true, "Write the calibrated config here (default: stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the pump-angle sweep and write CSV/JSON results");
  add_common(sweep_cmd, sweep_opts, true, true, "Output directory (default: spdcsim_out)");
  sweep_cmd->add_option("--mode", mode, "analytic, synthetic or oracle")
      ->check(CLI::IsMember({"analytic", "synthetic", "oracle"}));

  auto* check_cmd = app.add_subcommand("check", "Run the acceptance suite; exit 0 only if every criterion passes");
  add_common(check_cmd, check_opts, true, true, "Scratch directory for the determinism check");
  check_cmd->add_option("--criterion", criteria, "Run only these criteria (1-8)")->check(CLI::Range(1, 8));
  check_cmd->add_option("--seeds", seeds, "Seeds for the statistical-recovery criterion")->check(CLI::PositiveNumber);

  auto* defaults_cmd = app.add_subcommand("emit-defaults", "Print the default config");
  defaults_cmd->add_option("--out", defaults_opts.out, "Write to this file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*defaults_cmd) {
      write_text(defaults_opts.out, spdcsim::serialize_config(spdcsim::default_config()));
      return 0;
    }
    if (*calibrate_cmd) {
      const auto cfg = load(calib_opts);
      const auto calibrated = spdcsim::calibrated_config(cfg);
      fmt::print(stderr, "cut angle {:.9f} deg -> {:.12f} deg (target signal angle {} deg)\n",
                 cfg.crystal.cut_angle_deg, calibrated.crystal.cut_angle_deg, cfg.sweep.target_alpha_s_deg);
      write_text(calib_opts.out, spdcsim::serialize_config(calibrated));
      return 0;
    }
    if (*sweep_cmd) {
      const auto cfg = load(sweep_opts);
      const auto report = spdcsim::run_sweep(cfg, spdcsim::parse_sweep_mode(mode), {sweep_opts.threads, std::nullopt});
      const std::string dir = sweep_opts.out.empty() ? "spdcsim_out" : sweep_opts.out;
      const auto files = spdcsim::emit(report, dir);
      fmt::print("{} sweep, {} angles: alpha_s0 = {:.5f} + {:.4f} alpha_p (deg), flatness {:.2f}%\n", mode,
                 report.angles.size(), report.line.intercept, report.line.slope, 100.0 * report.flatness);
      if (report.mode == spdcsim::SweepMode::oracle) {
        fmt::print("oracle: min correlation {:.6f}, max centroid difference {:.4f} px\n", report.oracle_min_correlation,
                   report.oracle_max_center_difference);
      }
      fmt::print("wrote {} files to {} (config {}, seed {})\n", files.size(), dir, report.config_hash, report.seed);
      fmt::print(stderr, "run finished {}\n", report.timestamp);
      return 0;
    }
    if (*check_cmd) {
      const auto cfg = load(check_opts);
      spdcsim::AcceptanceOptions options;
      options.threads = check_opts.threads;
      options.criteria = criteria;
      options.seeds = seeds;
      options.work_dir = check_opts.out;
      bool all = true;
      spdcsim::run_acceptance(cfg, options, [&](const spdcsim::CriterionResult& r) {
        all = all && r.passed();
        fmt::print("{}\n", spdcsim::format_result(r));
        std::fflush(stdout);
      });
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}

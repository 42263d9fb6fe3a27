#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "spdcsim/config.hpp"
#include "spdcsim/harness.hpp"

namespace spdcsim {

enum class CriterionStatus { pass, fail, not_evaluated };

struct CriterionResult {
  int id = 0;
  std::string name;
  CriterionStatus status = CriterionStatus::not_evaluated;
  std::string detail;
  double seconds = 0.0;

  bool passed() const { return status == CriterionStatus::pass; }
};

/// "PASS C1 theoretical slope: ..." (FAIL / SKIP for the other states).
std::string format_result(const CriterionResult& result);

inline constexpr int kCriterionCount = 8;

/// Criteria a single sweep report settles on its own: slope, intercept and
/// flatness from an analytic sweep, oracle equivalence from an oracle sweep.
/// The rest are listed as not evaluated.
std::vector<CriterionResult> evaluate_report(const SweepReport& report);

struct AcceptanceOptions {
  unsigned threads = 0;
  std::vector<int> criteria;  // empty = all
  int seeds = 100;            // statistical-recovery repetitions
  /// Off-focal train used for the scaling reconciliation (r = 1.3 at 808 nm).
  OpticalTrain misaligned{0.3, 0.45, 0.12, 808e-9};
  /// Scratch space for the determinism check; a fresh temp directory if empty.
  std::filesystem::path work_dir;
};

/// Runs the full acceptance suite on the calibrated `cfg`. `on_result` is
/// called as each criterion finishes.
std::vector<CriterionResult> run_acceptance(const ExperimentConfig& cfg, const AcceptanceOptions& options = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace spdcsim

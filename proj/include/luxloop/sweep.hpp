#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "luxloop/stats.hpp"
#include "luxloop/trial.hpp"

namespace luxloop {

struct SweepConfig {
  std::vector<TargetLevel> targets;  // defaults to all 13 when empty
  int trials_per_target = 10;
  TrialConfig base;  // per-trial target and seed are filled in by the runner
  int threads = 1;

  void validate() const;
};

struct TrialKey {
  std::string target_label;
  int target_index = 0;
  int trial_index = 0;
  std::uint64_t seed = 0;
};

// Steps statistics cover converged trials only (there is no step count to a
// target that was never reached); converged counts report the coverage.
struct TargetSummary {
  std::string label;
  int trials = 0;
  int converged = 0;
  std::optional<FiveNum> steps;
  std::optional<FiveNum> time_ms;
};

struct SweepSummary {
  std::vector<TargetSummary> per_target;
  int total_trials = 0;
  int total_converged = 0;
  double convergence_rate = 0.0;
  std::optional<FiveNum> steps_overall;
  std::optional<FiveNum> time_overall;
  Histogram steps_hist;  // 500-step bins
  Histogram time_hist;   // 5 ms bins
};

struct SweepResult {
  std::vector<TrialKey> keys;  // row i describes records[i]
  std::vector<EpisodeRecord> records;
  SweepSummary summary;
};

inline constexpr double kTimeHistBinMs = 5.0;
inline constexpr double kStepsHistBin = 500.0;

// Deterministic per-trial seed, independent of execution order.
std::uint64_t trial_seed(std::uint64_t base, int target_index, int trial_index);

// Serial reference runner: one trial after another, no threading.
SweepResult run_sweep_serial(const SweepConfig& cfg);

// OpenMP runner: trials are independent (own table, environment, and random
// streams), so any schedule produces the same records as the serial runner.
SweepResult run_sweep(const SweepConfig& cfg);

// Raised when individual trials fail; lists each (target, trial) pair.
struct SweepError : std::runtime_error {
  explicit SweepError(std::string msg, std::vector<std::string> failures_in)
      : std::runtime_error(std::move(msg)), failures(std::move(failures_in)) {}
  std::vector<std::string> failures;
};

SweepSummary summarize(const std::vector<TrialKey>& keys,
                       const std::vector<EpisodeRecord>& records);

// Deterministic portion of the summary (step counts, convergence): identical
// seeds produce byte-identical dumps. Wall-time statistics vary run to run
// and live in a separate timing document.
nlohmann::ordered_json summary_to_json(const SweepSummary& summary);
nlohmann::ordered_json timing_to_json(const SweepSummary& summary);

// Per-target box-plot statistics over steps-to-converge.
// Columns: target,min,q1,median,q3,max,converged_count
std::string boxplot_csv(const SweepSummary& summary);
std::string time_histogram_csv(const SweepSummary& summary);
std::string steps_histogram_csv(const SweepSummary& summary);

}  // namespace luxloop

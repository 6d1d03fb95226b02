#pragma once

// Experiment catalog and the command layer behind the CLI and the C API.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "verify.hpp"

namespace pqlab {

struct PhaseTiming {
  std::string phase;
  double seconds;
};

struct SupportSample {
  double t;
  std::optional<SupportInterval> support;
};

/// Data the primary trajectory was computed from, stored for `verify`.
struct PrimaryRun {
  Trajectory trajectory;
  double sup_norm = 0.0;
  double l1_norm = 0.0;
  std::optional<double> support_radius;  // R0 of compact data
};

struct RunSummary {
  Experiment experiment = Experiment::quench;
  std::optional<double> quench_time;
  std::vector<SupportSample> support_history;
  BoundsReport bounds{};
  VerificationReport verification;
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::string> artifacts;
  std::vector<PhaseTiming> timing;
};

struct ExperimentOutput {
  RunSummary summary;
  std::optional<PrimaryRun> primary;
};

/// Runs `cfg.experiment` (anything but sweep) without touching the filesystem.
ExperimentOutput run_experiment(const ScenarioConfig& cfg);

BoundsReport cmd_bounds(const ScenarioConfig& cfg);
nlohmann::json bounds_json(const ScenarioConfig& cfg, const BoundsReport& report);

/// Runs the experiment and writes snapshots.csv, ledger.csv, summary.json,
/// verify.json and timing.json under `out_dir`.
RunSummary cmd_run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

/// Re-checks the stored primary trajectory of a finished run.
VerificationReport cmd_verify(const std::filesystem::path& out_dir);

/// Deterministic summary document: resolved config and results, no timings.
nlohmann::json summary_json(const ScenarioConfig& cfg, const RunSummary& s,
                            const std::optional<PrimaryRun>& primary);
nlohmann::json timing_json(const RunSummary& s);

struct SweepRow {
  std::size_t index = 0;
  double p = 0.0;
  double beta = 0.0;
  double M = 0.0;
  std::optional<double> quench_time;
  double quench_bound = 0.0;
  std::optional<double> support_radius;
  std::optional<double> m0;
  std::optional<double> gradient_constant;
  bool mass_accounting = false;
  std::string error;
};

/// Cartesian product of the sweep axes, run on `workers` threads. Row order
/// follows the product order; a failing run records its message in the row.
std::vector<SweepRow> cmd_sweep(const ScenarioConfig& cfg, int workers);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Same data with its peak rescaled to M.
InitialData rescale_peak(const InitialData& data, double M);

}  // namespace pqlab

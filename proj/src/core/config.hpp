#pragma once

// Scenario configuration. A JSON document is validated against a strict
// schema (unknown keys are errors) and every default is written back into
// `resolved`, which is echoed verbatim into run summaries.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "analytic.hpp"
#include "ladder.hpp"
#include "model.hpp"
#include "scheme.hpp"

namespace pqlab {

enum class Experiment { quench, propagation, iss, maximal, gradient, smoothing, nonexistence, sweep };

const char* to_string(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view name);

struct Tolerances {
  double quench_slack = 1e-3;
  double barrier = 1e-3;
  double mass_identity = 1e-8;
  double ordering = 1e-6;
  double gradient_band = 0.10;
  double holder_lo = 0.45;
  double holder_hi = 0.75;
  double holder_constant_band = 0.25;
  double smoothing_ratio = 0.15;
  double smoothing_slope_slack = 0.1;
  double iss_threshold = 0.05;
};

struct RunParameters {
  double t_end = 1.0;
  /// Start of the window for gradient and Hoelder statistics.
  double tau = 0.0;
  double t_probe = 0.1;
  std::vector<double> masses;  // smoothing family, L1 norms
  double spike_radius = 0.05;
  bool stop_on_quench = true;
  /// Randomized ordered pairs for the discrete comparison check (0 disables).
  int comparison_pairs = 0;
  int comparison_steps = 200;
  Tolerances tol;
};

struct OutputOptions {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};
};

struct SweepAxis {
  std::string key;  // "p", "beta" or "M"
  std::vector<double> values;
};

struct ScenarioConfig {
  ProblemSpec problem{3.0, 0.5, {}, SourceTerm::zero(), InitialData::cosine(1.0, 1.0)};
  RegularizationKnobs knobs{0.0125, 1.25e-5, 1.0};
  LadderPlan ladder;
  bool ladder_enabled = false;
  int n_cells = 400;
  std::vector<int> refinement;
  StepConfig stepping;
  Experiment experiment = Experiment::quench;
  RunParameters run;
  CalibrationConstants calibration;
  OutputOptions outputs;
  std::uint64_t seed = 0;
  std::vector<SweepAxis> sweep;

  /// Input with every default filled in.
  nlohmann::json resolved;

  /// Throws Error(invalid_argument) naming the offending dotted path.
  static ScenarioConfig from_json(const nlohmann::json& doc);
  static ScenarioConfig from_file(const std::filesystem::path& path);
};

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Applies `a.b.c=value`; the value is parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

ProblemSpec parse_problem(const nlohmann::json& problem, nlohmann::json* resolved = nullptr);

}  // namespace pqlab

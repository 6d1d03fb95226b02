#pragma once

// Limit passages as numerical continuations: eta -> 0 at fixed eps,
// eps -> 0 towards the maximal solution, and r -> infinity for the Cauchy
// problem on truncated domains.

#include <optional>
#include <vector>

#include "scheme.hpp"

namespace pqlab {

struct LadderPlan {
  std::vector<double> eta_sequence;     // decreasing, absolute values
  std::vector<double> eps_sequence;     // decreasing
  std::vector<double> radius_sequence;  // increasing, Cauchy only
  StepConfig step;
  int n_cells = 400;
  /// Common spacing for radius sweeps; 0 derives it from n_cells on the first radius.
  double h = 0.0;
  double alpha = 0.0;  // <= 0 selects RegularizationKnobs::default_alpha
  RunOptions run;

  /// eps in {0.1, 0.05, 0.025, 0.0125} M, eta in {1e-2, 1e-3, 1e-4} eps_min,
  /// radii doubling from m0 / 2 (four levels) when data is compact.
  static LadderPlan defaults(const ProblemSpec& spec, int n_cells);

  double alpha_for(double p) const {
    return alpha > 0.0 ? alpha : RegularizationKnobs::default_alpha(p);
  }
};

/// Sup difference over matched snapshot times and matching nodes, after removing lifts.
struct LevelDiff {
  double sup = 0.0;
  double l1 = 0.0;
  double x = 0.0;
  double t = 0.0;
  /// max of (fine - coarse): positive means the finer level exceeded the coarser one
  double max_excess = 0.0;
  double excess_x = 0.0;
  double excess_t = 0.0;
};

/// Compares trajectories on the same spacing; `offset` shifts fine node indices onto coarse ones.
LevelDiff compare_levels(const Trajectory& fine, const Trajectory& coarse, int offset = 0);

struct EtaLevel {
  double eta;
  std::optional<double> quench_time;
  std::optional<double> diff_to_previous;
};

struct PEpsResult {
  Trajectory trajectory;  // finest eta
  std::vector<EtaLevel> levels;
  /// successive differences strictly decrease
  bool converging = true;
};

PEpsResult solve_P_eps(const ProblemSpec& spec, double eps, const LadderPlan& plan);

struct EpsLevel {
  double eps;
  std::optional<double> quench_time;
  /// max over matched times and nodes of u_{this} - u_{previous coarser}
  std::optional<LevelDiff> versus_previous;
  bool eta_converging = true;
};

struct MaximalResult {
  Trajectory trajectory;  // finest eps
  std::vector<EpsLevel> levels;
  double worst_violation = 0.0;
  double worst_x = 0.0;
  double worst_t = 0.0;
  std::optional<double> extrapolated_quench_time;
};

/// Needs at least three eps levels. Levels run concurrently.
MaximalResult approximate_maximal(const ProblemSpec& spec, const LadderPlan& plan);

struct RadiusLevel {
  double radius;
  int n_cells;
  std::optional<double> quench_time;
  std::optional<double> support_radius;  // at the final time
  std::optional<LevelDiff> versus_previous;
  bool beyond_m0 = false;
};

struct CauchyResult {
  Trajectory trajectory;  // largest radius
  std::vector<RadiusLevel> levels;
  std::optional<double> m0;
  /// worst matched-node difference among consecutive pairs with both radii >= m0
  double worst_stable_diff = 0.0;
  bool stable = true;
};

/// Runs the truncated Cauchy problem on each radius at a common spacing, with the
/// finest (eps, eta) of the plan. `tolerance` flags disagreement between
/// consecutive radii beyond m0.
CauchyResult cauchy_solve(const ProblemSpec& spec, const LadderPlan& plan,
                          double tolerance = 1e-8);

/// Aitken extrapolation of the last three values.
std::optional<double> aitken(const std::vector<double>& v);

}  // namespace pqlab

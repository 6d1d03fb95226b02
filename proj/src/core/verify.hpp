#pragma once

// Executable property checks over trajectories. Each check returns a
// PropertyResult carrying the worst measured violation and the tolerance used.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "ladder.hpp"
#include "scheme.hpp"

namespace pqlab {

enum class PropertyStatus { pass, fail, inconclusive, informational };

struct PropertyResult {
  std::string name;
  PropertyStatus status = PropertyStatus::inconclusive;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  std::optional<double> x;
  std::optional<double> t;
  std::vector<double> trend;
  std::string note;

  bool passed() const { return status == PropertyStatus::pass; }

  /// Sets the status from worst_violation <= tolerance.
  PropertyResult& decide();
};

const char* to_string(PropertyStatus s);

struct VerificationReport {
  std::vector<PropertyResult> properties;

  bool all_passed() const;
  bool any_failed() const;
  const PropertyResult* find(const std::string& name) const;
};

/// max_x u(x, s) - Gamma_eps(s) over snapshots, Gamma_eps started from L.
PropertyResult check_barrier_dominance(const Trajectory& traj, double L, double beta,
                                       double tolerance = 1e-3);

/// Detected quench time against M^{1+beta}/(1+beta) + dt + slack.
PropertyResult check_quench_bounds(const Trajectory& traj, const BoundsReport& report,
                                   double slack = 1e-3, bool calibrated = false);

/// Support radius (at traj.support_tol) against m0, slack 2h, for every t > 0.
PropertyResult check_support_containment(const Trajectory& traj, double m0);

/// u(x,t) - lift <= w(|x| - R0) + tol for |x| > R0, w the stationary barrier from M.
PropertyResult check_barrier_profile(const Trajectory& traj, double R0, double M,
                                     const DerivedConstants& c, double tolerance = 1e-3);

/// max |slope| / (ubar^{1-1/gamma} bracket) over faces and snapshots with t >= tau.
/// ubar is the face average of the nodal values, floored at eta.
double gradient_ratio(const Trajectory& traj, double tau, double bracket, double gamma);
/// Same statistic on a single nodal profile.
double gradient_ratio(const std::vector<double>& values, const Grid& grid, double floor,
                      double bracket, double gamma);

/// Refinement sequence of ratios: passes when the spread is within `band`.
PropertyResult gradient_ratio_statistic(const std::vector<double>& ratios, double band = 0.10);

struct HolderFit {
  double slope = 0.0;      // log-log regression exponent in |t - s|
  double constant = 0.0;   // smallest C with |du| <= C |t - s|^{1/2}
  std::size_t samples = 0;
};

/// Time differences at the node of largest initial value, measured against the
/// quench snapshot (or the last one), over |t - s| in [min_gap, max_gap].
HolderFit fit_time_holder(const Trajectory& traj, double min_gap, double max_gap);

/// Regression exponent over |t - s| in [10 dt, (T - tau)/2] must land in [lo, hi].
PropertyResult check_time_holder(const Trajectory& traj, double tau, double lo = 0.45,
                                 double hi = 0.75);

/// Fitted Hoelder constants along a dt refinement must agree within `band`.
PropertyResult check_holder_constant_stability(const std::vector<double>& constants,
                                               double band = 0.25);

PropertyResult check_mass_accounting(const Trajectory& traj, double u0_l1,
                                     double rel_tol = 1e-8);

struct SmoothingSample {
  double mass;
  /// max over t >= t_min of (||u(t)||_inf - lift) t^{1/lambda}
  double envelope;
  double fitted_constant;  // envelope / mass^{p/lambda}
  double small_t_slope;    // regression slope of log ||u||_inf vs log t
};

SmoothingSample measure_smoothing(const Trajectory& traj, double mass, double p, double t_min,
                                  double t_small_max);

/// Run family with masses m, 2m, 4m, ...: consecutive envelope ratios within
/// `ratio_tol` of (m'/m)^{p/lambda}, i.e. a stable fitted constant.
PropertyResult check_smoothing_effect(const std::vector<SmoothingSample>& family, double p,
                                      double ratio_tol = 0.15);

/// Small-t slopes of log ||u||_inf must stay >= -1/lambda - slack.
PropertyResult check_smoothing_slope(const std::vector<SmoothingSample>& family, double p,
                                     double slack = 0.1);

/// Smallest c making the smoothing bound hold over the family.
double fit_smoothing_constant(const std::vector<SmoothingSample>& family);

/// Support radius at the probe time stable within `threshold` over the last two radii.
PropertyResult detect_iss(const CauchyResult& sweep, double threshold = 0.05);

/// Nodewise lower <= upper + tol at matched snapshot times.
PropertyResult check_ordering(const std::string& name, const Trajectory& lower,
                              const Trajectory& upper, double tol);

/// Steps randomized ordered pairs u0 <= v0 side by side with one scheme and
/// records the worst max_i (u_i - v_i) over all steps.
PropertyResult check_discrete_comparison(const Scheme& prototype, int pairs, int steps,
                                         std::uint64_t seed, double tol);

struct NonexistenceDiagnostic {
  std::optional<double> quench_time;
  std::optional<double> first_negative_time;
  std::optional<long> steps_after_quench;  // negative when it precedes quench
  double min_value = 0.0;
  double min_x = 0.0;
};

/// Runs the regular scheme until quench, then continues with the unfloored
/// scheme (raw u^{-beta} sink, source without cutoff) and reports where and
/// when values go negative.
NonexistenceDiagnostic nonexistence_probe(const ProblemSpec& spec, const RegularizationKnobs& knobs,
                                          const Grid& grid, const StepConfig& cfg, double t_end);

}  // namespace pqlab

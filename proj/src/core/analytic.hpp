#pragma once

// Closed-form quantities: extinction profiles, stationary barriers, quenching
// time bounds, support radii and the gradient-estimate brackets.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "model.hpp"

namespace pqlab {

/// Stand-ins for the unnamed constants of the smoothing bound and of m_f.
struct CalibrationConstants {
  double c_smoothing = 1.0;
  double c2_mf = 1.0;

  void validate() const;
};

/// (L^{1+beta} - (1+beta) t)_+^{1/(1+beta)}
double extinction_profile(double L, double beta, double t);

struct GammaEpsProfile {
  std::vector<double> times;
  std::vector<double> values;
  /// First time the profile drops to 2 eps, when it does.
  std::optional<double> crossing_2eps;

  /// Linear interpolation in time; constant beyond the last sample.
  double at(double t) const;
};

/// Integrates G' + g_eps(G) = 0, G(0) = L with classical RK4 (step 1e-4 L^{1+beta}).
GammaEpsProfile solve_gamma_eps(double eps, double beta, double L, std::span<const double> t_grid);

/// (M^{1/gamma} - sigma x)_+^gamma
double stationary_barrier(double M, const DerivedConstants& c, double x);
double stationary_barrier_slope(double M, const DerivedConstants& c, double x);

/// m0 = R0 + M^{1/gamma} / sigma
double support_bound(double R0, double M, const DerivedConstants& c);

/// M^{1+beta} / (1+beta)
double quench_bound_sup(double M, double beta);

struct QuenchL1Bound {
  double bound;
  double tau_star;
};

/// min over tau > 0 of tau + (C tau^{-1/lambda} m^{p/lambda})^{1+beta} / (1+beta).
QuenchL1Bound quench_bound_l1(double m, double p, double beta, const CalibrationConstants& cal);

/// Derivative of the objective minimized by quench_bound_l1.
double quench_l1_objective_derivative(double tau, double m, double p, double beta,
                                      const CalibrationConstants& cal);
double quench_l1_objective(double tau, double m, double p, double beta,
                           const CalibrationConstants& cal);

/// (max_{[0, 2M]} |g|)^{1/p}; monotone g short-cuts to |g(2M)|^{1/p}.
double cap_Mg(const std::function<double(double)>& g, double M, double p, bool monotone = false);

double bracket_sup(double t, double M, const SourceTerm& src, double p, double beta);
double bracket_l1(double tau, double m, const SourceTerm& src, double p, double beta,
                  const CalibrationConstants& cal);

struct BoundsReport {
  DerivedConstants constants;
  double sup_norm;
  double l1_norm;
  double quench_bound_sup;
  QuenchL1Bound quench_bound_l1;
  std::optional<double> support_radius_m0;  // compactly supported data only
  double bracket_sup_t;
  double bracket_sup;
  double bracket_l1_tau;
  double bracket_l1;
  CalibrationConstants calibration;

  /// C t^{-1/lambda} m^{p/lambda}
  double smoothing_bound_at(double t) const;
};

BoundsReport make_bounds_report(const ProblemSpec& spec, const CalibrationConstants& cal,
                                double t, double tau);

}  // namespace pqlab

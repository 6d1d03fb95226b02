#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "error.hpp"

namespace pqlab {

namespace {

PropertyResult named(std::string name) {
  PropertyResult r;
  r.name = std::move(name);
  return r;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den != 0.0 ? (n * sxy - sx * sy) / den : 0.0;
}

}  // namespace

PropertyResult& PropertyResult::decide() {
  status = worst_violation <= tolerance ? PropertyStatus::pass : PropertyStatus::fail;
  return *this;
}

const char* to_string(PropertyStatus s) {
  switch (s) {
    case PropertyStatus::pass: return "pass";
    case PropertyStatus::fail: return "fail";
    case PropertyStatus::inconclusive: return "inconclusive";
    case PropertyStatus::informational: return "informational";
  }
  return "unknown";
}

bool VerificationReport::all_passed() const {
  return std::all_of(properties.begin(), properties.end(), [](const PropertyResult& p) {
    return p.status == PropertyStatus::pass || p.status == PropertyStatus::informational;
  });
}

bool VerificationReport::any_failed() const {
  return std::any_of(properties.begin(), properties.end(),
                     [](const PropertyResult& p) { return p.status == PropertyStatus::fail; });
}

const PropertyResult* VerificationReport::find(const std::string& name) const {
  for (const auto& p : properties)
    if (p.name == name) return &p;
  return nullptr;
}

PropertyResult check_barrier_dominance(const Trajectory& traj, double L, double beta,
                                       double tolerance) {
  PropertyResult r = named("barrier_dominance");
  r.tolerance = tolerance;
  std::vector<double> times;
  for (const auto& s : traj.snapshots) times.push_back(s.t);

  std::vector<double> gamma(times.size(), 0.0);
  if (L > 0.0) gamma = solve_gamma_eps(traj.epsilon, beta, L, times).values;

  r.worst_violation = -HUGE_VAL;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto& v = traj.snapshots[k].values;
    const auto it = std::max_element(v.begin(), v.end());
    const double excess = *it - gamma[k];
    if (excess > r.worst_violation) {
      r.worst_violation = excess;
      r.t = times[k];
      r.x = traj.grid.x(static_cast<int>(it - v.begin()));
    }
  }
  r.worst_violation = std::max(r.worst_violation, 0.0);
  r.note = "Gamma_eps from L = " + num(L) + ", eps = " + num(traj.epsilon);
  return r.decide();
}

PropertyResult check_quench_bounds(const Trajectory& traj, const BoundsReport& report,
                                   double slack, bool calibrated) {
  PropertyResult r = named("quench_bound");
  r.tolerance = slack;
  const double bound = report.quench_bound_sup + traj.dt;
  if (!traj.quench_time) {
    if (traj.final().t <= bound + slack) {
      r.status = PropertyStatus::inconclusive;
      r.note = "trajectory ended at t = " + num(traj.final().t) + " before bound and quench";
      return r;
    }
    r.worst_violation = traj.final().t - bound;
    r.t = traj.final().t;
    r.note = "no quench detected by t = " + num(traj.final().t);
    return r.decide();
  }
  r.t = *traj.quench_time;
  r.worst_violation = std::max(0.0, *traj.quench_time - bound);
  r.note = "quench at " + num(*traj.quench_time) + ", sup bound " +
           num(report.quench_bound_sup) + " (+dt " + num(traj.dt) + ")";
  if (calibrated)
    r.note += "; L1 bound " + num(report.quench_bound_l1.bound) + " (calibrated, informational)";
  return r.decide();
}

PropertyResult check_support_containment(const Trajectory& traj, double m0) {
  PropertyResult r = named("support_containment");
  r.tolerance = 2.0 * traj.grid.h();
  r.worst_violation = 0.0;
  for (const auto& s : traj.snapshots) {
    if (s.t <= 0.0 || !s.support) continue;
    const double excess = s.support->radius() - m0;
    if (excess > r.worst_violation || !r.t) {
      r.worst_violation = std::max(r.worst_violation, excess);
      r.t = s.t;
      r.x = s.support->radius();
    }
  }
  r.note = "m0 = " + num(m0) + ", support tol = " + num(traj.support_tol);
  r.worst_violation = std::max(r.worst_violation, 0.0);
  return r.decide();
}

PropertyResult check_barrier_profile(const Trajectory& traj, double R0, double M,
                                     const DerivedConstants& c, double tolerance) {
  PropertyResult r = named("barrier_profile");
  r.tolerance = tolerance;
  r.worst_violation = 0.0;
  for (const auto& s : traj.snapshots) {
    if (s.t <= 0.0) continue;
    for (int i = 0; i < traj.grid.n_nodes(); ++i) {
      const double x = traj.grid.x(i);
      if (std::abs(x) <= R0) continue;
      const double excess = s.values[static_cast<std::size_t>(i)] - traj.boundary_value -
                            stationary_barrier(M, c, std::abs(x) - R0);
      if (excess > r.worst_violation) {
        r.worst_violation = excess;
        r.x = x;
        r.t = s.t;
      }
    }
  }
  return r.decide();
}

double gradient_ratio(const std::vector<double>& values, const Grid& grid, double floor,
                      double bracket, double gamma) {
  const double h = grid.h();
  const double e = 1.0 - 1.0 / gamma;
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double slope = std::abs(values[i + 1] - values[i]) / h;
    if (slope == 0.0) continue;
    const double ubar = std::max(0.5 * (values[i] + values[i + 1]), floor);
    worst = std::max(worst, slope / (std::pow(ubar, e) * bracket));
  }
  return worst;
}

double gradient_ratio(const Trajectory& traj, double tau, double bracket, double gamma) {
  double worst = 0.0;
  for (const auto& s : traj.snapshots) {
    if (s.t < tau) continue;
    worst = std::max(worst, gradient_ratio(s.values, traj.grid, traj.eta, bracket, gamma));
  }
  return worst;
}

PropertyResult gradient_ratio_statistic(const std::vector<double>& ratios, double band) {
  PropertyResult r = named("gradient_ratio");
  r.tolerance = band;
  r.trend = ratios;
  if (ratios.size() < 3) {
    r.status = PropertyStatus::inconclusive;
    r.note = "refinement sequence shorter than 3";
    return r;
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = max_of(ratios);
  r.worst_violation = lo > 0.0 ? hi / lo - 1.0 : (hi > 0.0 ? HUGE_VAL : 0.0);
  r.note = "spread max/min - 1 across refinement";
  return r.decide();
}

HolderFit fit_time_holder(const Trajectory& traj, double min_gap, double max_gap) {
  HolderFit fit;
  const auto& first = traj.initial().values;
  const std::size_t node =
      static_cast<std::size_t>(std::max_element(first.begin(), first.end()) - first.begin());
  const Snapshot& ref = traj.final();
  std::vector<double> lx, ly;
  for (const auto& s : traj.snapshots) {
    const double gap = ref.t - s.t;
    if (gap < min_gap || gap > max_gap) continue;
    const double du = std::abs(s.values[node] - ref.values[node]);
    if (du <= 0.0) continue;
    lx.push_back(std::log(gap));
    ly.push_back(std::log(du));
    fit.constant = std::max(fit.constant, du / std::sqrt(gap));
  }
  fit.samples = lx.size();
  if (lx.size() >= 2) fit.slope = ls_slope(lx, ly);
  return fit;
}

PropertyResult check_time_holder(const Trajectory& traj, double tau, double lo, double hi) {
  PropertyResult r = named("time_holder_exponent");
  const double T = traj.final().t;
  const double min_gap = 10.0 * traj.dt;
  const double max_gap = 0.5 * (T - tau);
  const HolderFit fit = fit_time_holder(traj, min_gap, max_gap);
  r.tolerance = 0.0;
  if (fit.samples < 3) {
    r.status = PropertyStatus::inconclusive;
    r.note = "insufficient snapshots in the fit window";
    return r;
  }
  r.trend = {fit.slope, fit.constant};
  r.worst_violation = std::max({0.0, lo - fit.slope, fit.slope - hi});
  r.t = T;
  r.note = "log-log slope " + num(fit.slope) + " over gaps [" + num(min_gap) + ", " +
           num(max_gap) + "], target [" + num(lo) + ", " + num(hi) + "], C = " + num(fit.constant);
  return r.decide();
}

PropertyResult check_holder_constant_stability(const std::vector<double>& constants,
                                               double band) {
  PropertyResult r = named("time_holder_constant");
  r.tolerance = band;
  r.trend = constants;
  if (constants.size() < 2) {
    r.status = PropertyStatus::inconclusive;
    return r;
  }
  const double lo = *std::min_element(constants.begin(), constants.end());
  const double hi = max_of(constants);
  r.worst_violation = lo > 0.0 ? hi / lo - 1.0 : (hi > 0.0 ? HUGE_VAL : 0.0);
  return r.decide();
}

PropertyResult check_mass_accounting(const Trajectory& traj, double u0_l1, double rel_tol) {
  PropertyResult r = named("mass_accounting");
  r.tolerance = 0.0;
  const MassLedger& last = traj.final().ledger;

  double mass_increase = 0.0;
  for (std::size_t k = 1; k < traj.snapshots.size(); ++k)
    mass_increase = std::max(mass_increase,
                             traj.snapshots[k].ledger.mass - traj.snapshots[k - 1].ledger.mass);
  const double mono_tol = 1e-12 * std::max(1.0, last.initial_mass);
  const double excess_mono = traj.ledger_monotone ? mass_increase - mono_tol : HUGE_VAL;
  const double excess_singular = last.absorbed_singular - (u0_l1 + 1e-8);
  const double excess_source = last.absorbed_source - (u0_l1 + 1e-8);
  double identity = traj.worst_relative_identity;
  for (const auto& snap : traj.snapshots)
    identity = std::max(identity, std::abs(snap.ledger.identity_residual()) /
                                      std::max(snap.ledger.initial_mass, 1e-300));
  const double excess_identity = identity - rel_tol;

  r.worst_violation = std::max({0.0, excess_mono, excess_singular, excess_source, excess_identity});
  r.trend = {identity, last.absorbed_singular, last.absorbed_source,
             last.boundary_outflux, last.mass};
  r.note = "identity " + num(identity) + " (rel tol " + num(rel_tol) +
           "), singular " + num(last.absorbed_singular) + ", source " +
           num(last.absorbed_source) + " vs ||u0||_1 = " + num(u0_l1) +
           (traj.ledger_monotone ? ", mass nonincreasing" : ", mass increased");
  return r.decide();
}

SmoothingSample measure_smoothing(const Trajectory& traj, double mass, double p, double t_min,
                                  double t_small_max) {
  const double lambda = 2.0 * (p - 1.0);
  SmoothingSample s{mass, 0.0, 0.0, 0.0};
  std::vector<double> lx, ly;
  for (const auto& snap : traj.snapshots) {
    if (snap.t < t_min) continue;
    const double sup = max_of(snap.values) - traj.boundary_value;
    s.envelope = std::max(s.envelope, sup * std::pow(snap.t, 1.0 / lambda));
    if (snap.t <= t_small_max && sup > 0.0) {
      lx.push_back(std::log(snap.t));
      ly.push_back(std::log(sup));
    }
  }
  s.fitted_constant = mass > 0.0 ? s.envelope / std::pow(mass, p / lambda) : 0.0;
  if (lx.size() >= 2) s.small_t_slope = ls_slope(lx, ly);
  return s;
}

PropertyResult check_smoothing_effect(const std::vector<SmoothingSample>& family, double p,
                                      double ratio_tol) {
  PropertyResult r = named("smoothing_rescaling");
  r.tolerance = ratio_tol;
  if (family.size() < 2) {
    r.status = PropertyStatus::inconclusive;
    r.note = "run family needs at least two masses";
    return r;
  }
  const double lambda = 2.0 * (p - 1.0);
  std::vector<SmoothingSample> sorted = family;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.mass < b.mass; });
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    const double expected = std::pow(sorted[k].mass / sorted[k - 1].mass, p / lambda);
    const double measured = sorted[k].envelope / sorted[k - 1].envelope;
    const double rel = measured / expected;
    r.trend.push_back(measured);
    r.worst_violation = std::max(r.worst_violation, std::abs(rel - 1.0));
  }
  r.note = "envelope ratios per step vs (m'/m)^{p/lambda}";
  return r.decide();
}

PropertyResult check_smoothing_slope(const std::vector<SmoothingSample>& family, double p,
                                     double slack) {
  PropertyResult r = named("smoothing_small_t_slope");
  r.tolerance = 0.0;
  const double floor = -1.0 / (2.0 * (p - 1.0)) - slack;
  if (family.empty()) {
    r.status = PropertyStatus::inconclusive;
    return r;
  }
  for (const auto& s : family) {
    r.trend.push_back(s.small_t_slope);
    r.worst_violation = std::max(r.worst_violation, floor - s.small_t_slope);
  }
  r.note = "slopes must stay >= " + num(floor);
  return r.decide();
}

double fit_smoothing_constant(const std::vector<SmoothingSample>& family) {
  double c = 0.0;
  for (const auto& s : family) c = std::max(c, s.fitted_constant);
  return c;
}

PropertyResult detect_iss(const CauchyResult& sweep, double threshold) {
  PropertyResult r = named("iss_support_stability");
  r.tolerance = threshold;
  if (sweep.levels.size() < 2) {
    r.status = PropertyStatus::inconclusive;
    r.note = "radius sweep too short";
    return r;
  }
  const auto& a = sweep.levels[sweep.levels.size() - 2];
  const auto& b = sweep.levels.back();
  for (const auto& l : sweep.levels) r.trend.push_back(l.support_radius.value_or(0.0));
  if (!a.support_radius && !b.support_radius) {
    r.worst_violation = 0.0;
    r.note = "support empty on both radii";
    return r.decide();
  }
  if (!a.support_radius || !b.support_radius) {
    r.worst_violation = HUGE_VAL;
    r.note = "support appears on one radius only";
    return r.decide();
  }
  const bool finite = *a.support_radius < 0.5 * a.radius && *b.support_radius < 0.5 * b.radius;
  r.worst_violation = std::abs(*b.support_radius - *a.support_radius) / *a.support_radius;
  if (!finite) r.worst_violation = HUGE_VAL;
  r.x = *b.support_radius;
  r.note = std::string(finite ? "support finite" : "support reaches the truncation") +
           ", radii " + num(*a.support_radius) + " -> " + num(*b.support_radius);
  return r.decide();
}

PropertyResult check_ordering(const std::string& name, const Trajectory& lower,
                              const Trajectory& upper, double tol) {
  PropertyResult r = named(name);
  r.tolerance = tol;
  const LevelDiff d = compare_levels(lower, upper);
  r.worst_violation = d.max_excess;
  if (d.max_excess > 0.0) {
    r.x = d.excess_x;
    r.t = d.excess_t;
  }
  return r.decide();
}

PropertyResult check_discrete_comparison(const Scheme& prototype, int pairs, int steps,
                                         std::uint64_t seed, double tol) {
  PropertyResult r = named("discrete_comparison");
  r.tolerance = tol;
  if (pairs <= 0 || steps <= 0) {
    r.status = PropertyStatus::inconclusive;
    r.note = "no pairs requested";
    return r;
  }
  const Grid& grid = prototype.grid();
  const double lift = prototype.boundary_value();
  const double top = std::max(2.0 * prototype.spec().initial.sup_norm(), 1.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Sum of a few random bumps, vanishing at both ends.
  auto random_profile = [&](double scale) {
    std::vector<double> v(static_cast<std::size_t>(grid.n_nodes()), 0.0);
    const int bumps = 1 + static_cast<int>(unit(rng) * 4.0);
    for (int b = 0; b < bumps; ++b) {
      const double c = -grid.half_length + 2.0 * grid.half_length * unit(rng);
      const double w = (0.05 + 0.45 * unit(rng)) * grid.half_length;
      const double a = scale * unit(rng);
      for (int i = 1; i < grid.n_cells; ++i) {
        const double z = (grid.x(i) - c) / w;
        if (std::abs(z) < 1.0) v[static_cast<std::size_t>(i)] += a * (1.0 - z * z) * (1.0 - z * z);
      }
    }
    return v;
  };

  Scheme lower_scheme = prototype;
  Scheme upper_scheme = prototype;
  for (int k = 0; k < pairs; ++k) {
    std::vector<double> lo = random_profile(0.5 * top);
    const std::vector<double> bump = random_profile(0.5 * top);
    std::vector<double> hi(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      lo[i] += lift;
      hi[i] = lo[i] + bump[i];
    }
    GridState a = lower_scheme.init_state(lo);
    GridState b = upper_scheme.init_state(hi);
    for (int s = 0; s < steps; ++s) {
      lower_scheme.advance(a);
      upper_scheme.advance(b);
      for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double excess = a.values[i] - b.values[i];
        if (excess > r.worst_violation || !r.t) {
          r.worst_violation = std::max(r.worst_violation, excess);
          r.x = grid.x(static_cast<int>(i));
          r.t = a.time;
        }
      }
    }
  }
  r.note = std::to_string(pairs) + " pairs x " + std::to_string(steps) + " steps, seed " +
           std::to_string(seed);
  return r.decide();
}

NonexistenceDiagnostic nonexistence_probe(const ProblemSpec& spec, const RegularizationKnobs& knobs,
                                          const Grid& grid, const StepConfig& cfg, double t_end) {
  SchemeOptions floored;
  floored.lift = false;
  SchemeOptions open = floored;
  open.unfloored = true;
  open.cutoff_source = false;
  open.raw_absorption = true;

  Scheme before(spec, knobs, grid, cfg, floored);
  Scheme after(spec, knobs, grid, cfg, open);
  GridState state = before.init_state();
  const double qtol = default_quench_tol(knobs);

  NonexistenceDiagnostic out;
  long steps_since = 0;
  while (state.time < t_end - 1e-12 * before.dt()) {
    if (!out.quench_time) {
      before.advance(state, t_end - state.time);
      if (auto q = detect_quench(state, qtol)) out.quench_time = *q;
      continue;
    }
    after.advance(state, t_end - state.time);
    ++steps_since;
    const auto it = std::min_element(state.values.begin(), state.values.end());
    if (*it < 0.0) {
      out.first_negative_time = state.time;
      out.steps_after_quench = steps_since;
      out.min_value = *it;
      out.min_x = grid.x(static_cast<int>(it - state.values.begin()));
      break;
    }
  }
  if (!out.first_negative_time) {
    const auto it = std::min_element(state.values.begin(), state.values.end());
    out.min_value = *it;
    out.min_x = grid.x(static_cast<int>(it - state.values.begin()));
  }
  return out;
}

}  // namespace pqlab

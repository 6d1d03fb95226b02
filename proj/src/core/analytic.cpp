#include "analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace pqlab {

void CalibrationConstants::validate() const {
  if (!(c_smoothing > 0.0) || !(c2_mf > 0.0))
    fail(ErrorKind::invalid_argument, "calibration constants must be strictly positive");
}

double extinction_profile(double L, double beta, double t) {
  const double base = std::pow(L, 1.0 + beta) - (1.0 + beta) * t;
  if (base <= 0.0) return 0.0;
  return std::pow(base, 1.0 / (1.0 + beta));
}

double GammaEpsProfile::at(double t) const {
  if (times.empty()) return 0.0;
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  const double w = (t - times[j - 1]) / (times[j] - times[j - 1]);
  return (1.0 - w) * values[j - 1] + w * values[j];
}

GammaEpsProfile solve_gamma_eps(double eps, double beta, double L,
                                std::span<const double> t_grid) {
  if (!(L > 0.0)) fail(ErrorKind::invalid_argument, "solve_gamma_eps needs L > 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] >= t_grid[i - 1]))
      fail(ErrorKind::invalid_argument, "solve_gamma_eps needs a nondecreasing time grid");

  GammaEpsProfile out;
  out.times.assign(t_grid.begin(), t_grid.end());
  out.values.reserve(t_grid.size());

  auto rhs = [&](double g) { return g > eps ? -eval_g_eps(eps, beta, g) : 0.0; };

  const double h_max = 1e-4 * std::pow(L, 1.0 + beta);
  double t = 0.0;
  double g = L;
  const double level = 2.0 * eps;
  if (g <= level) out.crossing_2eps = 0.0;

  for (double target : t_grid) {
    while (t < target) {
      const double h = std::min(h_max, target - t);
      const double k1 = rhs(g);
      const double k2 = rhs(g + 0.5 * h * k1);
      const double k3 = rhs(g + 0.5 * h * k2);
      const double k4 = rhs(g + h * k3);
      const double next = g + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!std::isfinite(next))
        fail(ErrorKind::solver, "Gamma_eps integration failed at t = " + std::to_string(t));
      if (!out.crossing_2eps && next <= level) {
        // secant inside the step
        out.crossing_2eps = t + h * (g - level) / (g - next);
      }
      g = next;
      t += h;
    }
    out.values.push_back(g);
  }
  return out;
}

double stationary_barrier(double M, const DerivedConstants& c, double x) {
  const double base = std::pow(M, 1.0 / c.gamma) - c.sigma * x;
  if (base <= 0.0) return 0.0;
  return std::pow(base, c.gamma);
}

double stationary_barrier_slope(double M, const DerivedConstants& c, double x) {
  const double base = std::pow(M, 1.0 / c.gamma) - c.sigma * x;
  if (base <= 0.0) return 0.0;
  return -c.gamma * c.sigma * std::pow(base, c.gamma - 1.0);
}

double support_bound(double R0, double M, const DerivedConstants& c) {
  return R0 + std::pow(M, 1.0 / c.gamma) / c.sigma;
}

double quench_bound_sup(double M, double beta) {
  return std::pow(M, 1.0 + beta) / (1.0 + beta);
}

namespace {

// h(tau) = tau + K tau^{-(1+beta)/lambda} / (1+beta)
double l1_k(double m, double p, double beta, const CalibrationConstants& cal) {
  const double lambda = 2.0 * (p - 1.0);
  return std::pow(cal.c_smoothing * std::pow(m, p / lambda), 1.0 + beta);
}

}  // namespace

double quench_l1_objective(double tau, double m, double p, double beta,
                           const CalibrationConstants& cal) {
  const double lambda = 2.0 * (p - 1.0);
  return tau + l1_k(m, p, beta, cal) * std::pow(tau, -(1.0 + beta) / lambda) / (1.0 + beta);
}

double quench_l1_objective_derivative(double tau, double m, double p, double beta,
                                      const CalibrationConstants& cal) {
  const double lambda = 2.0 * (p - 1.0);
  return 1.0 - l1_k(m, p, beta, cal) / lambda * std::pow(tau, -(1.0 + beta) / lambda - 1.0);
}

QuenchL1Bound quench_bound_l1(double m, double p, double beta, const CalibrationConstants& cal) {
  cal.validate();
  if (m <= 0.0) return {0.0, 0.0};

  auto h = [&](double log_tau) { return quench_l1_objective(std::exp(log_tau), m, p, beta, cal); };

  // Log-scale bracketing on [1e-8, 1e8].
  const double lo_end = std::log(1e-8);
  const double hi_end = std::log(1e8);
  const int n = 64;
  int best = 0;
  double best_val = h(lo_end);
  for (int i = 1; i <= n; ++i) {
    const double v = h(lo_end + (hi_end - lo_end) * i / n);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = lo_end + (hi_end - lo_end) * std::max(best - 1, 0) / n;
  double b = lo_end + (hi_end - lo_end) * std::min(best + 1, n) / n;

  // Golden-section search.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = h(c);
  double fd = h(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = h(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = h(d);
    }
  }
  double tau = std::exp(0.5 * (a + b));

  // Newton polish on h'(tau) = 0; h is strictly convex so this stays put.
  const double lambda = 2.0 * (p - 1.0);
  const double e = (1.0 + beta) / lambda + 1.0;
  for (int it = 0; it < 20; ++it) {
    const double d1 = quench_l1_objective_derivative(tau, m, p, beta, cal);
    const double d2 = l1_k(m, p, beta, cal) / lambda * e * std::pow(tau, -e - 1.0);
    const double next = tau - d1 / d2;
    if (!(next > 0.0)) break;
    const bool done = std::abs(next - tau) <= 1e-15 * tau;
    tau = next;
    if (done) break;
  }
  return {quench_l1_objective(tau, m, p, beta, cal), tau};
}

double cap_Mg(const std::function<double(double)>& g, double M, double p, bool monotone) {
  if (M <= 0.0) return std::pow(std::abs(g(0.0)), 1.0 / p);
  if (monotone) return std::pow(std::abs(g(2.0 * M)), 1.0 / p);
  const int n = 4096;
  double mx = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = 2.0 * M * i / n;
    const double v = std::abs(g(s));
    if (!std::isfinite(v))
      fail(ErrorKind::evaluation, "cap_Mg: non-finite value at s = " + std::to_string(s));
    mx = std::max(mx, v);
  }
  return std::pow(mx, 1.0 / p);
}

double bracket_sup(double t, double M, const SourceTerm& src, double p, double beta) {
  if (!(t > 0.0)) fail(ErrorKind::invalid_argument, "bracket_sup needs t > 0");
  const bool monotone = src.has(kH2);
  const double Mf = cap_Mg([&](double s) { return eval_f(src, s); }, M, p, monotone);
  double Mfp = 0.0;
  if (monotone) {
    Mfp = 0.0;
  } else if (src.has(kGlobalLipschitz) && src.lipschitz_constant()) {
    Mfp = std::pow(*src.lipschitz_constant(), 1.0 / p);
  } else {
    // f' sampled away from s = 0 where power kinds with q < 1 blow up
    Mfp = cap_Mg(
        [&](double s) {
          const double v = eval_f_prime(src, s);
          return std::isfinite(v) ? v : 0.0;
        },
        M, p, false);
  }
  return std::pow(t, -1.0 / p) * std::pow(M, (1.0 + beta) / p) + Mf * std::pow(M, beta / p) +
         Mfp * std::pow(M, (1.0 + beta) / p) + 1.0;
}

double bracket_l1(double tau, double m, const SourceTerm& src, double p, double beta,
                  const CalibrationConstants& cal) {
  if (!(tau > 0.0)) fail(ErrorKind::invalid_argument, "bracket_l1 needs tau > 0");
  const double lambda = 2.0 * (p - 1.0);
  const double level = cal.c2_mf * std::pow(tau, -1.0 / lambda) * std::pow(m, p / lambda);
  const double mf = std::pow(eval_f(src, level), 1.0 / p);
  return std::pow(tau, -(lambda + beta + 1.0) / (lambda * p)) * std::pow(m, (1.0 + beta) / lambda) +
         std::pow(tau, -beta / (lambda * p)) * std::pow(m, beta / lambda) * mf + 1.0;
}

double BoundsReport::smoothing_bound_at(double t) const {
  const double p = constants.lambda / 2.0 + 1.0;
  return calibration.c_smoothing * std::pow(t, -1.0 / constants.lambda) *
         std::pow(l1_norm, p / constants.lambda);
}

BoundsReport make_bounds_report(const ProblemSpec& spec, const CalibrationConstants& cal,
                                double t, double tau) {
  spec.validate();
  cal.validate();
  BoundsReport r{};
  r.constants = derived_constants(spec.p, spec.beta);
  r.calibration = cal;
  r.sup_norm = spec.initial.sup_norm();
  r.l1_norm = spec.initial.l1_norm(spec.domain.half_length);
  r.quench_bound_sup = quench_bound_sup(r.sup_norm, spec.beta);
  r.quench_bound_l1 = quench_bound_l1(r.l1_norm, spec.p, spec.beta, cal);
  if (auto R0 = spec.initial.support_radius())
    r.support_radius_m0 = support_bound(*R0, r.sup_norm, r.constants);
  r.bracket_sup_t = t;
  r.bracket_sup = bracket_sup(t, r.sup_norm, spec.source, spec.p, spec.beta);
  r.bracket_l1_tau = tau;
  r.bracket_l1 = bracket_l1(tau, r.l1_norm, spec.source, spec.p, spec.beta, cal);
  return r;
}

}  // namespace pqlab

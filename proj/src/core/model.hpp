#pragma once

// Continuous problem description:
//   u_t - (|u_x|^{p-2} u_x)_x + u^{-beta} chi{u>0} + f(u) = 0
// together with the regularized nonlinearities used by the scheme.

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pqlab {

enum Hypothesis : unsigned {
  kH1 = 1u << 0,               // f in C^1, f(0) = 0
  kH2 = 1u << 1,               // f nondecreasing, f(0) = 0
  kH3 = 1u << 2,               // f(s) >= s^{q0} for large s
  kGlobalLipschitz = 1u << 3,  // |f'| <= C_f
};

class SourceTerm {
 public:
  enum class Kind { zero, power, exp_minus_one, constant, user };

  static SourceTerm zero();
  static SourceTerm power(double q, unsigned hypotheses, std::optional<double> q0 = {});
  static SourceTerm exp_minus_one(unsigned hypotheses);
  /// f == c. Violates f(0) = 0 when c != 0; only usable with `nonexistence_probe`.
  static SourceTerm constant(double c);
  static SourceTerm user(std::function<double(double)> fn, unsigned hypotheses);

  /// Returns a copy scaled by `k`, i.e. s -> k f(s).
  SourceTerm scaled(double k) const;
  SourceTerm with_lipschitz(double c_f) const;

  Kind kind() const { return kind_; }
  unsigned hypotheses() const { return hypotheses_; }
  bool has(Hypothesis h) const { return (hypotheses_ & h) != 0; }
  double exponent() const { return q_; }
  double constant_value() const { return c_; }
  double coefficient() const { return coefficient_; }
  std::optional<double> q0() const { return q0_; }
  std::optional<double> lipschitz_constant() const { return lipschitz_; }
  bool violates_origin() const { return violates_origin_; }

  std::string describe() const;

  /// Spot checks hypothesis tags on [0, range]; throws on violation.
  void validate(double range) const;

 private:
  SourceTerm() = default;

  Kind kind_ = Kind::zero;
  unsigned hypotheses_ = kH1 | kH2;
  double q_ = 1.0;
  double c_ = 0.0;
  double coefficient_ = 1.0;
  std::optional<double> q0_;
  std::optional<double> lipschitz_;
  bool violates_origin_ = false;
  std::function<double(double)> fn_;

  friend double eval_f(const SourceTerm&, double);
  friend double eval_f_prime(const SourceTerm&, double);
};

double eval_f(const SourceTerm& src, double s);
/// Analytic for built-in kinds, central difference (step 1e-6 max(1,s)) for user kinds.
double eval_f_prime(const SourceTerm& src, double s);

class InitialData {
 public:
  enum class Kind { bump, cosine, table, decaying_tail };

  /// M (1 - (x/R0)^2)^2 on [-R0, R0], zero elsewhere.
  static InitialData bump(double R0, double M);
  /// M cos(pi x / (2 l)) on [-l, l].
  static InitialData cosine(double M, double half_length);
  /// Piecewise linear through (nodes, values), zero outside.
  static InitialData table(std::vector<double> nodes, std::vector<double> values);
  /// M min(1, |x|^{-k}).
  static InitialData decaying_tail(double M, double k);

  Kind kind() const { return kind_; }
  double operator()(double x) const;

  double sup_norm() const { return sup_; }
  /// L1 norm over [-half_length, half_length].
  double l1_norm(double half_length) const;

  /// Support radius R0 for compactly supported kinds.
  std::optional<double> support_radius() const;

  double peak() const { return a_; }
  double width() const { return b_; }
  const std::vector<double>& table_nodes() const { return nodes_; }
  const std::vector<double>& table_values() const { return values_; }

 private:
  InitialData() = default;

  Kind kind_ = Kind::bump;
  double a_ = 0.0;  // peak
  double b_ = 1.0;  // R0, l, or decay power
  double sup_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> values_;
};

struct Domain {
  enum class Kind { dirichlet, cauchy_truncated };
  Kind kind = Kind::dirichlet;
  double half_length = 1.0;  // l for Dirichlet, truncation radius r for Cauchy
};

struct ProblemSpec {
  double p;
  double beta;
  Domain domain;
  SourceTerm source;
  InitialData initial;

  /// Throws Error(invalid_argument) unless p > 2, 0 < beta < 1, finite positive domain.
  void validate() const;
};

struct DerivedConstants {
  double gamma;   // p / (p + beta - 1)
  double lambda;  // 2 (p - 1)
  double sigma;   // (1 / (gamma^{p-1} (gamma-1) (p-1)))^{1/p}
};

DerivedConstants derived_constants(double p, double beta);

struct RegularizationKnobs {
  double epsilon;
  double eta;
  double alpha;

  static double default_alpha(double p) { return p <= 4.0 ? 1.0 : 1.5; }
  static double alpha_lower_bound(double p, double beta);

  /// eta < epsilon and alpha > 2 (gamma - 1) / gamma.
  void validate(double p, double beta) const;
};

/// Smooth nondecreasing cutoff: 0 on (-inf, 1], 1 on [2, inf).
double eval_psi(double s);
double eval_psi_prime(double s);

/// s^{-beta} psi(s / eps) for s > 0.
double eval_g_eps(double eps, double beta, double s);
double eval_g_eps_prime(double eps, double beta, double s);

inline double eval_g_eps(const RegularizationKnobs& k, double beta, double s) {
  return eval_g_eps(k.epsilon, beta, s);
}

/// (slope^2 + eta^alpha)^{(p-2)/2}.
double eval_diffusivity(const RegularizationKnobs& knobs, double p, double slope);

}  // namespace pqlab

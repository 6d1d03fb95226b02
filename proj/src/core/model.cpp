#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "error.hpp"

namespace pqlab {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double phi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double phi_prime(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------
// SourceTerm

SourceTerm SourceTerm::zero() {
  SourceTerm s;
  s.kind_ = Kind::zero;
  s.hypotheses_ = kH1 | kH2 | kGlobalLipschitz;
  s.lipschitz_ = 0.0;
  return s;
}

SourceTerm SourceTerm::power(double q, unsigned hypotheses, std::optional<double> q0) {
  if (!(q > 0.0) || !std::isfinite(q))
    fail(ErrorKind::invalid_argument, "source.q must be positive, got " + fmt_double(q));
  SourceTerm s;
  s.kind_ = Kind::power;
  s.q_ = q;
  s.hypotheses_ = hypotheses;
  s.q0_ = q0;
  return s;
}

SourceTerm SourceTerm::exp_minus_one(unsigned hypotheses) {
  SourceTerm s;
  s.kind_ = Kind::exp_minus_one;
  s.hypotheses_ = hypotheses;
  return s;
}

SourceTerm SourceTerm::constant(double c) {
  if (!(c >= 0.0) || !std::isfinite(c))
    fail(ErrorKind::invalid_argument, "source.c must be nonnegative, got " + fmt_double(c));
  SourceTerm s;
  s.kind_ = Kind::constant;
  s.c_ = c;
  s.hypotheses_ = kH2 | kGlobalLipschitz;
  s.lipschitz_ = 0.0;
  s.violates_origin_ = c != 0.0;
  return s;
}

SourceTerm SourceTerm::user(std::function<double(double)> fn, unsigned hypotheses) {
  if (!fn) fail(ErrorKind::invalid_argument, "user source requires a callable");
  SourceTerm s;
  s.kind_ = Kind::user;
  s.fn_ = std::move(fn);
  s.hypotheses_ = hypotheses;
  return s;
}

SourceTerm SourceTerm::scaled(double k) const {
  if (!(k >= 0.0) || !std::isfinite(k))
    fail(ErrorKind::invalid_argument, "source coefficient must be nonnegative");
  SourceTerm s = *this;
  s.coefficient_ *= k;
  if (s.lipschitz_) s.lipschitz_ = *s.lipschitz_ * k;
  return s;
}

SourceTerm SourceTerm::with_lipschitz(double c_f) const {
  if (!(c_f >= 0.0)) fail(ErrorKind::invalid_argument, "lipschitz constant must be >= 0");
  SourceTerm s = *this;
  s.lipschitz_ = c_f;
  s.hypotheses_ |= kGlobalLipschitz;
  return s;
}

std::string SourceTerm::describe() const {
  std::string base;
  switch (kind_) {
    case Kind::zero: base = "zero"; break;
    case Kind::power: base = "power(q=" + fmt_double(q_) + ")"; break;
    case Kind::exp_minus_one: base = "exp_minus_one"; break;
    case Kind::constant: base = "constant(c=" + fmt_double(c_) + ")"; break;
    case Kind::user: base = "user"; break;
  }
  if (coefficient_ != 1.0) base = fmt_double(coefficient_) + "*" + base;
  return base;
}

void SourceTerm::validate(double range) const {
  if (!violates_origin_) {
    const double f0 = eval_f(*this, 0.0);
    if (f0 != 0.0)
      fail(ErrorKind::invalid_argument,
           "source must satisfy f(0) = 0 (got " + fmt_double(f0) +
               "); use a constant source with the nonexistence probe instead");
  }
  if (has(kH2)) {
    // Logarithmic sample of the working range.
    const double hi = std::max(range, 1e-6);
    const int n = 200;
    double prev = eval_f(*this, 0.0);
    for (int i = 0; i <= n; ++i) {
      const double s = 1e-6 * std::pow(hi / 1e-6, static_cast<double>(i) / n);
      const double v = eval_f(*this, s);
      if (v < prev - 1e-12 * std::max(1.0, std::abs(prev)))
        fail(ErrorKind::invalid_argument,
             "source tagged H2 decreases near s = " + fmt_double(s));
      prev = v;
    }
  }
  if (has(kH3)) {
    if (!q0_ || !(*q0_ > 0.0 && *q0_ < 1.0))
      fail(ErrorKind::invalid_argument, "source tagged H3 requires q0 in (0,1)");
  }
  if (has(kGlobalLipschitz) && !lipschitz_)
    fail(ErrorKind::invalid_argument, "source tagged GlobalLipschitz requires lipschitz_constant");
}

double eval_f(const SourceTerm& src, double s) {
  if (!std::isfinite(s) || s < 0.0)
    fail(ErrorKind::evaluation, "source evaluated at invalid s = " + fmt_double(s));
  double v = 0.0;
  switch (src.kind_) {
    case SourceTerm::Kind::zero: v = 0.0; break;
    case SourceTerm::Kind::power: v = std::pow(s, src.q_); break;
    case SourceTerm::Kind::exp_minus_one: v = std::expm1(s); break;
    case SourceTerm::Kind::constant: v = src.c_; break;
    case SourceTerm::Kind::user:
      try {
        v = src.fn_(s);
      } catch (const std::exception& e) {
        fail(ErrorKind::evaluation,
             "user source failed at s = " + fmt_double(s) + ": " + e.what());
      }
      if (!std::isfinite(v) || v < 0.0)
        fail(ErrorKind::evaluation, "user source returned " + fmt_double(v) +
                                        " at s = " + fmt_double(s));
      break;
  }
  return src.coefficient_ * v;
}

double eval_f_prime(const SourceTerm& src, double s) {
  switch (src.kind_) {
    case SourceTerm::Kind::zero:
    case SourceTerm::Kind::constant: return 0.0;
    case SourceTerm::Kind::power:
      if (s == 0.0) return src.q_ < 1.0 ? HUGE_VAL : (src.q_ == 1.0 ? src.coefficient_ : 0.0);
      return src.coefficient_ * src.q_ * std::pow(s, src.q_ - 1.0);
    case SourceTerm::Kind::exp_minus_one: return src.coefficient_ * std::exp(s);
    case SourceTerm::Kind::user: {
      const double step = 1e-6 * std::max(1.0, s);
      const double lo = std::max(0.0, s - step);
      return (eval_f(src, s + step) - eval_f(src, lo)) / (s + step - lo);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// InitialData

InitialData InitialData::bump(double R0, double M) {
  if (!(R0 > 0.0) || !(M >= 0.0) || !std::isfinite(R0) || !std::isfinite(M))
    fail(ErrorKind::invalid_argument, "bump needs R0 > 0 and M >= 0");
  InitialData d;
  d.kind_ = Kind::bump;
  d.a_ = M;
  d.b_ = R0;
  d.sup_ = M;
  return d;
}

InitialData InitialData::cosine(double M, double half_length) {
  if (!(M >= 0.0) || !(half_length > 0.0))
    fail(ErrorKind::invalid_argument, "cosine needs M >= 0 and l > 0");
  InitialData d;
  d.kind_ = Kind::cosine;
  d.a_ = M;
  d.b_ = half_length;
  d.sup_ = M;
  return d;
}

InitialData InitialData::table(std::vector<double> nodes, std::vector<double> values) {
  if (nodes.size() != values.size() || nodes.size() < 2)
    fail(ErrorKind::invalid_argument, "table needs matching nodes/values of length >= 2");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!std::isfinite(nodes[i]) || !std::isfinite(values[i]) || values[i] < 0.0)
      fail(ErrorKind::invalid_argument, "table values must be finite and nonnegative");
    if (i > 0 && !(nodes[i] > nodes[i - 1]))
      fail(ErrorKind::invalid_argument, "table nodes must be strictly increasing");
  }
  InitialData d;
  d.kind_ = Kind::table;
  d.sup_ = *std::max_element(values.begin(), values.end());
  d.a_ = d.sup_;
  d.nodes_ = std::move(nodes);
  d.values_ = std::move(values);
  return d;
}

InitialData InitialData::decaying_tail(double M, double k) {
  if (!(M >= 0.0) || !(k > 0.0))
    fail(ErrorKind::invalid_argument, "decaying tail needs M >= 0 and power > 0");
  InitialData d;
  d.kind_ = Kind::decaying_tail;
  d.a_ = M;
  d.b_ = k;
  d.sup_ = M;
  return d;
}

double InitialData::operator()(double x) const {
  switch (kind_) {
    case Kind::bump: {
      const double r = x / b_;
      if (std::abs(r) >= 1.0) return 0.0;
      const double w = 1.0 - r * r;
      return a_ * w * w;
    }
    case Kind::cosine:
      if (std::abs(x) >= b_) return 0.0;
      return std::max(0.0, a_ * std::cos(std::numbers::pi * x / (2.0 * b_)));
    case Kind::table: {
      if (x < nodes_.front() || x > nodes_.back()) return 0.0;
      auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
      if (it == nodes_.end()) return values_.back();
      const std::size_t j = static_cast<std::size_t>(it - nodes_.begin());
      const double t = (x - nodes_[j - 1]) / (nodes_[j] - nodes_[j - 1]);
      return (1.0 - t) * values_[j - 1] + t * values_[j];
    }
    case Kind::decaying_tail: {
      const double ax = std::abs(x);
      return ax <= 1.0 ? a_ : a_ * std::pow(ax, -b_);
    }
  }
  return 0.0;
}

double InitialData::l1_norm(double half_length) const {
  const double L = half_length;
  switch (kind_) {
    case Kind::bump: {
      const double R = std::min(b_, L);
      // integral of (1 - r^2)^2 over [-R/b, R/b] times b
      const double s = R / b_;
      return a_ * b_ * 2.0 * (s - 2.0 * s * s * s / 3.0 + s * s * s * s * s / 5.0);
    }
    case Kind::cosine: {
      const double X = std::min(L, b_);
      return a_ * 4.0 * b_ / std::numbers::pi * std::sin(std::numbers::pi * X / (2.0 * b_));
    }
    case Kind::table: {
      double sum = 0.0;
      for (std::size_t i = 1; i < nodes_.size(); ++i) {
        const double lo = std::max(nodes_[i - 1], -L);
        const double hi = std::min(nodes_[i], L);
        if (hi <= lo) continue;
        sum += 0.5 * ((*this)(lo) + (*this)(hi)) * (hi - lo);
      }
      return sum;
    }
    case Kind::decaying_tail: {
      if (L <= 1.0) return 2.0 * a_ * L;
      const double tail = b_ == 1.0 ? std::log(L) : (std::pow(L, 1.0 - b_) - 1.0) / (1.0 - b_);
      return 2.0 * a_ * (1.0 + tail);
    }
  }
  return 0.0;
}

std::optional<double> InitialData::support_radius() const {
  switch (kind_) {
    case Kind::bump: return b_;
    case Kind::cosine: return b_;
    case Kind::table: {
      double r = 0.0;
      for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (values_[i] > 0.0) r = std::max(r, std::abs(nodes_[i]));
      // a positive endpoint value still drops to zero just outside
      return r;
    }
    case Kind::decaying_tail: return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ProblemSpec, constants, knobs

void ProblemSpec::validate() const {
  if (!(p > 2.0) || !std::isfinite(p))
    fail(ErrorKind::invalid_argument, "problem.p must satisfy p > 2, got " + fmt_double(p));
  if (!(beta > 0.0 && beta < 1.0))
    fail(ErrorKind::invalid_argument,
         "problem.beta must lie in (0,1), got " + fmt_double(beta));
  if (!(domain.half_length > 0.0) || !std::isfinite(domain.half_length))
    fail(ErrorKind::invalid_argument, "problem.domain.half_length must be finite and positive");
  source.validate(std::max(2.0 * initial.sup_norm(), 1.0));
}

DerivedConstants derived_constants(double p, double beta) {
  const double gamma = p / (p + beta - 1.0);
  const double lambda = 2.0 * (p - 1.0);
  const double sigma =
      std::pow(1.0 / (std::pow(gamma, p - 1.0) * (gamma - 1.0) * (p - 1.0)), 1.0 / p);
  return {gamma, lambda, sigma};
}

double RegularizationKnobs::alpha_lower_bound(double p, double beta) {
  const double gamma = p / (p + beta - 1.0);
  return 2.0 * (gamma - 1.0) / gamma;
}

void RegularizationKnobs::validate(double p, double beta) const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    fail(ErrorKind::invalid_argument, "regularization.epsilon must be positive");
  if (!(eta > 0.0) || !(eta < epsilon))
    fail(ErrorKind::invalid_argument, "regularization.eta must satisfy 0 < eta < epsilon (eta=" +
                                          fmt_double(eta) + ", epsilon=" +
                                          fmt_double(epsilon) + ")");
  const double lb = alpha_lower_bound(p, beta);
  if (!(alpha > lb))
    fail(ErrorKind::invalid_argument, "regularization.alpha must exceed 2(gamma-1)/gamma = " +
                                          fmt_double(lb) + ", got " + fmt_double(alpha));
}

double eval_psi(double s) {
  if (s <= 1.0) return 0.0;
  if (s >= 2.0) return 1.0;
  const double a = phi(s - 1.0);
  const double b = phi(2.0 - s);
  return a / (a + b);
}

double eval_psi_prime(double s) {
  if (s <= 1.0 || s >= 2.0) return 0.0;
  const double a = phi(s - 1.0);
  const double b = phi(2.0 - s);
  const double da = phi_prime(s - 1.0);
  const double db = -phi_prime(2.0 - s);
  const double d = a + b;
  return (da * b - a * db) / (d * d);
}

double eval_g_eps(double eps, double beta, double s) {
  if (!(s > 0.0)) fail(ErrorKind::invalid_argument, "g_eps needs s > 0, got " + fmt_double(s));
  if (s <= eps) return 0.0;
  const double base = std::pow(s, -beta);
  if (s >= 2.0 * eps) return base;
  return base * eval_psi(s / eps);
}

double eval_g_eps_prime(double eps, double beta, double s) {
  if (s <= eps) return 0.0;
  const double base = std::pow(s, -beta);
  const double dbase = -beta * base / s;
  if (s >= 2.0 * eps) return dbase;
  return dbase * eval_psi(s / eps) + base * eval_psi_prime(s / eps) / eps;
}

double eval_diffusivity(const RegularizationKnobs& knobs, double p, double slope) {
  return std::pow(slope * slope + std::pow(knobs.eta, knobs.alpha), 0.5 * (p - 2.0));
}

}  // namespace pqlab

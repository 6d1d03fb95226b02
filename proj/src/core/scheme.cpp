#include "scheme.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace pqlab {

Grid Grid::make(double half_length, int n_cells) {
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    fail(ErrorKind::invalid_argument, "grid half_length must be positive");
  if (n_cells < 2) fail(ErrorKind::invalid_argument, "grid needs n_cells >= 2");
  return Grid{half_length, n_cells};
}

void StepConfig::validate() const {
  if (!(dt_max > 0.0) || !(dt_courant_factor > 0.0) || !(reaction_tol > 0.0) ||
      !(diffusion_tol > 0.0) || snapshot_stride <= 0)
    fail(ErrorKind::invalid_argument, "stepping parameters must all be positive");
}

bool solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> sup, std::span<double> rhs,
                       std::span<double> scratch) {
  const std::size_t n = diag.size();
  if (n == 0) return true;
  double pivot = diag[0];
  if (pivot == 0.0) return false;
  rhs[0] /= pivot;
  for (std::size_t i = 1; i < n; ++i) {
    scratch[i] = sup[i - 1] / pivot;
    pivot = diag[i] - sub[i] * scratch[i];
    if (pivot == 0.0) return false;
    rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= scratch[i + 1] * rhs[i + 1];
  return true;
}

// ---------------------------------------------------------------------------

Scheme::Scheme(const ProblemSpec& spec, const RegularizationKnobs& knobs, Grid grid,
               StepConfig cfg, SchemeOptions opts)
    : spec_(spec), knobs_(knobs), grid_(grid), cfg_(cfg), opts_(opts) {
  spec_.validate();
  knobs_.validate(spec_.p, spec_.beta);
  cfg_.validate();
  if (opts_.raw_absorption && !opts_.unfloored)
    fail(ErrorKind::invalid_argument, "raw absorption needs the unfloored reaction");
  grid_ = Grid::make(grid.half_length, grid.n_cells);
  dt_ = std::min(cfg_.dt_max, cfg_.dt_courant_factor * grid_.h());
  lift_ = opts_.lift ? knobs_.eta : 0.0;
  boundary_ = lift_;
  reg_ = std::pow(knobs_.eta, knobs_.alpha);

  const std::size_t m = static_cast<std::size_t>(grid_.n_cells - 1);
  sub_.resize(m);
  diag_.resize(m);
  sup_.resize(m);
  rhs_.resize(m);
  work_.resize(m);
  residual_.resize(m);
  trial_.resize(static_cast<std::size_t>(grid_.n_nodes()));
  star_.resize(static_cast<std::size_t>(grid_.n_nodes()));
}

double Scheme::mass(std::span<const double> v) const {
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
  return s * grid_.h();
}

GridState Scheme::init_state() const {
  std::vector<double> v(static_cast<std::size_t>(grid_.n_nodes()));
  for (int i = 0; i < grid_.n_nodes(); ++i)
    v[static_cast<std::size_t>(i)] = spec_.initial(grid_.x(i)) + lift_;
  return init_state(v);
}

GridState Scheme::init_state(std::span<const double> values) const {
  if (values.size() != static_cast<std::size_t>(grid_.n_nodes()))
    fail(ErrorKind::invalid_argument, "state size does not match the grid");
  GridState s;
  s.values.assign(values.begin(), values.end());
  for (double v : s.values)
    if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "initial state is not finite");
  s.values.front() = boundary_;
  s.values.back() = boundary_;
  s.ledger.initial_mass = mass(s.values);
  s.ledger.mass = s.ledger.initial_mass;
  return s;
}

double Scheme::flux(double slope) const {
  return slope * std::pow(slope * slope + reg_, 0.5 * (spec_.p - 2.0));
}

double Scheme::flux_prime(double slope) const {
  const double b = slope * slope + reg_;
  return std::pow(b, 0.5 * (spec_.p - 4.0)) * ((spec_.p - 1.0) * slope * slope + reg_);
}

double Scheme::source_part(double v) const {
  if (spec_.source.kind() == SourceTerm::Kind::zero) return 0.0;
  const double f = eval_f(spec_.source, std::max(v, 0.0));
  if (!opts_.cutoff_source) return f;
  return f * eval_psi(v / knobs_.epsilon);
}

double Scheme::source_part_prime(double v) const {
  if (spec_.source.kind() == SourceTerm::Kind::zero || v <= 0.0) return 0.0;
  const double fp = eval_f_prime(spec_.source, v);
  if (!opts_.cutoff_source) return fp;
  const double eps = knobs_.epsilon;
  return fp * eval_psi(v / eps) + eval_f(spec_.source, v) * eval_psi_prime(v / eps) / eps;
}

double Scheme::singular_part(double v) const {
  if (opts_.singular_weight == 0.0) return 0.0;
  if (opts_.raw_absorption) return v > 0.0 ? opts_.singular_weight * std::pow(v, -spec_.beta) : 0.0;
  return v > knobs_.epsilon ? opts_.singular_weight * eval_g_eps(knobs_.epsilon, spec_.beta, v) : 0.0;
}

double Scheme::reaction(double v) const { return source_part(v) + singular_part(v); }

double Scheme::reaction_prime(double v) const {
  double r = source_part_prime(v);
  if (opts_.singular_weight == 0.0) return r;
  if (opts_.raw_absorption) {
    if (v > 0.0) r -= opts_.singular_weight * spec_.beta * std::pow(v, -spec_.beta - 1.0);
  } else if (v > knobs_.epsilon) {
    r += opts_.singular_weight * eval_g_eps_prime(knobs_.epsilon, spec_.beta, v);
  }
  return r;
}

double Scheme::solve_raw_reaction(double target, double dt, std::size_t node) const {
  const double c0 = target - dt * source_part(0.0);
  if (c0 <= 0.0) return c0;
  auto G = [&](double v) { return v + dt * reaction(v) - target; };
  // G blows up at 0+ and is positive at `target`; walk down to the largest root.
  double hi = target, lo = target;
  bool found = false;
  while (lo > 1e-14 * target) {
    lo *= 0.9;
    if (G(lo) <= 0.0) {
      found = true;
      break;
    }
    hi = lo;
  }
  if (!found) return 0.0;
  for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (G(mid) <= 0.0) lo = mid;
    else hi = mid;
  }
  const double v = std::abs(G(lo)) < std::abs(G(hi)) ? lo : hi;
  if (std::abs(G(v)) > 1e3 * cfg_.reaction_tol + 1e-12 * target)
    fail(ErrorKind::solver, "raw reaction solve did not converge at node " + std::to_string(node));
  return v;
}

double Scheme::solve_reaction(double target, double dt, std::size_t node) const {
  const double eps = knobs_.epsilon;
  if (opts_.raw_absorption) return solve_raw_reaction(target, dt, node);
  auto G = [&](double v) { return v + dt * reaction(v) - target; };

  double a;
  if (opts_.unfloored) {
    // Below zero the reaction is the constant f(0).
    const double c0 = target - dt * source_part(0.0);
    if (c0 <= 0.0) return c0;
    a = 0.0;
  } else if (opts_.cutoff_source) {
    if (target <= eps) return target;
    a = eps;
  } else {
    if (target <= 0.0) return target;
    a = 0.0;
  }
  double b = target;
  if (G(b) == 0.0) return b;

  // G' >= 1 - dt w beta v^{-beta-1} on [max(a,eps), b] for monotone sources;
  // otherwise locate the first sign change so the smallest root is selected.
  const double v_lo = std::max(a, eps);
  const bool monotone_source =
      spec_.source.has(kH2) || spec_.source.kind() != SourceTerm::Kind::user;
  const double lower_slope =
      1.0 - dt * opts_.singular_weight * spec_.beta * std::pow(v_lo, -spec_.beta - 1.0);
  if (!(monotone_source && lower_slope > 0.0)) {
    const int n_scan = 256;
    double prev = a;
    for (int k = 1; k <= n_scan; ++k) {
      const double v = a + (b - a) * k / n_scan;
      if (G(v) >= 0.0) {
        a = prev;
        b = v;
        break;
      }
      prev = v;
    }
  }

  double v = b;
  double gv = G(v);
  const double tol = cfg_.reaction_tol;
  for (int it = 0; it < 300; ++it) {
    if (std::abs(gv) <= tol) return v;
    if (gv < 0.0) a = v; else b = v;
    const double d = 1.0 + dt * reaction_prime(v);
    double next = v - gv / d;
    if (!(d > 0.0) || !(next > a && next < b)) next = 0.5 * (a + b);
    if (b - a <= 4e-16 * std::max(1.0, std::abs(b))) {
      const double ga = G(a), gb = G(b);
      return std::abs(ga) < std::abs(gb) ? a : b;
    }
    v = next;
    gv = G(v);
  }
  fail(ErrorKind::solver, "reaction solve did not converge at node " + std::to_string(node) +
                              " (residual " + std::to_string(gv) + ")");
}

void Scheme::diffuse_linearized(std::span<const double> old, std::span<double> out, double dt) {
  const int N = grid_.n_cells;
  const double h = grid_.h();
  const double k = dt / (h * h);
  // frozen face diffusivities a_{i+1/2}, faces 0..N-1
  auto& a = trial_;
  for (int f = 0; f < N; ++f) {
    const double s = (old[f + 1] - old[f]) / h;
    a[f] = std::pow(s * s + reg_, 0.5 * (spec_.p - 2.0));
  }
  for (int i = 1; i < N; ++i) {
    const std::size_t r = static_cast<std::size_t>(i - 1);
    sub_[r] = -k * a[i - 1];
    sup_[r] = -k * a[i];
    diag_[r] = 1.0 + k * (a[i - 1] + a[i]);
    rhs_[r] = old[i];
  }
  rhs_.front() += k * a[0] * boundary_;
  rhs_.back() += k * a[N - 1] * boundary_;
  if (!solve_tridiagonal(sub_, diag_, sup_, rhs_, work_))
    fail(ErrorKind::solver, "tridiagonal pivot failure in diffusion step");
  out[0] = boundary_;
  out[N] = boundary_;
  for (int i = 1; i < N; ++i) out[i] = rhs_[static_cast<std::size_t>(i - 1)];
}

void Scheme::diffuse_implicit(std::span<const double> old, std::span<double> out, double dt) {
  const int N = grid_.n_cells;
  const double h = grid_.h();
  const double c = dt / h;
  const double k = dt / (h * h);

  double scale = 1.0;
  for (double v : old) scale = std::max(scale, std::abs(v));
  const double tol = cfg_.diffusion_tol * scale;

  std::copy(old.begin(), old.end(), out.begin());
  out[0] = boundary_;
  out[N] = boundary_;

  auto residual_norm = [&](std::span<const double> u, std::vector<double>& r) {
    double worst = 0.0;
    double left = flux((u[1] - u[0]) / h);
    for (int i = 1; i < N; ++i) {
      const double right = flux((u[i + 1] - u[i]) / h);
      const double ri = u[i] - old[i] - c * (right - left);
      r[static_cast<std::size_t>(i - 1)] = ri;
      worst = std::max(worst, std::abs(ri));
      left = right;
    }
    return worst;
  };

  double norm = residual_norm(out, residual_);
  for (int it = 0; it < 200; ++it) {
    if (norm <= tol) return;
    double left = flux_prime((out[1] - out[0]) / h);
    for (int i = 1; i < N; ++i) {
      const std::size_t r = static_cast<std::size_t>(i - 1);
      const double right = flux_prime((out[i + 1] - out[i]) / h);
      sub_[r] = -k * left;
      sup_[r] = -k * right;
      diag_[r] = 1.0 + k * (left + right);
      rhs_[r] = -residual_[r];
      left = right;
    }
    if (!solve_tridiagonal(sub_, diag_, sup_, rhs_, work_))
      fail(ErrorKind::solver, "tridiagonal pivot failure in diffusion Newton step");

    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      trial_[0] = boundary_;
      trial_[N] = boundary_;
      for (int i = 1; i < N; ++i) trial_[i] = out[i] + lambda * rhs_[static_cast<std::size_t>(i - 1)];
      const double trial_norm = residual_norm(trial_, work_);
      if (trial_norm < norm || trial_norm <= tol) {
        std::copy(trial_.begin(), trial_.end(), out.begin());
        residual_.swap(work_);
        norm = trial_norm;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      // Stagnation at round-off level counts as converged.
      if (norm <= 1e3 * tol) return;
      fail(ErrorKind::solver,
           "diffusion Newton line search failed (residual " + std::to_string(norm) + ")");
    }
  }
  if (norm > 1e3 * tol)
    fail(ErrorKind::solver,
         "diffusion Newton did not converge (residual " + std::to_string(norm) + ")");
}

void Scheme::advance(GridState& state, double max_dt) {
  const double dt = std::min(dt_, max_dt);
  if (!(dt > 0.0)) fail(ErrorKind::invalid_argument, "advance needs a positive step");
  const int N = grid_.n_cells;
  const double h = grid_.h();
  auto& u = state.values;

  // (a) diffusion
  if (cfg_.diffusion == DiffusionSolve::implicit) {
    diffuse_implicit(u, star_, dt);
  } else {
    diffuse_linearized(u, star_, dt);
  }

  // Boundary flux through both ends, measured on the updated state.
  double f_left, f_right;
  if (cfg_.diffusion == DiffusionSolve::implicit) {
    f_left = flux((star_[1] - star_[0]) / h);
    f_right = flux((star_[N] - star_[N - 1]) / h);
  } else {
    const double sl = (u[1] - u[0]) / h;
    const double sr = (u[N] - u[N - 1]) / h;
    f_left = std::pow(sl * sl + reg_, 0.5 * (spec_.p - 2.0)) * (star_[1] - star_[0]) / h;
    f_right = std::pow(sr * sr + reg_, 0.5 * (spec_.p - 2.0)) * (star_[N] - star_[N - 1]) / h;
  }
  state.ledger.boundary_outflux += dt * (f_left - f_right);

  // Residual of the diffusion solve leaks into the mass identity.
  {
    double leak = 0.0;
    double left = f_left;
    for (int i = 1; i < N; ++i) {
      double right;
      if (cfg_.diffusion == DiffusionSolve::implicit) {
        right = flux((star_[i + 1] - star_[i]) / h);
      } else {
        const double s = (u[i + 1] - u[i]) / h;
        right = std::pow(s * s + reg_, 0.5 * (spec_.p - 2.0)) * (star_[i + 1] - star_[i]) / h;
      }
      leak += std::abs(star_[i] - u[i] - dt / h * (right - left));
      left = right;
    }
    state.ledger.accumulated_tolerance += h * leak;
  }

  // (b) reaction, node by node
  double sink_singular = 0.0;
  double sink_source = 0.0;
  double leak = 0.0;
  for (int i = 1; i < N; ++i) {
    const double target = star_[i];
    const double v = solve_reaction(target, dt, static_cast<std::size_t>(i));
    const double rf = source_part(v);
    // a quenched node hands what is left to the singular sink
    const double rs = (opts_.raw_absorption && v == 0.0) ? std::max(0.0, target / dt - rf)
                                                           : singular_part(v);
    sink_singular += rs;
    sink_source += rf;
    leak += std::abs(v + dt * (rs + rf) - target);
    u[i] = v;
  }
  u[0] = boundary_;
  u[N] = boundary_;
  state.ledger.absorbed_singular += h * dt * sink_singular;
  state.ledger.absorbed_source += h * dt * sink_source;
  state.ledger.accumulated_tolerance += h * leak;
  state.ledger.mass = mass(u);

  state.time += dt;
  ++state.steps;
}

// ---------------------------------------------------------------------------

std::optional<double> detect_quench(const GridState& state, double tol) {
  const double mx = *std::max_element(state.values.begin(), state.values.end());
  if (mx <= tol) return state.time;
  return std::nullopt;
}

std::optional<SupportInterval> measure_support(std::span<const double> values, const Grid& grid,
                                               double tol) {
  int first = -1, last = -1;
  for (int i = 0; i < static_cast<int>(values.size()); ++i) {
    if (values[static_cast<std::size_t>(i)] > tol) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) return std::nullopt;
  return SupportInterval{grid.x(first), grid.x(last)};
}

std::vector<double> sample_gradient(std::span<const double> values, const Grid& grid) {
  if (values.size() < 2) fail(ErrorKind::invalid_argument, "sample_gradient needs >= 2 nodes");
  std::vector<double> s(values.size() - 1);
  const double h = grid.h();
  for (std::size_t i = 0; i + 1 < values.size(); ++i) s[i] = (values[i + 1] - values[i]) / h;
  return s;
}

double default_quench_tol(const RegularizationKnobs& k) {
  return 2.0 * k.epsilon + 2.0 * k.eta + 1e-8;
}

double default_support_tol(const RegularizationKnobs& k) {
  return k.eta + 1e-9;
}

std::vector<double> Trajectory::values_at(double t) const {
  if (snapshots.empty()) return {};
  if (t <= snapshots.front().t) return snapshots.front().values;
  if (t >= snapshots.back().t) return snapshots.back().values;
  auto it = std::upper_bound(snapshots.begin(), snapshots.end(), t,
                             [](double tt, const Snapshot& s) { return tt < s.t; });
  const Snapshot& hi = *it;
  const Snapshot& lo = *(it - 1);
  const double w = (t - lo.t) / (hi.t - lo.t);
  std::vector<double> v(lo.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1.0 - w) * lo.values[i] + w * hi.values[i];
  return v;
}

Trajectory run(Scheme& scheme, GridState state, const RunOptions& opts) {
  const auto& knobs = scheme.knobs();
  Trajectory tr{scheme.grid(),
                knobs.eta,
                knobs.epsilon,
                scheme.boundary_value(),
                scheme.dt(),
                opts.quench_tol >= 0.0 ? opts.quench_tol : default_quench_tol(knobs),
                opts.support_tol >= 0.0 ? opts.support_tol : default_support_tol(knobs),
                {},
                std::nullopt};
  const double t_end = opts.t_end;
  const int stride = scheme.config().snapshot_stride;

  auto snap = [&](const GridState& s) {
    tr.snapshots.push_back(
        Snapshot{s.time, s.values, s.ledger, measure_support(s.values, tr.grid, tr.support_tol)});
  };
  auto note_identity = [&](const GridState& s) {
    const double scale = std::max(s.ledger.initial_mass, 1e-300);
    tr.worst_relative_identity =
        std::max(tr.worst_relative_identity, std::abs(s.ledger.identity_residual()) / scale);
  };

  snap(state);
  note_identity(state);
  if (auto q = detect_quench(state, tr.quench_tol)) {
    tr.quench_time = *q;
    if (opts.stop_on_quench) return tr;
  }

  const double t_stop = t_end - 1e-12 * scheme.dt();
  while (state.time < t_stop) {
    const double prev_mass = state.ledger.mass;
    scheme.advance(state, t_end - state.time);
    note_identity(state);
    if (state.ledger.mass > prev_mass + 1e-12 * std::max(1.0, state.ledger.initial_mass))
      tr.ledger_monotone = false;
    const bool at_stride = state.steps % static_cast<std::size_t>(stride) == 0;
    if (!tr.quench_time) {
      if (auto q = detect_quench(state, tr.quench_tol)) {
        tr.quench_time = *q;
        snap(state);
        if (opts.stop_on_quench) return tr;
        continue;
      }
    }
    if (at_stride) snap(state);
  }
  if (tr.snapshots.back().t != state.time) snap(state);
  return tr;
}

}  // namespace pqlab

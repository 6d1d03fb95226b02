#pragma once

// Monotone finite-difference discretization of the regularized problem
//   z_t - (a(z_x) z_x)_x + g_eps(z) + f(z) psi_eps(z) = 0,  z(+-l) = eta.
// One step = implicit p-Laplacian diffusion followed by an implicit pointwise
// reaction solve (Lie splitting). A mass ledger records every sink exactly.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "model.hpp"

namespace pqlab {

struct Grid {
  double half_length;
  int n_cells;

  static Grid make(double half_length, int n_cells);

  double h() const { return 2.0 * half_length / n_cells; }
  double x(int i) const { return -half_length + i * h(); }
  int n_nodes() const { return n_cells + 1; }
};

struct MassLedger {
  double initial_mass = 0.0;
  double mass = 0.0;
  double absorbed_singular = 0.0;
  double absorbed_source = 0.0;
  double boundary_outflux = 0.0;
  /// Sum of per-step |solver residual| contributions, the admissible identity drift.
  double accumulated_tolerance = 0.0;

  /// initial - (mass + sinks); zero up to solver tolerance.
  double identity_residual() const {
    return initial_mass - (mass + absorbed_singular + absorbed_source + boundary_outflux);
  }
};

struct GridState {
  std::vector<double> values;
  double time = 0.0;
  std::size_t steps = 0;
  MassLedger ledger;
};

enum class DiffusionSolve {
  implicit,    // backward Euler in the nonlinear flux, Newton to tolerance
  linearized,  // single solve with diffusivity frozen at the old slopes
};

struct StepConfig {
  double dt_max = 1e-3;
  double dt_courant_factor = 0.5;
  double reaction_tol = 1e-12;
  double diffusion_tol = 1e-13;
  int snapshot_stride = 10;
  DiffusionSolve diffusion = DiffusionSolve::implicit;

  void validate() const;
};

struct SchemeOptions {
  /// Lift the data and boundary by eta; false gives zero Dirichlet data.
  bool lift = true;
  /// Weight of the singular absorption g_eps; 0 switches it off.
  double singular_weight = 1.0;
  /// Apply psi_eps to the source term.
  bool cutoff_source = true;
  /// Drop the [eps, u*] bracket so the reaction may drive values negative.
  bool unfloored = false;
  /// Unregularized sink u^{-beta} chi{u>0} in place of g_eps; needs `unfloored`.
  /// A node without a positive root quenches to 0.
  bool raw_absorption = false;
};

class Scheme {
 public:
  Scheme(const ProblemSpec& spec, const RegularizationKnobs& knobs, Grid grid, StepConfig cfg,
         SchemeOptions opts = {});

  /// Sampled u0 (+ eta), endpoints pinned at the boundary value.
  GridState init_state() const;
  GridState init_state(std::span<const double> values) const;

  /// One diffusion + reaction step of size min(dt(), max_dt).
  void advance(GridState& state, double max_dt = 1e300);

  double dt() const { return dt_; }
  const Grid& grid() const { return grid_; }
  double boundary_value() const { return boundary_; }
  const ProblemSpec& spec() const { return spec_; }
  const RegularizationKnobs& knobs() const { return knobs_; }
  const StepConfig& config() const { return cfg_; }
  const SchemeOptions& options() const { return opts_; }

  /// Trapezoid mass of a nodal vector.
  double mass(std::span<const double> values) const;

  /// Flux a(s) s with the lifted diffusivity and its derivative.
  double flux(double slope) const;
  double flux_prime(double slope) const;

  /// g_eps + f psi_eps at v (with options applied).
  double reaction(double v) const;

  /// Root of v + dt R(v) = target selected as the smallest one.
  double solve_reaction(double target, double dt, std::size_t node) const;

 private:
  void diffuse_implicit(std::span<const double> old, std::span<double> out, double dt);
  void diffuse_linearized(std::span<const double> old, std::span<double> out, double dt);
  double reaction_prime(double v) const;
  double singular_part(double v) const;
  double solve_raw_reaction(double target, double dt, std::size_t node) const;
  double source_part(double v) const;
  double source_part_prime(double v) const;

  ProblemSpec spec_;
  RegularizationKnobs knobs_;
  Grid grid_;
  StepConfig cfg_;
  SchemeOptions opts_;
  double dt_;
  double boundary_;
  double lift_;
  double reg_;  // eta^alpha

  // workspace
  std::vector<double> sub_, diag_, sup_, rhs_, work_, trial_, residual_;
  std::vector<double> star_;
};

/// Thomas algorithm for a tridiagonal system; `sub[0]` and `sup[n-1]` unused.
/// Overwrites `rhs` with the solution. Returns false on a zero pivot.
bool solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                       std::span<const double> sup, std::span<double> rhs,
                       std::span<double> scratch);

/// First time with max u <= tol, else none.
std::optional<double> detect_quench(const GridState& state, double tol);

struct SupportInterval {
  double left;
  double right;
  double radius() const { return std::max(-left, right); }
};

/// Smallest node interval containing {u_i > tol}.
std::optional<SupportInterval> measure_support(std::span<const double> values, const Grid& grid,
                                               double tol);

/// (u_{i+1} - u_i) / h per face.
std::vector<double> sample_gradient(std::span<const double> values, const Grid& grid);

struct Snapshot {
  double t;
  std::vector<double> values;
  MassLedger ledger;
  std::optional<SupportInterval> support;
};

struct RunOptions {
  double t_end = 1.0;
  /// Values <= quench_tol count as quenched; negative selects the default floor.
  double quench_tol = -1.0;
  double support_tol = -1.0;
  bool stop_on_quench = true;
};

struct Trajectory {
  Grid grid;
  double eta;
  double epsilon;
  double boundary_value;
  double dt;
  double quench_tol;
  double support_tol;
  std::vector<Snapshot> snapshots;
  std::optional<double> quench_time;
  /// max over steps of |ledger identity residual| relative to initial mass
  double worst_relative_identity = 0.0;
  bool ledger_monotone = true;

  const Snapshot& initial() const { return snapshots.front(); }
  const Snapshot& final() const { return snapshots.back(); }
  /// Linear interpolation in time between stored snapshots.
  std::vector<double> values_at(double t) const;
};

/// Default quench threshold for a regularized run: 2 eps + 2 eta + 1e-8.
double default_quench_tol(const RegularizationKnobs& k);
/// Default support threshold: eta + 1e-9, just above the lifted floor.
double default_support_tol(const RegularizationKnobs& k);

Trajectory run(Scheme& scheme, GridState state, const RunOptions& opts);

}  // namespace pqlab

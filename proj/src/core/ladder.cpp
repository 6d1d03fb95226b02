#include "ladder.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "analytic.hpp"
#include "error.hpp"

namespace pqlab {

namespace {

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

Trajectory run_level(const ProblemSpec& spec, const LadderPlan& plan, double eps, double eta,
                     Grid grid) {
  RegularizationKnobs knobs{eps, eta, plan.alpha_for(spec.p)};
  Scheme scheme(spec, knobs, grid, plan.step);
  return run(scheme, scheme.init_state(), plan.run);
}

}  // namespace

LadderPlan LadderPlan::defaults(const ProblemSpec& spec, int n_cells) {
  LadderPlan plan;
  const double M = std::max(spec.initial.sup_norm(), 1e-12);
  plan.eps_sequence = {0.1 * M, 0.05 * M, 0.025 * M, 0.0125 * M};
  const double eps_min = plan.eps_sequence.back();
  plan.eta_sequence = {1e-2 * eps_min, 1e-3 * eps_min, 1e-4 * eps_min};
  plan.n_cells = n_cells;
  if (auto R0 = spec.initial.support_radius(); R0 && spec.initial.sup_norm() > 0.0) {
    const auto c = derived_constants(spec.p, spec.beta);
    double r = 0.5 * support_bound(*R0, spec.initial.sup_norm(), c);
    for (int i = 0; i < 4; ++i, r *= 2.0) plan.radius_sequence.push_back(r);
  } else {
    plan.radius_sequence = {spec.domain.half_length};
  }
  return plan;
}

LevelDiff compare_levels(const Trajectory& fine, const Trajectory& coarse, int offset) {
  LevelDiff d;
  const double t_common = std::min(fine.final().t, coarse.final().t);
  const double h = fine.grid.h();
  const int n_fine = fine.grid.n_nodes();
  const int n_coarse = coarse.grid.n_nodes();

  auto visit = [&](double t, const std::vector<double>& a, const std::vector<double>& b) {
    double l1 = 0.0;
    for (int i = 0; i < n_fine; ++i) {
      const int j = i + offset;
      if (j < 0 || j >= n_coarse) continue;
      const double va = a[static_cast<std::size_t>(i)] - fine.boundary_value;
      const double vb = b[static_cast<std::size_t>(j)] - coarse.boundary_value;
      const double diff = va - vb;
      l1 += std::abs(diff) * h;
      if (std::abs(diff) > d.sup) {
        d.sup = std::abs(diff);
        d.x = fine.grid.x(i);
        d.t = t;
      }
      if (diff > d.max_excess) {
        d.max_excess = diff;
        d.excess_x = fine.grid.x(i);
        d.excess_t = t;
      }
    }
    d.l1 = std::max(d.l1, l1);
  };

  // Prefer snapshot times present in both trajectories.
  std::size_t j = 0;
  bool any = false;
  for (const auto& s : fine.snapshots) {
    if (s.t > t_common + 1e-12) break;
    while (j < coarse.snapshots.size() && coarse.snapshots[j].t < s.t - 1e-12 * std::max(1.0, s.t))
      ++j;
    if (j < coarse.snapshots.size() &&
        std::abs(coarse.snapshots[j].t - s.t) <= 1e-12 * std::max(1.0, s.t)) {
      visit(s.t, s.values, coarse.snapshots[j].values);
      any = true;
    }
  }
  if (!any) {
    for (const auto& s : fine.snapshots) {
      if (s.t > t_common) break;
      visit(s.t, s.values, coarse.values_at(s.t));
    }
  }
  return d;
}

PEpsResult solve_P_eps(const ProblemSpec& spec, double eps, const LadderPlan& plan) {
  if (plan.eta_sequence.empty())
    fail(ErrorKind::invalid_argument, "ladder needs a nonempty eta sequence");
  if (!strictly_decreasing(plan.eta_sequence))
    fail(ErrorKind::invalid_argument, "ladder eta sequence must be strictly decreasing");
  if (!(plan.eta_sequence.front() < eps))
    fail(ErrorKind::invalid_argument, "ladder eta values must stay below eps");

  const Grid grid = Grid::make(spec.domain.half_length, plan.n_cells);
  PEpsResult out{run_level(spec, plan, eps, plan.eta_sequence.front(), grid), {}, true};
  out.levels.push_back({plan.eta_sequence.front(), out.trajectory.quench_time, std::nullopt});

  for (std::size_t k = 1; k < plan.eta_sequence.size(); ++k) {
    Trajectory next = run_level(spec, plan, eps, plan.eta_sequence[k], grid);
    const LevelDiff d = compare_levels(next, out.trajectory);
    out.levels.push_back({plan.eta_sequence[k], next.quench_time, d.sup});
    out.trajectory = std::move(next);
  }
  for (std::size_t k = 2; k < out.levels.size(); ++k)
    if (!(*out.levels[k].diff_to_previous < *out.levels[k - 1].diff_to_previous))
      out.converging = false;
  return out;
}

std::optional<double> aitken(const std::vector<double>& v) {
  if (v.size() < 3) return std::nullopt;
  const double a = v[v.size() - 3], b = v[v.size() - 2], c = v[v.size() - 1];
  const double den = (c - b) - (b - a);
  if (std::abs(den) < 1e-300) return c;
  return c - (c - b) * (c - b) / den;
}

MaximalResult approximate_maximal(const ProblemSpec& spec, const LadderPlan& plan) {
  if (plan.eps_sequence.size() < 3)
    fail(ErrorKind::invalid_argument, "maximal-solution ladder needs at least 3 eps levels");
  if (!strictly_decreasing(plan.eps_sequence))
    fail(ErrorKind::invalid_argument, "ladder eps sequence must be strictly decreasing");

  std::vector<std::future<PEpsResult>> jobs;
  for (double eps : plan.eps_sequence)
    jobs.push_back(std::async(std::launch::async, [&, eps] { return solve_P_eps(spec, eps, plan); }));
  std::vector<PEpsResult> results;
  for (auto& j : jobs) results.push_back(j.get());

  MaximalResult out;
  std::vector<double> quench;
  for (std::size_t k = 0; k < results.size(); ++k) {
    EpsLevel lvl{plan.eps_sequence[k], results[k].trajectory.quench_time, std::nullopt,
                 results[k].converging};
    if (k > 0) {
      const LevelDiff d = compare_levels(results[k].trajectory, results[k - 1].trajectory);
      lvl.versus_previous = d;
      if (d.max_excess > out.worst_violation) {
        out.worst_violation = d.max_excess;
        out.worst_x = d.excess_x;
        out.worst_t = d.excess_t;
      }
    }
    if (lvl.quench_time) quench.push_back(*lvl.quench_time);
    out.levels.push_back(lvl);
  }
  if (quench.size() == results.size()) out.extrapolated_quench_time = aitken(quench);
  out.trajectory = std::move(results.back().trajectory);
  return out;
}

CauchyResult cauchy_solve(const ProblemSpec& spec, const LadderPlan& plan, double tolerance) {
  if (plan.radius_sequence.empty() || !strictly_increasing(plan.radius_sequence))
    fail(ErrorKind::invalid_argument, "radius sequence must be nonempty and increasing");
  if (plan.eps_sequence.empty() || plan.eta_sequence.empty())
    fail(ErrorKind::invalid_argument, "cauchy_solve needs eps and eta levels");
  const double eps = plan.eps_sequence.back();
  const double eta = plan.eta_sequence.back();
  const double h = plan.h > 0.0 ? plan.h : 2.0 * plan.radius_sequence.front() / plan.n_cells;

  CauchyResult out;
  if (auto R0 = spec.initial.support_radius())
    out.m0 = support_bound(*R0, spec.initial.sup_norm(), derived_constants(spec.p, spec.beta));

  std::vector<int> cells;
  for (double r : plan.radius_sequence) {
    const double n = 2.0 * r / h;
    const int ni = static_cast<int>(std::lround(n));
    if (std::abs(n - ni) > 1e-6 * n)
      fail(ErrorKind::invalid_argument, "radius is not a multiple of the common spacing");
    cells.push_back(ni);
  }

  std::vector<std::future<Trajectory>> jobs;
  for (std::size_t k = 0; k < plan.radius_sequence.size(); ++k) {
    jobs.push_back(std::async(std::launch::async, [&, k] {
      ProblemSpec s = spec;
      s.domain.kind = Domain::Kind::cauchy_truncated;
      s.domain.half_length = plan.radius_sequence[k];
      return run_level(s, plan, eps, eta, Grid::make(plan.radius_sequence[k], cells[k]));
    }));
  }
  std::vector<Trajectory> trajs;
  for (auto& j : jobs) trajs.push_back(j.get());

  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const double r = plan.radius_sequence[k];
    RadiusLevel lvl{r, cells[k], trajs[k].quench_time, std::nullopt, std::nullopt,
                    out.m0 && r >= *out.m0};
    if (trajs[k].final().support) lvl.support_radius = trajs[k].final().support->radius();
    if (k > 0) {
      // node i on radius r_{k-1} sits at node i + offset on radius r_k
      const int offset = (cells[k] - cells[k - 1]) / 2;
      const LevelDiff d = compare_levels(trajs[k - 1], trajs[k], offset);
      lvl.versus_previous = d;
      if (lvl.beyond_m0 && out.levels.back().beyond_m0) {
        out.worst_stable_diff = std::max(out.worst_stable_diff, d.sup);
        if (d.sup > tolerance) out.stable = false;
      }
    }
    out.levels.push_back(lvl);
  }
  out.trajectory = std::move(trajs.back());
  return out;
}

}  // namespace pqlab

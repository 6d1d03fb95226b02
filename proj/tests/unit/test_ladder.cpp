#include <doctest.h>

#include <cmath>

#include "analytic.hpp"
#include "error.hpp"
#include "ladder.hpp"

using namespace pqlab;

namespace {

ProblemSpec canonical() {
  return {3.0, 0.5, {}, SourceTerm::zero(), InitialData::cosine(1.0, 1.0)};
}

LadderPlan small_plan() {
  LadderPlan plan;
  plan.eps_sequence = {0.1, 0.05, 0.025};
  plan.eta_sequence = {2.5e-4, 2.5e-5};
  plan.n_cells = 100;
  plan.run.t_end = 1.0;
  return plan;
}

}  // namespace

TEST_SUITE("ladder") {

TEST_CASE("default plan") {
  const LadderPlan plan = LadderPlan::defaults(canonical(), 200);
  REQUIRE(plan.eps_sequence.size() == 4);
  CHECK(plan.eps_sequence.front() == doctest::Approx(0.1));
  CHECK(plan.eps_sequence.back() == doctest::Approx(0.0125));
  REQUIRE(plan.eta_sequence.size() == 3);
  CHECK(plan.eta_sequence.back() == doctest::Approx(1e-4 * 0.0125));
  CHECK(plan.alpha_for(3.0) == 1.0);

  ProblemSpec cauchy = canonical();
  cauchy.domain = {Domain::Kind::cauchy_truncated, 4.0};
  cauchy.initial = InitialData::bump(1.0, 1.0);
  const LadderPlan cp = LadderPlan::defaults(cauchy, 200);
  REQUIRE(cp.radius_sequence.size() == 4);
  const double m0 = support_bound(1.0, 1.0, derived_constants(3.0, 0.5));
  CHECK(cp.radius_sequence.front() == doctest::Approx(0.5 * m0));
  CHECK(cp.radius_sequence[1] == doctest::Approx(m0));
}

TEST_CASE("aitken extrapolation") {
  // geometric convergence to 2 with ratio 1/2
  const auto a = aitken({3.0, 2.5, 2.25});
  REQUIRE(a.has_value());
  CHECK(*a == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_FALSE(aitken({1.0, 2.0}).has_value());
}

TEST_CASE("level comparison") {
  const Grid g = Grid::make(1.0, 4);
  Trajectory a{g, 0.0, 0.1, 0.0, 0.1, 0.0, 0.0, {}, {}, 0.0, true};
  Trajectory b = a;
  a.snapshots.push_back({0.0, {0, 1, 2, 1, 0}, {}, {}});
  b.snapshots.push_back({0.0, {0, 1, 2.5, 1, 0}, {}, {}});
  const LevelDiff d = compare_levels(a, b);
  CHECK(d.sup == doctest::Approx(0.5));
  CHECK(d.max_excess == doctest::Approx(0.0));
  const LevelDiff e = compare_levels(b, a);
  CHECK(e.max_excess == doctest::Approx(0.5));
  CHECK(e.excess_x == doctest::Approx(0.0));
}

TEST_CASE("eta ladder at fixed eps") {
  const PEpsResult r = solve_P_eps(canonical(), 0.05, small_plan());
  REQUIRE(r.levels.size() == 2);
  CHECK(r.levels[0].quench_time.has_value());
  CHECK(r.levels[1].diff_to_previous.has_value());
  CHECK(*r.levels[1].diff_to_previous < 1e-3);
  for (double v : r.trajectory.final().values) CHECK(v >= r.trajectory.eta - 1e-15);
}

TEST_CASE("maximal approximation is monotone in eps") {
  const MaximalResult m = approximate_maximal(canonical(), small_plan());
  REQUIRE(m.levels.size() == 3);
  CHECK(m.worst_violation <= 1e-6);
  for (std::size_t k = 1; k < m.levels.size(); ++k) {
    REQUIRE(m.levels[k].versus_previous.has_value());
    CHECK(m.levels[k].versus_previous->max_excess <= 1e-6);
  }
  for (const auto& l : m.levels) CHECK(l.quench_time.has_value());
  CHECK(m.extrapolated_quench_time.has_value());

  LadderPlan two = small_plan();
  two.eps_sequence = {0.1, 0.05};
  CHECK_THROWS_AS(approximate_maximal(canonical(), two), Error);
}

TEST_CASE("zero data stays at the floor on every level") {
  ProblemSpec spec = canonical();
  spec.initial = InitialData::bump(0.5, 0.0);
  LadderPlan plan = small_plan();
  plan.run.t_end = 0.05;
  const MaximalResult m = approximate_maximal(spec, plan);
  for (double v : m.trajectory.final().values) CHECK(v == doctest::Approx(m.trajectory.eta));
}

TEST_CASE("truncated Cauchy radii beyond m0 agree") {
  ProblemSpec spec{3.0, 0.5, {Domain::Kind::cauchy_truncated, 4.0}, SourceTerm::zero(),
                   InitialData::bump(1.0, 1.0)};
  LadderPlan plan;
  plan.eps_sequence = {0.0125};
  plan.eta_sequence = {1.25e-5};
  plan.radius_sequence = {2.0, 3.0, 4.0};
  plan.h = 0.02;
  plan.run.t_end = 0.2;
  const CauchyResult r = cauchy_solve(spec, plan, 1e-8);
  REQUIRE(r.levels.size() == 3);
  REQUIRE(r.m0.has_value());
  CHECK(*r.m0 == doctest::Approx(1.8320335292207617));
  CHECK(r.stable);
  CHECK(r.worst_stable_diff <= 1e-8);
  CHECK(r.levels[0].n_cells == 200);
  CHECK(r.levels[2].n_cells == 400);
}

}

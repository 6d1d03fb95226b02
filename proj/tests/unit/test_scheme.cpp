#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "analytic.hpp"
#include "error.hpp"
#include "scheme.hpp"
#include "verify.hpp"

using namespace pqlab;

namespace {

ProblemSpec canonical() {
  return {3.0, 0.5, {}, SourceTerm::zero(), InitialData::cosine(1.0, 1.0)};
}

// Dense Gaussian elimination with partial pivoting.
std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(A[i][k]) > std::abs(A[piv][k])) piv = i;
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = A[i][k] / A[k][k];
      for (std::size_t j = k; j < n; ++j) A[i][j] -= m * A[k][j];
      b[i] -= m * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return x;
}

}  // namespace

TEST_SUITE("scheme") {

TEST_CASE("grid geometry") {
  const Grid g = Grid::make(1.0, 100);
  CHECK(g.h() == doctest::Approx(0.02));
  CHECK(g.x(0) == -1.0);
  CHECK(g.x(100) == doctest::Approx(1.0));
  CHECK(g.n_nodes() == 101);
  CHECK_THROWS_AS(Grid::make(1.0, 1), Error);
}

TEST_CASE("tridiagonal solve agrees with dense elimination") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial;
    std::vector<double> sub(n), diag(n), sup(n), rhs(n), scratch(n);
    std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      sub[i] = i > 0 ? U(rng) : 0.0;
      sup[i] = i + 1 < n ? U(rng) : 0.0;
      diag[i] = 2.5 + U(rng);
      rhs[i] = U(rng);
      A[i][i] = diag[i];
      if (i > 0) A[i][i - 1] = sub[i];
      if (i + 1 < n) A[i][i + 1] = sup[i];
    }
    const std::vector<double> ref = dense_solve(A, rhs);
    REQUIRE(solve_tridiagonal(sub, diag, sup, rhs, scratch));
    for (std::size_t i = 0; i < n; ++i) CHECK(rhs[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
  std::vector<double> z{0.0, 0.0}, d{0.0, 1.0}, s{1.0, 0.0}, r{1.0, 1.0}, w(2);
  CHECK_FALSE(solve_tridiagonal(z, d, s, r, w));
}

TEST_CASE("initial state and trapezoid mass") {
  ProblemSpec spec = canonical();
  spec.initial = InitialData::bump(0.5, 0.0);
  Scheme scheme(spec, {0.1, 0.01, 1.0}, Grid::make(1.0, 100), {});
  const GridState s = scheme.init_state();
  for (double v : s.values) CHECK(v == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(s.ledger.initial_mass == doctest::Approx(0.02).epsilon(1e-13));

  Scheme flat(canonical(), {0.1, 0.01, 1.0}, Grid::make(1.0, 10), {}, {.lift = false});
  std::vector<double> v(11, 0.3);
  const GridState t = flat.init_state(v);
  CHECK(t.values.front() == 0.0);
  CHECK(t.values[5] == 0.3);
  CHECK_THROWS_AS(flat.init_state(std::vector<double>(5, 0.0)), Error);
}

TEST_CASE("constant floor state is a fixed point") {
  ProblemSpec spec = canonical();
  spec.initial = InitialData::bump(0.5, 0.0);
  Scheme scheme(spec, {0.1, 0.01, 1.0}, Grid::make(1.0, 50), {});
  GridState s = scheme.init_state();
  for (int k = 0; k < 20; ++k) scheme.advance(s);
  for (double v : s.values) CHECK(v == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(s.steps == 20);
}

TEST_CASE("flux stencil on a linear profile") {
  const double l = 1.0;
  Scheme scheme(canonical(), {0.5, 1e-14, 1.0}, Grid::make(l, 40), {});
  const double s = 1.0 / (2.0 * l);
  CHECK(scheme.flux(s) == doctest::Approx(s * std::abs(s)).epsilon(1e-12));
  CHECK(scheme.flux(-s) == doctest::Approx(-s * std::abs(s)).epsilon(1e-12));
  const double h = 1e-6;
  CHECK(scheme.flux_prime(0.3) ==
        doctest::Approx((scheme.flux(0.3 + h) - scheme.flux(0.3 - h)) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("one small step matches the hand-evaluated flux divergence") {
  // u = 0.5 + 0.25 x^2; for a tiny step the implicit update is dt * div F(u)
  StepConfig cfg;
  cfg.dt_max = 1e-9;
  const Grid grid = Grid::make(1.0, 40);
  Scheme scheme(canonical(), {0.5, 1e-14, 1.0}, grid, cfg,
                {.lift = false, .singular_weight = 0.0});
  std::vector<double> u(41);
  for (int i = 0; i <= 40; ++i) u[i] = 0.5 + 0.25 * grid.x(i) * grid.x(i);
  GridState st = scheme.init_state(u);
  const std::vector<double> before = st.values;
  scheme.advance(st);
  const double hh = grid.h();
  for (int i = 10; i <= 30; ++i) {
    const double sr = (before[i + 1] - before[i]) / hh;
    const double sl = (before[i] - before[i - 1]) / hh;
    const double div = (std::abs(sr) * sr - std::abs(sl) * sl) / hh;
    CHECK((st.values[i] - before[i]) / scheme.dt() == doctest::Approx(div).epsilon(1e-5));
  }
}

TEST_CASE("ordered pairs stay ordered") {
  const Scheme proto(canonical(), {0.0125, 1.25e-5, 1.0}, Grid::make(1.0, 60), {});
  const PropertyResult r = check_discrete_comparison(proto, 10, 100, 3, 1e-10);
  CHECK(r.passed());
  CHECK(r.worst_violation <= 1e-10);
}

TEST_CASE("reaction root is the smallest root") {
  Scheme scheme(canonical(), {0.0125, 1.25e-5, 1.0}, Grid::make(1.0, 20), {});
  for (double target : {0.5, 0.1, 0.03, 0.02, 0.0126, 0.005}) {
    const double v = scheme.solve_reaction(target, 1e-3, 1);
    CHECK(v <= target);
    CHECK(v + 1e-3 * scheme.reaction(v) == doctest::Approx(target).epsilon(1e-10));
  }
  CHECK(scheme.solve_reaction(0.005, 1e-3, 1) == 0.005);
}

TEST_CASE("quench detection and support") {
  GridState z;
  z.values = {0.0, 0.0, 0.0};
  z.time = 0.25;
  REQUIRE(detect_quench(z, 1e-8).has_value());
  CHECK(*detect_quench(z, 1e-8) == 0.25);
  z.values = {1.0, 1.0, 1.0};
  CHECK_FALSE(detect_quench(z, 1e-8).has_value());

  const Grid g = Grid::make(3.0, 6);
  const std::vector<double> u{0, 0, 0.2, 0.5, 0.1, 0, 0};
  const auto s = measure_support(u, g, 0.05);
  REQUIRE(s.has_value());
  CHECK(s->left == doctest::Approx(-1.0));
  CHECK(s->right == doctest::Approx(1.0));
  CHECK_FALSE(measure_support(std::vector<double>(7, 0.01), g, 0.05).has_value());

  const Grid fine = Grid::make(2.0, 400);
  std::vector<double> b(401);
  const InitialData bump = InitialData::bump(1.0, 1.0);
  for (int i = 0; i <= 400; ++i) b[i] = bump(fine.x(i));
  const auto sb = measure_support(b, fine, 0.0);
  REQUIRE(sb.has_value());
  CHECK(sb->radius() <= 1.0 + fine.h() + 1e-12);
}

TEST_CASE("sampled gradients") {
  const Grid g = Grid::make(1.0, 10);
  std::vector<double> lin(11), flat(11, 0.4);
  for (int i = 0; i <= 10; ++i) lin[i] = 0.7 * g.x(i);
  for (double s : sample_gradient(lin, g)) CHECK(s == doctest::Approx(0.7).epsilon(1e-12));
  for (double s : sample_gradient(flat, g)) CHECK(s == 0.0);

  // barrier samples: slopes within O(h) of w' away from the free boundary
  const DerivedConstants c = derived_constants(3.0, 0.5);
  const Grid fine = Grid::make(1.0, 800);
  std::vector<double> w(801);
  for (int i = 0; i <= 800; ++i) w[i] = stationary_barrier(1.0, c, std::abs(fine.x(i)));
  const auto slopes = sample_gradient(w, fine);
  for (int i = 420; i < 700; ++i) {
    const double xm = fine.x(i) + 0.5 * fine.h();
    CHECK(std::abs(slopes[i] - stationary_barrier_slope(1.0, c, xm)) <= 4.0 * fine.h());
  }
}

TEST_CASE("barrier gradient ratio equals gamma sigma") {
  const DerivedConstants c = derived_constants(3.0, 0.5);
  const Grid g = Grid::make(1.0, 800);
  std::vector<double> w(801);
  for (int i = 0; i <= 800; ++i) w[i] = stationary_barrier(1.0, c, std::abs(g.x(i)));
  const double R = gradient_ratio(w, g, 1e-12, 1.0, c.gamma);
  CHECK(std::abs(R / (c.gamma * c.sigma) - 1.0) <= 0.02);
  CHECK(gradient_ratio(std::vector<double>(801, 0.0), g, 1e-6, 1.0, c.gamma) == 0.0);
}

TEST_CASE("trajectory runs") {
  Scheme scheme(canonical(), {0.0125, 1.25e-5, 1.0}, Grid::make(1.0, 100), {});
  const Trajectory empty = run(scheme, scheme.init_state(), {.t_end = 0.0});
  CHECK(empty.snapshots.size() == 1);
  CHECK(empty.initial().t == 0.0);

  const Trajectory t = run(scheme, scheme.init_state(), {.t_end = 1.0});
  REQUIRE(t.quench_time.has_value());
  CHECK(*t.quench_time <= 2.0 / 3.0 + scheme.dt());
  CHECK(t.worst_relative_identity <= 1e-8);
  CHECK(t.ledger_monotone);
  CHECK(t.final().t == doctest::Approx(*t.quench_time));
  const double floor_mass = scheme.boundary_value() * 2.0;
  CHECK(t.final().ledger.mass >= floor_mass - 1e-14);
  const auto mid = t.values_at(0.5 * *t.quench_time);
  CHECK(mid.size() == 101);
}

TEST_CASE("flat data quenches close to the ODE time at the center") {
  // wide plateau: the boundary layers never reach the center before it quenches
  ProblemSpec spec = canonical();
  spec.domain.half_length = 4.0;
  spec.initial = InitialData::table({-4.0, -3.5, 3.5, 4.0}, {0.0, 0.5, 0.5, 0.0});
  StepConfig cfg;
  cfg.dt_max = 2e-4;
  Scheme scheme(spec, {1e-3, 1e-7, 1.0}, Grid::make(4.0, 800), cfg);
  const Trajectory t = run(scheme, scheme.init_state(), {.t_end = 1.0});
  REQUIRE(t.quench_time.has_value());
  const double ode = quench_bound_sup(0.5, 0.5);
  CHECK(*t.quench_time <= ode + scheme.dt());
  CHECK(*t.quench_time >= 0.99 * ode);
}

TEST_CASE("linearized diffusion keeps the ledger") {
  StepConfig cfg;
  cfg.diffusion = DiffusionSolve::linearized;
  Scheme scheme(canonical(), {0.0125, 1.25e-5, 1.0}, Grid::make(1.0, 100), cfg);
  const Trajectory t = run(scheme, scheme.init_state(), {.t_end = 1.0});
  REQUIRE(t.quench_time.has_value());
  CHECK(t.worst_relative_identity <= 1e-8);
}

TEST_CASE("step configuration validation") {
  StepConfig cfg;
  cfg.dt_max = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.snapshot_stride = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

}

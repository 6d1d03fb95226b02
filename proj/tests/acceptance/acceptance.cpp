// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "analytic.hpp"
#include "experiments.hpp"
#include "verify.hpp"

using namespace pqlab;

namespace {

struct Outcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Timed {
  ExperimentOutput out;
  double seconds = 0.0;
};

Timed timed_run(const ScenarioConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Timed t{run_experiment(cfg), 0.0};
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const PropertyResult& need(const ExperimentOutput& o, const std::string& name) {
  const PropertyResult* r = o.summary.verification.find(name);
  if (!r) throw std::runtime_error("missing property " + name);
  return *r;
}

Outcome quench_bound(const ScenarioConfig& cfg, const ExperimentOutput& o) {
  const Trajectory& t = o.primary->trajectory;
  const double limit = quench_bound_sup(1.0, 0.5) + t.dt + 2.0 * t.eta + 1e-3;
  const bool ok = t.quench_time && *t.quench_time <= limit && cfg.n_cells == 800 &&
                  std::abs(t.epsilon - 0.0125) < 1e-15 && std::abs(t.eta - 0.0125e-3) < 1e-15;
  return {"quench_bound", ok,
          fmt("quench %.6g <= %.6g (eps %.4g)", t.quench_time.value_or(NAN), limit, t.epsilon)};
}

Outcome barrier_dominance(const ExperimentOutput& o) {
  const Trajectory& t = o.primary->trajectory;
  const PropertyResult dom = check_barrier_dominance(t, 1.0, 0.5, 1e-3);
  std::vector<double> grid;
  for (int i = 0; i <= 2000; ++i) grid.push_back(i * (2.0 / 3.0) / 2000.0);
  const GammaEpsProfile g = solve_gamma_eps(t.epsilon, 0.5, 1.0, grid);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double exact = extinction_profile(1.0, 0.5, grid[i]);
    if (exact >= 2.0 * t.epsilon) worst = std::max(worst, std::abs(g.values[i] - exact));
  }
  return {"barrier_dominance", dom.passed() && dom.worst_violation <= 1e-3 && worst <= 1e-6,
          fmt("max u - Gamma_eps %.3g <= 1e-3, |Gamma_eps - Gamma| %.3g <= 1e-6", dom.worst_violation,
              worst)};
}

Outcome finite_propagation(const ExperimentOutput& o) {
  const Trajectory& t = o.primary->trajectory;
  const DerivedConstants c = derived_constants(3.0, 0.5);
  const double m0 = support_bound(1.0, 1.0, c);
  const PropertyResult sup = check_support_containment(t, m0);
  const PropertyResult prof = check_barrier_profile(t, 1.0, 1.0, c, 1e-3);
  double radius = 0.0;
  for (const auto& s : t.snapshots)
    if (s.t > 0.0 && s.support) radius = std::max(radius, s.support->radius());
  const bool ok = sup.passed() && prof.passed() && std::abs(t.grid.half_length - 4.0) < 1e-15;
  return {"finite_propagation", ok,
          fmt("support %.4g <= m0 %.6g + 2h, barrier excess %.3g <= 1e-3", radius, m0,
              prof.worst_violation)};
}

Outcome maximal_monotonicity(const ExperimentOutput& o) {
  const PropertyResult& r = need(o, "maximal_monotonicity");
  const auto& levels = o.summary.details.at("ladder");
  bool ladder_ok = levels.size() == 4;
  const double expected[] = {0.1, 0.05, 0.025, 0.0125};
  for (std::size_t k = 0; ladder_ok && k < 4; ++k)
    ladder_ok = std::abs(levels[k].at("eps").get<double>() - expected[k]) < 1e-15;
  return {"maximal_monotonicity", r.passed() && r.tolerance <= 1e-6 && ladder_ok,
          fmt("finer minus coarser %.3g <= %.1g", r.worst_violation, r.tolerance)};
}

Outcome discrete_comparison(std::uint64_t seed) {
  const ProblemSpec spec{3.0, 0.5, {}, SourceTerm::zero(), InitialData::cosine(1.0, 1.0)};
  const Scheme proto(spec, {0.0125, 1.25e-5, 1.0}, Grid::make(1.0, 200), {});
  const PropertyResult r = check_discrete_comparison(proto, 100, 200, seed, 1e-10);
  return {"discrete_comparison", r.passed(),
          fmt("100 pairs x 200 steps, worst lower - upper %.3g <= 1e-10", r.worst_violation)};
}

Outcome mass_accounting(const std::map<std::string, Timed>& runs, const std::vector<SweepRow>& rows) {
  int checked = 0, failed = 0;
  std::string bad;
  for (const auto& [name, run] : runs) {
    bool any = false;
    for (const auto& p : run.out.summary.verification.properties)
      if (p.name.rfind("mass_accounting", 0) == 0 && p.tolerance == 0.0) {
        any = true;
        ++checked;
        if (!p.passed()) ++failed, bad += " " + name + ":" + p.name;
      }
    if (!any) ++failed, bad += " " + name + ":missing";
  }
  for (const auto& r : rows) {
    ++checked;
    if (!r.mass_accounting) ++failed, bad += " sweep#" + std::to_string(r.index);
  }
  return {"mass_accounting", failed == 0 && !rows.empty(),
          std::to_string(checked) + " ledgers checked, " + std::to_string(failed) + " failed" + bad};
}

Outcome gradient_barrier() {
  const DerivedConstants c = derived_constants(3.0, 0.5);
  const Grid g = Grid::make(1.0, 800);
  std::vector<double> w(static_cast<std::size_t>(g.n_nodes()));
  for (int i = 0; i < g.n_nodes(); ++i) w[i] = stationary_barrier(1.0, c, std::abs(g.x(i)));
  const double R = gradient_ratio(w, g, 1e-300, 1.0, c.gamma);
  const double rel = std::abs(R / (c.gamma * c.sigma) - 1.0);
  return {"gradient_barrier", rel <= 0.02,
          fmt("ratio %.6g vs gamma sigma %.6g, rel %.3g <= 0.02", R, c.gamma * c.sigma, rel)};
}

Outcome gradient_refinement(const ExperimentOutput& o) {
  const PropertyResult& r = need(o, "gradient_ratio");
  std::vector<int> ns;
  for (const auto& l : o.summary.details.at("levels")) ns.push_back(l.at("n_cells").get<int>());
  const bool ladder_ok = ns == std::vector<int>{200, 400, 800};
  std::string trend;
  for (double v : r.trend) trend += fmt(" %.4g", v);
  return {"gradient_refinement", r.passed() && r.tolerance <= 0.10 && ladder_ok,
          "ratios" + trend + fmt(", spread %.3g <= 0.10", r.worst_violation)};
}

Outcome time_holder(const ScenarioConfig& cfg, const ExperimentOutput& o) {
  const PropertyResult r = check_time_holder(o.primary->trajectory, cfg.run.tau, 0.45, 0.75);
  const double slope = r.trend.empty() ? NAN : r.trend.front();
  return {"time_holder_exponent", r.passed(), fmt("slope %.4g in [0.45, 0.75]", slope)};
}

Outcome smoothing(const ExperimentOutput& o) {
  const PropertyResult& ratio = need(o, "smoothing_rescaling");
  const PropertyResult& slope = need(o, "smoothing_small_t_slope");
  double worst_slope = 0.0;
  for (const auto& s : o.summary.details.at("family"))
    worst_slope = std::min(worst_slope, s.at("small_t_slope").get<double>());
  return {"smoothing_effect",
          ratio.passed() && ratio.tolerance <= 0.15 && slope.passed() && slope.tolerance <= 0.1,
          fmt("envelope ratio deviation %.3g <= 0.15, min slope %.4g >= %.4g", ratio.worst_violation,
              worst_slope, -0.25 - 0.1)};
}

Outcome iss(const ExperimentOutput& o) {
  const PropertyResult& r = need(o, "iss_support_stability");
  std::vector<double> radii, supports;
  for (const auto& l : o.summary.details.at("radii")) {
    radii.push_back(l.at("radius").get<double>());
    supports.push_back(l.at("support_radius").is_null() ? NAN : l.at("support_radius").get<double>());
  }
  const bool ok = r.status == PropertyStatus::pass && r.tolerance <= 0.05 &&
                  radii == std::vector<double>{8.0, 16.0, 32.0};
  return {"instantaneous_shrinking", ok,
          fmt("support at t=0.1: %.4g, %.4g, %.4g", supports.size() > 0 ? supports[0] : NAN,
              supports.size() > 1 ? supports[1] : NAN, supports.size() > 2 ? supports[2] : NAN) +
              fmt(", change %.3g <= 0.05", r.worst_violation)};
}

Outcome nonexistence(const ScenarioConfig& cfg, const ExperimentOutput& o) {
  const auto& d = o.summary.details.at("diagnostic");
  const bool negative = !d.at("steps_after_quench").is_null();
  const long steps = negative ? d.at("steps_after_quench").get<long>() : -1;
  bool clean = true;
  ProblemSpec spec = cfg.problem;
  for (const SourceTerm& f : {SourceTerm::zero(), SourceTerm::power(1.0, kH1 | kH2),
                              SourceTerm::power(0.5, kH2)}) {
    spec.source = f;
    const NonexistenceDiagnostic z = nonexistence_probe(
        spec, cfg.knobs, Grid::make(spec.domain.half_length, cfg.n_cells), cfg.stepping, cfg.run.t_end);
    clean = clean && z.quench_time && !z.first_negative_time;
  }
  const bool ok = cfg.problem.source.kind() == SourceTerm::Kind::constant &&
                  std::abs(cfg.problem.source.constant_value() - 0.1) < 1e-15 && negative &&
                  steps >= 0 && steps <= 10 && clean;
  return {"nonexistence_probe", ok,
          "negative value " + std::to_string(steps) + " steps after quench (<= 10); f(0)=0 sources " +
              (clean ? "never negative" : "went negative")};
}

Outcome analytic_exactness() {
  const DerivedConstants c = derived_constants(3.0, 0.5);
  const double s = c.sigma;
  double worst = 0.0;
  auto dev = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  dev(extinction_profile(1.0, 0.5, 0.0), 1.0);
  dev(extinction_profile(1.0, 0.5, 0.4), std::cbrt(0.4 * 0.4));
  dev(extinction_profile(1.0, 0.5, 2.0 / 3.0), 0.0);
  dev(stationary_barrier(1.0, c, 0.0), 1.0);
  dev(stationary_barrier(1.0, c, 1.0 / s), 0.0);
  dev(support_bound(1.0, 1.0, c), 1.0 + 1.0 / s);
  dev(support_bound(0.0, 1.0, c), 1.0 / s);
  dev(support_bound(1.0, 0.0, c), 1.0);
  dev(quench_bound_sup(1.0, 0.5), 2.0 / 3.0);
  dev(quench_bound_sup(0.0, 0.5), 0.0);
  dev(quench_bound_sup(2.0, 0.5), 2.0 * std::sqrt(2.0) / 1.5);
  const QuenchL1Bound b = quench_bound_l1(1.0, 3.0, 0.5, {});
  const double dh = std::abs(quench_l1_objective_derivative(b.tau_star, 1.0, 3.0, 0.5, {}));
  return {"analytic_exactness", worst <= 1e-12 && dh <= 1e-8,
          fmt("worst deviation %.3g <= 1e-12, |h'(tau*)| %.3g <= 1e-8", worst, dh)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pqlab acceptance suite"};
  std::string dir = "scenarios";
  std::vector<std::string> expect_fail;
  std::uint64_t seed = 20240601;
  app.add_option("--scenarios", dir, "Directory with the shipped scenario files");
  app.add_option("--expect-fail", expect_fail, "Criteria known to fail");
  app.add_option("--seed", seed, "Seed for the randomized comparison pairs");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::string> names{"quench", "propagation", "iss", "maximal",
                                       "gradient", "smoothing", "nonexistence"};
  std::map<std::string, ScenarioConfig> cfgs;
  for (const auto& n : names) cfgs.emplace(n, ScenarioConfig::from_file(dir + "/" + n + ".json"));
  const ScenarioConfig sweep_cfg = ScenarioConfig::from_file(dir + "/sweep.json");

  std::map<std::string, std::future<Timed>> pending;
  for (const auto& n : names)
    pending.emplace(n, std::async(std::launch::async, timed_run, std::cref(cfgs.at(n))));
  auto sweep_rows = std::async(std::launch::async, cmd_sweep, std::cref(sweep_cfg), 2);
  std::map<std::string, Timed> runs;
  for (auto& [n, f] : pending) runs.emplace(n, f.get());
  const std::vector<SweepRow> rows = sweep_rows.get();
  for (const auto& [n, r] : runs) std::printf("# %-12s %.2f s\n", n.c_str(), r.seconds);

  std::vector<std::function<Outcome()>> checks{
      [&] { return quench_bound(cfgs.at("quench"), runs.at("quench").out); },
      [&] { return barrier_dominance(runs.at("quench").out); },
      [&] { return finite_propagation(runs.at("propagation").out); },
      [&] { return maximal_monotonicity(runs.at("quench").out); },
      [&] { return discrete_comparison(seed); },
      [&] { return mass_accounting(runs, rows); },
      [&] { return gradient_barrier(); },
      [&] { return gradient_refinement(runs.at("gradient").out); },
      [&] { return time_holder(cfgs.at("quench"), runs.at("quench").out); },
      [&] { return smoothing(runs.at("smoothing").out); },
      [&] { return iss(runs.at("iss").out); },
      [&] { return nonexistence(cfgs.at("nonexistence"), runs.at("nonexistence").out); },
      [&] { return analytic_exactness(); },
  };

  const std::set<std::string> expected(expect_fail.begin(), expect_fail.end());
  int unexpected = 0, passed = 0;
  for (const auto& check : checks) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.detail = std::string("error: ") + e.what();
    }
    if (o.passed) ++passed;
    const bool known = expected.count(o.name) > 0;
    if (o.passed == known) ++unexpected;
    std::printf("%s  %-24s %s%s\n", o.passed ? "PASS" : "FAIL", o.name.c_str(), o.detail.c_str(),
                known ? (o.passed ? "  [listed as known failure but passed]" : "  [known failure]") : "");
  }
  std::printf("%d/%zu criteria pass\n", passed, checks.size());
  return unexpected == 0 ? 0 : 1;
}

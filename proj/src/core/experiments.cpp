#include "experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "error.hpp"
#include "io.hpp"

namespace pqlab {

using nlohmann::json;

namespace {

class PhaseClock {
 public:
  explicit PhaseClock(std::vector<PhaseTiming>& out) : out_(out) {}
  void mark(const std::string& phase) {
    const auto now = std::chrono::steady_clock::now();
    out_.push_back({phase, std::chrono::duration<double>(now - last_).count()});
    last_ = now;
  }

 private:
  std::vector<PhaseTiming>& out_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

PrimaryRun primary_of(Trajectory traj, const InitialData& data, double half_length) {
  PrimaryRun p{std::move(traj), data.sup_norm(), data.l1_norm(half_length), data.support_radius()};
  return p;
}

RunOptions run_options(const ScenarioConfig& cfg) {
  RunOptions o;
  o.t_end = cfg.run.t_end;
  o.stop_on_quench = cfg.run.stop_on_quench;
  return o;
}

Trajectory single_run(const ProblemSpec& spec, const RegularizationKnobs& knobs, int n_cells,
                      const StepConfig& step, const RunOptions& opts) {
  Scheme scheme(spec, knobs, Grid::make(spec.domain.half_length, n_cells), step);
  return run(scheme, scheme.init_state(), opts);
}

json ladder_levels_json(const MaximalResult& m) {
  json levels = json::array();
  for (const auto& l : m.levels) {
    json j{{"eps", l.eps},
           {"quench_time", optional_number(l.quench_time)},
           {"eta_converging", l.eta_converging}};
    if (l.versus_previous)
      j["versus_previous"] = {{"sup", l.versus_previous->sup},
                              {"l1", l.versus_previous->l1},
                              {"max_excess", l.versus_previous->max_excess}};
    levels.push_back(j);
  }
  return levels;
}

PropertyResult ladder_ordering(const MaximalResult& m, double tol) {
  PropertyResult r;
  r.name = "maximal_monotonicity";
  r.tolerance = tol;
  r.worst_violation = m.worst_violation;
  if (m.worst_violation > 0.0) {
    r.x = m.worst_x;
    r.t = m.worst_t;
  }
  for (const auto& l : m.levels)
    if (l.versus_previous) r.trend.push_back(l.versus_previous->max_excess);
  r.note = "u_{eps'} <= u_eps over consecutive eps levels";
  return r.decide();
}

PropertyResult informational(std::string name, std::string note, std::vector<double> trend = {}) {
  PropertyResult r;
  r.name = std::move(name);
  r.status = PropertyStatus::informational;
  r.note = std::move(note);
  r.trend = std::move(trend);
  return r;
}

void record_support(RunSummary& s, const Trajectory& traj) {
  for (const auto& snap : traj.snapshots) s.support_history.push_back({snap.t, snap.support});
}

double gradient_bracket(const ScenarioConfig& cfg, double sup_norm) {
  return bracket_sup(cfg.run.tau, sup_norm, cfg.problem.source, cfg.problem.p, cfg.problem.beta);
}

// ---------------------------------------------------------------------------

void experiment_quench(const ScenarioConfig& cfg, ExperimentOutput& out) {
  RunSummary& s = out.summary;
  PhaseClock clock(s.timing);
  const ProblemSpec& spec = cfg.problem;

  Trajectory traj = [&] {
    if (!cfg.ladder_enabled) return single_run(spec, cfg.knobs, cfg.n_cells, cfg.stepping, run_options(cfg));
    MaximalResult m = approximate_maximal(spec, cfg.ladder);
    s.details["ladder"] = ladder_levels_json(m);
    s.details["extrapolated_quench_time"] = optional_number(m.extrapolated_quench_time);
    s.verification.properties.push_back(ladder_ordering(m, cfg.run.tol.ordering));
    return std::move(m.trajectory);
  }();
  clock.mark("solve");

  const auto& tol = cfg.run.tol;
  auto& props = s.verification.properties;
  props.push_back(check_quench_bounds(traj, s.bounds, tol.quench_slack, true));
  props.push_back(check_barrier_dominance(traj, s.bounds.sup_norm, spec.beta, tol.barrier));
  props.push_back(check_mass_accounting(traj, s.bounds.l1_norm, tol.mass_identity));
  props.push_back(check_time_holder(traj, cfg.run.tau, tol.holder_lo, tol.holder_hi));
  const double R = gradient_ratio(traj, cfg.run.tau, gradient_bracket(cfg, s.bounds.sup_norm),
                                  s.bounds.constants.gamma);
  props.push_back(informational("gradient_ratio_value", "fitted gradient constant at this grid", {R}));
  clock.mark("verify");

  s.quench_time = traj.quench_time;
  record_support(s, traj);
  out.primary = primary_of(std::move(traj), spec.initial, spec.domain.half_length);
}

void experiment_propagation(const ScenarioConfig& cfg, ExperimentOutput& out) {
  RunSummary& s = out.summary;
  PhaseClock clock(s.timing);
  const ProblemSpec& spec = cfg.problem;
  Trajectory traj = single_run(spec, cfg.knobs, cfg.n_cells, cfg.stepping, run_options(cfg));
  clock.mark("solve");

  const auto& tol = cfg.run.tol;
  auto& props = s.verification.properties;
  if (s.bounds.support_radius_m0) {
    props.push_back(check_support_containment(traj, *s.bounds.support_radius_m0));
    props.push_back(check_barrier_profile(traj, *spec.initial.support_radius(), s.bounds.sup_norm,
                                          s.bounds.constants, tol.barrier));
  } else {
    PropertyResult r;
    r.name = "support_containment";
    r.note = "initial data without compact support";
    props.push_back(r);
  }
  props.push_back(check_barrier_dominance(traj, s.bounds.sup_norm, spec.beta, tol.barrier));
  props.push_back(check_mass_accounting(traj, s.bounds.l1_norm, tol.mass_identity));
  clock.mark("verify");

  s.quench_time = traj.quench_time;
  record_support(s, traj);
  out.primary = primary_of(std::move(traj), spec.initial, spec.domain.half_length);
}

void experiment_iss(const ScenarioConfig& cfg, ExperimentOutput& out) {
  RunSummary& s = out.summary;
  PhaseClock clock(s.timing);
  const ProblemSpec& spec = cfg.problem;

  LadderPlan plan = cfg.ladder;
  plan.run.t_end = cfg.run.t_probe;
  plan.run.stop_on_quench = false;
  // below 2 eps the regularized absorption switches off, so that level is the numerical zero
  const RegularizationKnobs finest{plan.eps_sequence.back(), plan.eta_sequence.back(),
                                   plan.alpha_for(spec.p)};
  plan.run.support_tol = default_quench_tol(finest);
  CauchyResult c = cauchy_solve(spec, plan, cfg.run.tol.barrier);
  clock.mark("solve");

  json levels = json::array();
  for (const auto& l : c.levels)
    levels.push_back({{"radius", l.radius},
                      {"n_cells", l.n_cells},
                      {"quench_time", optional_number(l.quench_time)},
                      {"support_radius", optional_number(l.support_radius)},
                      {"beyond_m0", l.beyond_m0}});
  s.details["radii"] = levels;
  s.details["t_probe"] = cfg.run.t_probe;

  PropertyResult iss = detect_iss(c, cfg.run.tol.iss_threshold);
  if (!spec.source.has(kH3)) {
    iss.status = PropertyStatus::informational;
    iss.note += "; exploratory: source not tagged H3";
  }
  auto& props = s.verification.properties;
  props.push_back(iss);
  const double l1 = spec.initial.l1_norm(c.trajectory.grid.half_length);
  props.push_back(check_mass_accounting(c.trajectory, l1, cfg.run.tol.mass_identity));
  clock.mark("verify");

  s.quench_time = c.trajectory.quench_time;
  record_support(s, c.trajectory);
  const double r = c.trajectory.grid.half_length;
  out.primary = primary_of(std::move(c.trajectory), spec.initial, r);
}

void experiment_maximal(const ScenarioConfig& cfg, ExperimentOutput& out) {
  RunSummary& s = out.summary;
  PhaseClock clock(s.timing);
  const ProblemSpec& spec = cfg.problem;
  MaximalResult m = approximate_maximal(spec, cfg.ladder);
  clock.mark("solve");

  s.details["ladder"] = ladder_levels_json(m);
  s.details["extrapolated_quench_time"] = optional_number(m.extrapolated_quench_time);
  auto& props = s.verification.properties;
  const auto& tol = cfg.run.tol;
  props.push_back(ladder_ordering(m, tol.ordering));
  std::vector<double> conv;
  bool all_conv = true;
  for (const auto& l : m.levels) {
    conv.push_back(l.eta_converging ? 1.0 : 0.0);
    all_conv = all_conv && l.eta_converging;
  }
  props.push_back(informational("eta_ladder_converging",
                                all_conv ? "successive eta differences decrease on every eps level"
                                         : "eta differences not monotone on some eps level",
                                conv));
  if (cfg.run.comparison_pairs > 0) {
    const RegularizationKnobs k{cfg.ladder.eps_sequence.back(), cfg.ladder.eta_sequence.back(),
                                cfg.ladder.alpha_for(spec.p)};
    const Scheme proto(spec, k, Grid::make(spec.domain.half_length, cfg.n_cells), cfg.stepping);
    props.push_back(check_discrete_comparison(proto, cfg.run.comparison_pairs,
                                              cfg.run.comparison_steps, cfg.seed, 1e-10));
  }
  props.push_back(check_barrier_dominance(m.trajectory, s.bounds.sup_norm, spec.beta, tol.barrier));
  props.push_back(check_mass_accounting(m.trajectory, s.bounds.l1_norm, tol.mass_identity));
  clock.mark("verify");

  s.quench_time = m.trajectory.quench_time;
  record_support(s, m.trajectory);
  out.primary = primary_of(std::move(m.trajectory), spec.initial, spec.domain.half_length);
}

void experiment_gradient(const ScenarioConfig& cfg, ExperimentOutput& out) {
  RunSummary& s = out.summary;
  PhaseClock clock(s.timing);
  const ProblemSpec& spec = cfg.problem;
  if (cfg.refinement.empty()) fail(ErrorKind::invalid_argument, "gradient experiment needs grid.refinement");

  // h ladder with the configured stepping, then a dt ladder (1, 1/2, 1/4) x dt_max on the finest grid
  const std::size_t nh = cfg.refinement.size();
  std::vector<Trajectory> trajs(nh + 3);
  std::vector<std::exception_ptr> errors(trajs.size());
  {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < trajs.size(); ++k)
      pool.emplace_back([&, k] {
        try {
          StepConfig step = cfg.stepping;
          int n = cfg.refinement.back();
          if (k < nh) n = cfg.refinement[k];
          else step.dt_max /= static_cast<double>(1 << (k - nh));
          trajs[k] = single_run(spec, cfg.knobs, n, step, run_options(cfg));
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  clock.mark("solve");

  const double bracket = gradient_bracket(cfg, s.bounds.sup_norm);
  std::vector<double> ratios;
  json levels = json::array();
  for (std::size_t k = 0; k < nh; ++k) {
    const double R = gradient_ratio(trajs[k], cfg.run.tau, bracket, s.bounds.constants.gamma);
    ratios.push_back(R);
    levels.push_back({{"n_cells", cfg.refinement[k]},
                      {"dt", trajs[k].dt},
                      {"ratio", R},
                      {"quench_time", optional_number(trajs[k].quench_time)}});
  }
  std::vector<double> holder;
  json dt_levels = json::array();
  for (std::size_t k = nh; k < trajs.size(); ++k) {
    const double T = trajs[k].final().t;
    const HolderFit fit = fit_time_holder(trajs[k], 10.0 * trajs[k].dt, 0.5 * (T - cfg.run.tau));
    holder.push_back(fit.constant);
    dt_levels.push_back({{"dt", trajs[k].dt},
                         {"holder_constant", fit.constant},
                         {"holder_slope", fit.slope},
                         {"samples", fit.samples}});
  }
  s.details["levels"] = levels;
  s.details["dt_levels"] = dt_levels;
  s.details["bracket"] = bracket;

  const auto& tol = cfg.run.tol;
  auto& props = s.verification.properties;
  props.push_back(gradient_ratio_statistic(ratios, tol.gradient_band));
  props.push_back(check_holder_constant_stability(holder, tol.holder_constant_band));
  props.push_back(check_mass_accounting(trajs[nh - 1], s.bounds.l1_norm, tol.mass_identity));
  clock.mark("verify");

  trajs.resize(nh);
  s.quench_time = trajs.back().quench_time;
  record_support(s, trajs.back());
  out.primary = primary_of(std::move(trajs.back()), spec.initial, spec.domain.half_length);
}

void experiment_smoothing(const ScenarioConfig& cfg, ExperimentOutput& out) {
  RunSummary& s = out.summary;
  PhaseClock clock(s.timing);
  const auto& masses = cfg.run.masses;
  if (masses.empty()) fail(ErrorKind::invalid_argument, "smoothing experiment needs run.masses");
  const double R0 = cfg.run.spike_radius;

  std::vector<ProblemSpec> specs;
  for (double m : masses) {
    ProblemSpec sp = cfg.problem;
    // bump mass is 16/15 M R0
    sp.initial = InitialData::bump(R0, m * 15.0 / (16.0 * R0));
    specs.push_back(sp);
  }
  std::vector<Trajectory> trajs(masses.size());
  std::vector<std::exception_ptr> errors(masses.size());
  {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < masses.size(); ++k)
      pool.emplace_back([&, k] {
        try {
          trajs[k] = single_run(specs[k], cfg.knobs, cfg.n_cells, cfg.stepping, run_options(cfg));
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  clock.mark("solve");

  std::vector<SmoothingSample> family;
  json levels = json::array();
  for (std::size_t k = 0; k < masses.size(); ++k) {
    const double t_min = 10.0 * trajs[k].dt;
    const double t_small = 0.1 * trajs[k].final().t;
    const SmoothingSample sample = measure_smoothing(trajs[k], masses[k], cfg.problem.p, t_min, t_small);
    family.push_back(sample);
    levels.push_back({{"mass", sample.mass},
                      {"peak", specs[k].initial.sup_norm()},
                      {"envelope", sample.envelope},
                      {"fitted_constant", sample.fitted_constant},
                      {"small_t_slope", sample.small_t_slope}});
  }
  s.details["family"] = levels;
  s.details["spike_radius"] = R0;
  s.details["fitted_c_smoothing"] = fit_smoothing_constant(family);

  const auto& tol = cfg.run.tol;
  auto& props = s.verification.properties;
  props.push_back(check_smoothing_effect(family, cfg.problem.p, tol.smoothing_ratio));
  props.push_back(check_smoothing_slope(family, cfg.problem.p, tol.smoothing_slope_slack));
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    PropertyResult m = check_mass_accounting(trajs[k], masses[k], tol.mass_identity);
    m.name += "_m" + std::to_string(k);
    props.push_back(m);
  }
  clock.mark("verify");

  s.quench_time = trajs.back().quench_time;
  record_support(s, trajs.back());
  out.primary = primary_of(std::move(trajs.back()), specs.back().initial,
                           specs.back().domain.half_length);
}

void experiment_nonexistence(const ScenarioConfig& cfg, ExperimentOutput& out) {
  RunSummary& s = out.summary;
  PhaseClock clock(s.timing);
  const ProblemSpec& spec = cfg.problem;
  const NonexistenceDiagnostic d =
      nonexistence_probe(spec, cfg.knobs, Grid::make(spec.domain.half_length, cfg.n_cells),
                         cfg.stepping, cfg.run.t_end);
  clock.mark("solve");

  s.details["diagnostic"] = {
      {"quench_time", optional_number(d.quench_time)},
      {"first_negative_time", optional_number(d.first_negative_time)},
      {"steps_after_quench", d.steps_after_quench ? json(*d.steps_after_quench) : json(nullptr)},
      {"min_value", d.min_value},
      {"min_x", d.min_x},
      {"source_violates_origin", spec.source.violates_origin()}};
  std::string note;
  if (d.first_negative_time)
    note = "state driven negative " + std::to_string(*d.steps_after_quench) +
           " steps after quench, min " + format_double(d.min_value) + " at x = " + format_double(d.min_x);
  else
    note = d.quench_time ? "no negative value after quench" : "no quench before t_end";
  s.verification.properties.push_back(informational("nonexistence_probe", note, {d.min_value}));

  // floored scheme alone, for the ledger
  Trajectory traj = single_run(spec, cfg.knobs, cfg.n_cells, cfg.stepping, run_options(cfg));
  s.verification.properties.push_back(check_mass_accounting(
      traj, spec.initial.l1_norm(spec.domain.half_length), cfg.run.tol.mass_identity));
  s.quench_time = d.quench_time;
  record_support(s, traj);
  out.primary = primary_of(std::move(traj), spec.initial, spec.domain.half_length);
  clock.mark("verify");
}

}  // namespace


InitialData rescale_peak(const InitialData& data, double M) {
  switch (data.kind()) {
    case InitialData::Kind::bump: return InitialData::bump(data.width(), M);
    case InitialData::Kind::cosine: return InitialData::cosine(M, data.width());
    case InitialData::Kind::decaying_tail: return InitialData::decaying_tail(M, data.width());
    case InitialData::Kind::table: {
      const double k = data.sup_norm() > 0.0 ? M / data.sup_norm() : 0.0;
      std::vector<double> v = data.table_values();
      for (double& x : v) x *= k;
      return InitialData::table(data.table_nodes(), v);
    }
  }
  return data;
}

BoundsReport cmd_bounds(const ScenarioConfig& cfg) {
  const double tau = cfg.run.tau > 0.0 ? cfg.run.tau : 0.25 * cfg.run.t_end;
  return make_bounds_report(cfg.problem, cfg.calibration, tau, tau);
}

json bounds_json(const ScenarioConfig& cfg, const BoundsReport& report) {
  return {{"config", cfg.resolved}, {"bounds", to_json(report)}};
}

ExperimentOutput run_experiment(const ScenarioConfig& cfg) {
  ExperimentOutput out;
  out.summary.experiment = cfg.experiment;
  out.summary.bounds = cmd_bounds(cfg);
  switch (cfg.experiment) {
    case Experiment::quench: experiment_quench(cfg, out); break;
    case Experiment::propagation: experiment_propagation(cfg, out); break;
    case Experiment::iss: experiment_iss(cfg, out); break;
    case Experiment::maximal: experiment_maximal(cfg, out); break;
    case Experiment::gradient: experiment_gradient(cfg, out); break;
    case Experiment::smoothing: experiment_smoothing(cfg, out); break;
    case Experiment::nonexistence: experiment_nonexistence(cfg, out); break;
    case Experiment::sweep:
      fail(ErrorKind::invalid_argument, "experiment 'sweep' runs through the sweep command");
  }
  return out;
}

json summary_json(const ScenarioConfig& cfg, const RunSummary& s,
                  const std::optional<PrimaryRun>& primary) {
  json support = json::array();
  for (const auto& h : s.support_history) {
    if (h.support)
      support.push_back({{"t", h.t}, {"left", h.support->left}, {"right", h.support->right}});
    else
      support.push_back({{"t", h.t}, {"left", nullptr}, {"right", nullptr}});
  }
  json j{{"experiment", to_string(s.experiment)},
         {"config", cfg.resolved},
         {"quench_time", optional_number(s.quench_time)},
         {"support_history", support},
         {"bounds", to_json(s.bounds)},
         {"verification", to_json(s.verification)},
         {"details", s.details},
         {"artifacts", s.artifacts}};
  if (primary) {
    json meta = trajectory_meta(primary->trajectory);
    meta["sup_norm"] = primary->sup_norm;
    meta["l1_norm"] = primary->l1_norm;
    meta["support_radius"] = optional_number(primary->support_radius);
    meta["final_ledger"] = to_json(primary->trajectory.final().ledger);
    j["trajectory"] = meta;
  }
  return j;
}

json timing_json(const RunSummary& s) {
  json phases = json::array();
  double total = 0.0;
  for (const auto& p : s.timing) {
    phases.push_back({{"phase", p.phase}, {"seconds", p.seconds}});
    total += p.seconds;
  }
  return {{"phases", phases}, {"total_seconds", total}};
}

RunSummary cmd_run(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  ExperimentOutput out = run_experiment(cfg);
  RunSummary& s = out.summary;
  PhaseClock clock(s.timing);

  const auto& formats = cfg.outputs.formats;
  const bool csv = std::find(formats.begin(), formats.end(), "csv") != formats.end();
  if (out.primary && csv) {
    write_snapshots_csv(out_dir / "snapshots.csv", out.primary->trajectory);
    write_ledger_csv(out_dir / "ledger.csv", out.primary->trajectory);
    s.artifacts = {"snapshots.csv", "ledger.csv"};
  }
  s.artifacts.insert(s.artifacts.end(), {"summary.json", "verify.json", "timing.json"});
  write_json(out_dir / "verify.json", to_json(s.verification));
  write_json(out_dir / "summary.json", summary_json(cfg, s, out.primary));
  clock.mark("write");
  write_json(out_dir / "timing.json", timing_json(s));
  return s;
}

VerificationReport cmd_verify(const std::filesystem::path& out_dir) {
  const json summary = read_json_file(out_dir / "summary.json");
  if (!summary.contains("trajectory"))
    fail(ErrorKind::invalid_argument, "summary has no stored trajectory to verify");
  const ScenarioConfig cfg = ScenarioConfig::from_json(summary.at("config"));
  const json& meta = summary.at("trajectory");
  const Trajectory traj = load_trajectory(out_dir / "snapshots.csv", out_dir / "ledger.csv", meta);

  const double M = meta.at("sup_norm").get<double>();
  const double l1 = meta.at("l1_norm").get<double>();
  const auto& tol = cfg.run.tol;
  VerificationReport report;
  auto& props = report.properties;

  BoundsReport b = cmd_bounds(cfg);
  b.sup_norm = M;
  b.l1_norm = l1;
  b.quench_bound_sup = quench_bound_sup(M, cfg.problem.beta);
  props.push_back(check_quench_bounds(traj, b, tol.quench_slack, false));
  props.push_back(check_barrier_dominance(traj, M, cfg.problem.beta, tol.barrier));
  props.push_back(check_mass_accounting(traj, l1, tol.mass_identity));
  if (!meta.at("support_radius").is_null()) {
    const double R0 = meta.at("support_radius").get<double>();
    const DerivedConstants c = derived_constants(cfg.problem.p, cfg.problem.beta);
    props.push_back(check_support_containment(traj, support_bound(R0, M, c)));
    props.push_back(check_barrier_profile(traj, R0, M, c, tol.barrier));
  }
  if (cfg.experiment == Experiment::quench)
    props.push_back(check_time_holder(traj, cfg.run.tau, tol.holder_lo, tol.holder_hi));
  return report;
}

namespace {

SweepRow sweep_one(const ScenarioConfig& cfg, SweepRow row) {
  ProblemSpec spec = cfg.problem;
  spec.p = row.p;
  spec.beta = row.beta;
  const double M0 = spec.initial.sup_norm();
  spec.initial = rescale_peak(spec.initial, row.M);
  row.quench_bound = quench_bound_sup(row.M, row.beta);
  const DerivedConstants c = derived_constants(row.p, row.beta);
  if (auto R0 = spec.initial.support_radius()) row.m0 = support_bound(*R0, row.M, c);

  const double scale = M0 > 0.0 ? row.M / M0 : 1.0;
  RegularizationKnobs k{cfg.knobs.epsilon * scale, cfg.knobs.eta * scale, cfg.knobs.alpha};
  if (!(k.alpha > RegularizationKnobs::alpha_lower_bound(row.p, row.beta)))
    k.alpha = RegularizationKnobs::default_alpha(row.p);

  Trajectory traj = single_run(spec, k, cfg.n_cells, cfg.stepping, run_options(cfg));
  row.quench_time = traj.quench_time;
  double radius = 0.0;
  bool any = false;
  for (const auto& snap : traj.snapshots)
    if (snap.t > 0.0 && snap.support) {
      radius = std::max(radius, snap.support->radius());
      any = true;
    }
  if (any) row.support_radius = radius;
  row.mass_accounting = check_mass_accounting(traj, spec.initial.l1_norm(spec.domain.half_length),
                                              cfg.run.tol.mass_identity)
                            .passed();
  const double tau = 0.25 * row.quench_bound;
  row.gradient_constant =
      gradient_ratio(traj, tau, bracket_sup(tau, row.M, spec.source, row.p, row.beta), c.gamma);
  return row;
}

}  // namespace

std::vector<SweepRow> cmd_sweep(const ScenarioConfig& cfg, int workers) {
  std::vector<double> ps{cfg.problem.p}, betas{cfg.problem.beta}, Ms{cfg.problem.initial.sup_norm()};
  for (const auto& axis : cfg.sweep) {
    if (axis.key == "p") ps = axis.values;
    else if (axis.key == "beta") betas = axis.values;
    else if (axis.key == "M") Ms = axis.values;
  }
  std::vector<SweepRow> rows;
  if (cfg.sweep.empty()) return rows;
  for (double p : ps)
    for (double beta : betas)
      for (double M : Ms) {
        SweepRow r;
        r.index = rows.size();
        r.p = p;
        r.beta = beta;
        r.M = M;
        rows.push_back(r);
      }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        rows[i] = sweep_one(cfg, rows[i]);
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int w = 0; w < n; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "index,p,beta,M,quench_time,quench_bound,support_radius,m0,gradient_constant,mass_accounting,error\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    os << r.index << ',' << format_double(r.p) << ',' << format_double(r.beta) << ','
       << format_double(r.M) << ',' << opt(r.quench_time) << ',' << format_double(r.quench_bound)
       << ',' << opt(r.support_radius) << ',' << opt(r.m0) << ',' << opt(r.gradient_constant) << ','
       << (r.error.empty() ? (r.mass_accounting ? "pass" : "fail") : "") << ',' << err << '\n';
  }
  return os.str();
}

}  // namespace pqlab

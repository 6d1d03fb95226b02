#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"

namespace pqlab {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(ErrorKind::invalid_argument, "config: " + path + ": " + what);
}

template <class T>
T convert(const json& v, const std::string& path);

template <>
double convert<double>(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  return v.get<double>();
}

template <>
int convert<int>(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path, "expected an integer");
  return v.get<int>();
}

template <>
std::uint64_t convert<std::uint64_t>(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    bad(path, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

template <>
bool convert<bool>(const json& v, const std::string& path) {
  if (!v.is_boolean()) bad(path, "expected true or false");
  return v.get<bool>();
}

template <>
std::string convert<std::string>(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "expected a string");
  return v.get<std::string>();
}

template <>
std::vector<double> convert<std::vector<double>>(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(convert<double>(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <>
std::vector<int> convert<std::vector<int>>(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(convert<int>(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <>
std::vector<std::string> convert<std::vector<std::string>>(const json& v, const std::string& path) {
  if (!v.is_array()) bad(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(convert<std::string>(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// One JSON object being read: records which keys were consumed and mirrors
// every value (given or defaulted) into the resolved output.
class Section {
 public:
  Section(const json* in, json& out, std::string path)
      : in_(in), out_(out), path_(std::move(path)) {
    if (in_ && !in_->is_object()) bad(path_, "expected an object");
    out_ = json::object();
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return in_ && in_->contains(key); }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) bad(at(key), "missing required key");
    return take<T>(key);
  }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    if (has(key)) return take<T>(key);
    used_.insert(key);
    out_[key] = fallback;
    return fallback;
  }

  template <class T>
  std::optional<T> optional(const std::string& key) {
    used_.insert(key);
    if (!has(key) || (*in_)[key].is_null()) return std::nullopt;
    return take<T>(key);
  }

  Section child(const std::string& key, bool required) {
    if (required && !has(key)) bad(at(key), "missing required key");
    used_.insert(key);
    return Section(has(key) ? &(*in_)[key] : nullptr, out_[key], at(key));
  }

  void mark(const std::string& key) { used_.insert(key); }

  /// Rejects keys that were never read.
  void finish() const {
    if (!in_) return;
    for (const auto& [k, v] : in_->items())
      if (!used_.count(k)) bad(at(k), "unknown key");
  }

 private:
  template <class T>
  T take(const std::string& key) {
    used_.insert(key);
    T v = convert<T>((*in_)[key], at(key));
    out_[key] = v;
    return v;
  }

  const json* in_;
  json& out_;
  std::string path_;
  std::set<std::string> used_;
};

unsigned parse_hypotheses(const std::vector<std::string>& tags, const std::string& path) {
  unsigned mask = 0;
  for (const auto& t : tags) {
    if (t == "H1") mask |= kH1;
    else if (t == "H2") mask |= kH2;
    else if (t == "H3") mask |= kH3;
    else if (t == "GL") mask |= kGlobalLipschitz;
    else bad(path, "unknown hypothesis tag '" + t + "'");
  }
  return mask;
}

SourceTerm parse_source(Section s) {
  const std::string kind = s.get<std::string>("kind", "zero");
  SourceTerm src = SourceTerm::zero();
  if (kind == "zero") {
  } else if (kind == "power") {
    const double q = s.require<double>("q");
    if (!(q > 0.0)) bad(s.at("q"), "power exponent must be positive");
    const std::vector<std::string> def =
        q >= 1.0 ? std::vector<std::string>{"H1", "H2"} : std::vector<std::string>{"H2"};
    const unsigned tags = parse_hypotheses(s.get("hypotheses", def), s.at("hypotheses"));
    src = SourceTerm::power(q, tags, s.optional<double>("q0"));
  } else if (kind == "exp_minus_one") {
    const unsigned tags =
        parse_hypotheses(s.get("hypotheses", std::vector<std::string>{"H1", "H2", "H3"}),
                         s.at("hypotheses"));
    src = SourceTerm::exp_minus_one(tags);
  } else if (kind == "constant") {
    src = SourceTerm::constant(s.require<double>("c"));
  } else {
    bad(s.at("kind"), "unknown source kind '" + kind + "'");
  }
  if (auto lip = s.optional<double>("lipschitz")) src = src.with_lipschitz(*lip);
  const double scale = s.get("scale", 1.0);
  if (scale != 1.0) src = src.scaled(scale);
  s.finish();
  return src;
}

InitialData parse_initial(Section s, double half_length) {
  const std::string kind = s.require<std::string>("kind");
  InitialData data = InitialData::cosine(1.0, half_length);
  if (kind == "bump") {
    const double R0 = s.require<double>("R0");
    const double M = s.require<double>("M");
    data = InitialData::bump(R0, M);
  } else if (kind == "cosine") {
    data = InitialData::cosine(s.require<double>("M"), half_length);
  } else if (kind == "table") {
    data = InitialData::table(s.require<std::vector<double>>("nodes"),
                              s.require<std::vector<double>>("values"));
  } else if (kind == "decaying_tail") {
    const double M = s.get("M", 1.0);
    data = InitialData::decaying_tail(M, s.get("k", 1.0));
  } else {
    bad(s.at("kind"), "unknown initial data kind '" + kind + "'");
  }
  s.finish();
  return data;
}

std::vector<std::string> names(std::initializer_list<const char*> l) {
  return std::vector<std::string>(l.begin(), l.end());
}

}  // namespace

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::quench: return "quench";
    case Experiment::propagation: return "propagation";
    case Experiment::iss: return "iss";
    case Experiment::maximal: return "maximal";
    case Experiment::gradient: return "gradient";
    case Experiment::smoothing: return "smoothing";
    case Experiment::nonexistence: return "nonexistence";
    case Experiment::sweep: return "sweep";
  }
  return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) {
  for (Experiment e : {Experiment::quench, Experiment::propagation, Experiment::iss,
                       Experiment::maximal, Experiment::gradient, Experiment::smoothing,
                       Experiment::nonexistence, Experiment::sweep})
    if (name == to_string(e)) return e;
  return std::nullopt;
}

ProblemSpec parse_problem(const json& problem, json* resolved) {
  json scratch;
  Section s(&problem, resolved ? *resolved : scratch, "problem");
  const double p = s.require<double>("p");
  const double beta = s.require<double>("beta");

  Section d = s.child("domain", true);
  Domain domain;
  const std::string dk = d.require<std::string>("kind");
  if (dk == "dirichlet") domain.kind = Domain::Kind::dirichlet;
  else if (dk == "cauchy") domain.kind = Domain::Kind::cauchy_truncated;
  else bad(d.at("kind"), "expected 'dirichlet' or 'cauchy'");
  domain.half_length = d.require<double>("half_length");
  d.finish();

  SourceTerm source = parse_source(s.child("source", false));
  InitialData initial = parse_initial(s.child("initial", true), domain.half_length);
  s.finish();

  ProblemSpec spec{p, beta, domain, source, initial};
  try {
    spec.validate();
    if (!source.violates_origin()) source.validate(2.0 * std::max(initial.sup_norm(), 1.0));
  } catch (const Error& e) {
    bad("problem", e.what());
  }
  return spec;
}

ScenarioConfig ScenarioConfig::from_json(const json& doc) {
  ScenarioConfig cfg;
  Section root(&doc, cfg.resolved, "");

  if (!root.has("problem")) bad("problem", "missing required key");
  root.mark("problem");
  cfg.problem = parse_problem(doc["problem"], &cfg.resolved["problem"]);
  const ProblemSpec& spec = cfg.problem;
  const double M = std::max(spec.initial.sup_norm(), 1e-12);

  const std::string exp_name = root.require<std::string>("experiment");
  const auto exp = parse_experiment(exp_name);
  if (!exp) bad("experiment", "unknown experiment '" + exp_name + "'");
  cfg.experiment = *exp;

  // grid
  {
    Section g = root.child("grid", false);
    cfg.n_cells = g.get("n_cells", 400);
    if (cfg.n_cells < 8) bad(g.at("n_cells"), "needs at least 8 cells");
    const std::vector<int> def_ref =
        cfg.experiment == Experiment::gradient
            ? std::vector<int>{cfg.n_cells / 4, cfg.n_cells / 2, cfg.n_cells}
            : std::vector<int>{};
    cfg.refinement = g.get("refinement", def_ref);
    for (int n : cfg.refinement)
      if (n < 8) bad(g.at("refinement"), "every level needs at least 8 cells");
    g.finish();
  }

  // regularization
  {
    Section r = root.child("regularization", false);
    const double eps = r.get("epsilon", 0.0125 * M);
    const double eta = r.get("eta", 1e-3 * eps);
    const double alpha = r.get("alpha", RegularizationKnobs::default_alpha(spec.p));
    cfg.knobs = {eps, eta, alpha};
    try {
      cfg.knobs.validate(spec.p, spec.beta);
    } catch (const Error& e) {
      bad("regularization", e.what());
    }

    LadderPlan plan = LadderPlan::defaults(spec, cfg.n_cells);
    plan.alpha = alpha;
    const bool wants_ladder = cfg.experiment == Experiment::maximal ||
                              cfg.experiment == Experiment::iss || r.has("ladder");
    cfg.ladder_enabled = wants_ladder;
    if (wants_ladder) {
      Section l = r.child("ladder", false);
      plan.eps_sequence = l.get("eps", plan.eps_sequence);
      plan.eta_sequence = l.get("eta", plan.eta_sequence);
      plan.radius_sequence = l.get("radii", plan.radius_sequence);
      plan.h = l.get("h", 0.0);
      l.finish();
    }
    cfg.ladder = plan;
    r.finish();
  }

  // stepping
  {
    Section s = root.child("stepping", false);
    StepConfig sc;
    sc.dt_max = s.get("dt_max", sc.dt_max);
    sc.dt_courant_factor = s.get("dt_courant_factor", sc.dt_courant_factor);
    sc.reaction_tol = s.get("reaction_tol", sc.reaction_tol);
    sc.diffusion_tol = s.get("diffusion_tol", sc.diffusion_tol);
    sc.snapshot_stride = s.get("snapshot_stride", sc.snapshot_stride);
    const std::string mode = s.get<std::string>("diffusion", "implicit");
    if (mode == "implicit") sc.diffusion = DiffusionSolve::implicit;
    else if (mode == "linearized") sc.diffusion = DiffusionSolve::linearized;
    else bad(s.at("diffusion"), "expected 'implicit' or 'linearized'");
    s.finish();
    try {
      sc.validate();
    } catch (const Error& e) {
      bad("stepping", e.what());
    }
    cfg.stepping = sc;
  }

  // run
  {
    Section r = root.child("run", false);
    RunParameters& rp = cfg.run;
    rp.t_end = r.get("t_end", 1.0);
    if (!(rp.t_end > 0.0)) bad(r.at("t_end"), "must be positive");
    rp.tau = r.get("tau", 0.25 * quench_bound_sup(spec.initial.sup_norm(), spec.beta));
    rp.t_probe = r.get("t_probe", 0.1);
    const double m = spec.initial.l1_norm(spec.domain.half_length);
    rp.masses = r.get("masses", std::vector<double>{m, 2.0 * m, 4.0 * m});
    rp.spike_radius = r.get("spike_radius", 0.05);
    rp.stop_on_quench = r.get("stop_on_quench", true);
    rp.comparison_pairs = r.get("comparison_pairs", cfg.experiment == Experiment::maximal ? 20 : 0);
    rp.comparison_steps = r.get("comparison_steps", 200);
    Section t = r.child("tolerances", false);
    Tolerances& tol = rp.tol;
    tol.quench_slack = t.get("quench_slack", tol.quench_slack);
    tol.barrier = t.get("barrier", tol.barrier);
    tol.mass_identity = t.get("mass_identity", tol.mass_identity);
    tol.ordering = t.get("ordering", tol.ordering);
    tol.gradient_band = t.get("gradient_band", tol.gradient_band);
    tol.holder_lo = t.get("holder_lo", tol.holder_lo);
    tol.holder_hi = t.get("holder_hi", tol.holder_hi);
    tol.holder_constant_band = t.get("holder_constant_band", tol.holder_constant_band);
    tol.smoothing_ratio = t.get("smoothing_ratio", tol.smoothing_ratio);
    tol.smoothing_slope_slack = t.get("smoothing_slope_slack", tol.smoothing_slope_slack);
    tol.iss_threshold = t.get("iss_threshold", tol.iss_threshold);
    t.finish();
    r.finish();
  }

  // calibration
  {
    Section c = root.child("calibration", false);
    cfg.calibration.c_smoothing = c.get("c_smoothing", 1.0);
    cfg.calibration.c2_mf = c.get("c2_mf", 1.0);
    c.finish();
    try {
      cfg.calibration.validate();
    } catch (const Error& e) {
      bad("calibration", e.what());
    }
  }

  // outputs
  {
    Section o = root.child("outputs", false);
    cfg.outputs.directory = o.get("directory", cfg.outputs.directory);
    cfg.outputs.formats = o.get("formats", cfg.outputs.formats);
    for (const auto& f : cfg.outputs.formats)
      if (f != "csv" && f != "json") bad(o.at("formats"), "unknown format '" + f + "'");
    if (o.has("snapshot_stride")) {
      cfg.stepping.snapshot_stride = o.require<int>("snapshot_stride");
      cfg.resolved["stepping"]["snapshot_stride"] = cfg.stepping.snapshot_stride;
    } else {
      o.get("snapshot_stride", cfg.stepping.snapshot_stride);
    }
    o.finish();
  }

  cfg.seed = root.get<std::uint64_t>("seed", 0);

  // sweep
  {
    Section s = root.child("sweep", cfg.experiment == Experiment::sweep);
    for (const auto& key : names({"p", "beta", "M"})) {
      if (!s.has(key)) continue;
      cfg.sweep.push_back({key, s.require<std::vector<double>>(key)});
    }
    s.finish();
  }

  root.finish();
  cfg.ladder.n_cells = cfg.n_cells;
  cfg.ladder.step = cfg.stepping;
  cfg.ladder.run.t_end = cfg.run.t_end;
  cfg.ladder.run.stop_on_quench = cfg.run.stop_on_quench;
  return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::invalid_argument, "config: " + path.string() + ": " + e.what());
  }
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    fail(ErrorKind::invalid_argument, "override must look like key=value: " + std::string(assignment));
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));

  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }

  json* node = &doc;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) fail(ErrorKind::invalid_argument, "override key has an empty segment: " + key);
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object())
      fail(ErrorKind::invalid_argument, "override path crosses a non-object at " + parts[i]);
    node = &next;
  }
  (*node)[parts.back()] = value;
}

}  // namespace pqlab

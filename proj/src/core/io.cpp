#include "io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "error.hpp"

namespace pqlab {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

void write_snapshots_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "t,x,u\n";
  for (const auto& s : traj.snapshots) {
    const std::string t = format_double(s.t);
    for (std::size_t i = 0; i < s.values.size(); ++i)
      out << t << ',' << format_double(traj.grid.x(static_cast<int>(i))) << ','
          << format_double(s.values[i]) << '\n';
  }
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

void write_ledger_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "t,mass,absorbed_singular,absorbed_source,boundary_outflux\n";
  for (const auto& s : traj.snapshots)
    out << format_double(s.t) << ',' << format_double(s.ledger.mass) << ','
        << format_double(s.ledger.absorbed_singular) << ','
        << format_double(s.ledger.absorbed_source) << ','
        << format_double(s.ledger.boundary_outflux) << '\n';
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::io, path.string() + ": missing header");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        fail(ErrorKind::io, path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != table.header.size())
      fail(ErrorKind::io, path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    table.rows.push_back(std::move(row));
  }
  return table;
}

json trajectory_meta(const Trajectory& traj) {
  return {{"half_length", traj.grid.half_length},
          {"n_cells", traj.grid.n_cells},
          {"eta", traj.eta},
          {"epsilon", traj.epsilon},
          {"boundary_value", traj.boundary_value},
          {"dt", traj.dt},
          {"quench_tol", traj.quench_tol},
          {"support_tol", traj.support_tol},
          {"quench_time", optional_number(traj.quench_time)},
          {"initial_mass", traj.snapshots.empty() ? 0.0 : traj.initial().ledger.initial_mass}};
}

Trajectory load_trajectory(const std::filesystem::path& snapshots, const std::filesystem::path& ledger,
                           const json& meta) {
  const std::vector<std::string> snap_header{"t", "x", "u"};
  const std::vector<std::string> ledger_header{"t", "mass", "absorbed_singular", "absorbed_source",
                                               "boundary_outflux"};
  const CsvTable snap = read_csv(snapshots);
  const CsvTable led = read_csv(ledger);
  if (snap.header != snap_header) fail(ErrorKind::io, snapshots.string() + ": unexpected header");
  if (led.header != ledger_header) fail(ErrorKind::io, ledger.string() + ": unexpected header");

  Trajectory tr{Grid::make(meta.at("half_length").get<double>(), meta.at("n_cells").get<int>()),
                meta.at("eta").get<double>(),
                meta.at("epsilon").get<double>(),
                meta.at("boundary_value").get<double>(),
                meta.at("dt").get<double>(),
                meta.at("quench_tol").get<double>(),
                meta.at("support_tol").get<double>(),
                {},
                std::nullopt};
  if (!meta.at("quench_time").is_null()) tr.quench_time = meta.at("quench_time").get<double>();
  const double initial_mass = meta.at("initial_mass").get<double>();

  const std::size_t n = static_cast<std::size_t>(tr.grid.n_nodes());
  if (snap.rows.size() % n != 0) fail(ErrorKind::io, snapshots.string() + ": row count is not a multiple of the grid size");
  const std::size_t count = snap.rows.size() / n;
  if (count != led.rows.size()) fail(ErrorKind::io, "snapshot and ledger row counts disagree");

  for (std::size_t k = 0; k < count; ++k) {
    Snapshot s;
    s.t = snap.rows[k * n][0];
    s.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = snap.rows[k * n + i];
      if (row[0] != s.t) fail(ErrorKind::io, snapshots.string() + ": snapshot block with mixed times");
      s.values[i] = row[2];
    }
    const auto& l = led.rows[k];
    if (l[0] != s.t) fail(ErrorKind::io, "ledger time does not match snapshot time");
    s.ledger.initial_mass = initial_mass;
    s.ledger.mass = l[1];
    s.ledger.absorbed_singular = l[2];
    s.ledger.absorbed_source = l[3];
    s.ledger.boundary_outflux = l[4];
    s.support = measure_support(s.values, tr.grid, tr.support_tol);
    const double scale = std::max(initial_mass, 1e-300);
    tr.worst_relative_identity =
        std::max(tr.worst_relative_identity, std::abs(s.ledger.identity_residual()) / scale);
    if (!tr.snapshots.empty() &&
        s.ledger.mass > tr.snapshots.back().ledger.mass + 1e-12 * std::max(1.0, initial_mass))
      tr.ledger_monotone = false;
    tr.snapshots.push_back(std::move(s));
  }
  if (tr.snapshots.empty()) fail(ErrorKind::io, snapshots.string() + ": no snapshots");
  return tr;
}

json to_json(const DerivedConstants& c) {
  return {{"gamma", c.gamma}, {"lambda", c.lambda}, {"sigma", c.sigma}};
}

json to_json(const BoundsReport& r) {
  json j{{"constants", to_json(r.constants)},
         {"sup_norm", r.sup_norm},
         {"l1_norm", r.l1_norm},
         {"quench_bound_sup", r.quench_bound_sup},
         {"quench_bound_l1", {{"bound", r.quench_bound_l1.bound}, {"tau_star", r.quench_bound_l1.tau_star}}},
         {"support_radius_m0", optional_number(r.support_radius_m0)},
         {"bracket_sup", {{"t", r.bracket_sup_t}, {"value", r.bracket_sup}}},
         {"bracket_l1", {{"tau", r.bracket_l1_tau}, {"value", r.bracket_l1}}},
         {"calibration", {{"c_smoothing", r.calibration.c_smoothing}, {"c2_mf", r.calibration.c2_mf}}}};
  return j;
}

json to_json(const PropertyResult& r) {
  json j{{"name", r.name},
         {"status", to_string(r.status)},
         {"passed", r.passed()},
         {"worst_violation", std::isfinite(r.worst_violation) ? json(r.worst_violation) : json("inf")},
         {"tolerance", r.tolerance},
         {"x", optional_number(r.x)},
         {"t", optional_number(r.t)},
         {"trend", r.trend},
         {"note", r.note}};
  return j;
}

json to_json(const VerificationReport& r) {
  json props = json::array();
  for (const auto& p : r.properties) props.push_back(to_json(p));
  return {{"properties", props}, {"all_passed", r.all_passed()}};
}

json to_json(const MassLedger& l) {
  return {{"initial_mass", l.initial_mass},
          {"mass", l.mass},
          {"absorbed_singular", l.absorbed_singular},
          {"absorbed_source", l.absorbed_source},
          {"boundary_outflux", l.boundary_outflux},
          {"identity_residual", l.identity_residual()}};
}

PropertyResult property_from_json(const json& j) {
  PropertyResult r;
  r.name = j.at("name").get<std::string>();
  const std::string st = j.at("status").get<std::string>();
  for (PropertyStatus s : {PropertyStatus::pass, PropertyStatus::fail, PropertyStatus::inconclusive,
                           PropertyStatus::informational})
    if (st == to_string(s)) r.status = s;
  const json& w = j.at("worst_violation");
  r.worst_violation = w.is_string() ? HUGE_VAL : w.get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  if (!j.at("x").is_null()) r.x = j.at("x").get<double>();
  if (!j.at("t").is_null()) r.t = j.at("t").get<double>();
  r.trend = j.at("trend").get<std::vector<double>>();
  r.note = j.at("note").get<std::string>();
  return r;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) fail(ErrorKind::io, "write failed: " + path.string());
}

}  // namespace pqlab

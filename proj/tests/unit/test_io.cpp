#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "error.hpp"
#include "io.hpp"

using namespace pqlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pqlab_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Trajectory sample_run() {
  ProblemSpec spec{3.0, 0.5, {}, SourceTerm::zero(), InitialData::cosine(1.0, 1.0)};
  Scheme scheme(spec, {0.0125, 1.25e-5, 1.0}, Grid::make(1.0, 40), {});
  return run(scheme, scheme.init_state(), {.t_end = 1.0});
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("doubles survive text") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.30000000000000004})
    CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("trajectory round trip through CSV") {
  const Trajectory t = sample_run();
  const fs::path dir = scratch("roundtrip");
  write_snapshots_csv(dir / "snapshots.csv", t);
  write_ledger_csv(dir / "ledger.csv", t);
  const CsvTable snaps = read_csv(dir / "snapshots.csv");
  CHECK(snaps.header == std::vector<std::string>{"t", "x", "u"});
  CHECK(snaps.rows.size() == t.snapshots.size() * 41);

  const Trajectory back = load_trajectory(dir / "snapshots.csv", dir / "ledger.csv", trajectory_meta(t));
  REQUIRE(back.snapshots.size() == t.snapshots.size());
  for (std::size_t k = 0; k < t.snapshots.size(); ++k) {
    CHECK(back.snapshots[k].t == t.snapshots[k].t);
    CHECK(back.snapshots[k].values == t.snapshots[k].values);
    CHECK(back.snapshots[k].ledger.absorbed_singular == t.snapshots[k].ledger.absorbed_singular);
  }
  CHECK(back.quench_time == t.quench_time);
  CHECK(back.dt == t.dt);
  CHECK(back.ledger_monotone);
}

TEST_CASE("malformed CSV is rejected") {
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "a.csv") << "t,x,u\n0,1\n";
  CHECK_THROWS_AS(read_csv(dir / "a.csv"), Error);
  std::ofstream(dir / "b.csv") << "t,x,u\n0,1,abc\n";
  CHECK_THROWS_AS(read_csv(dir / "b.csv"), Error);
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), Error);

  const Trajectory t = sample_run();
  write_snapshots_csv(dir / "snapshots.csv", t);
  std::ofstream(dir / "ledger.csv") << "t,mass\n0,1\n";
  CHECK_THROWS_AS(load_trajectory(dir / "snapshots.csv", dir / "ledger.csv", trajectory_meta(t)), Error);
}

TEST_CASE("property JSON") {
  PropertyResult r;
  r.name = "x";
  r.status = PropertyStatus::fail;
  r.worst_violation = HUGE_VAL;
  r.tolerance = 0.1;
  r.t = 0.5;
  r.trend = {1.0, 2.0};
  const nlohmann::json j = to_json(r);
  CHECK(j["worst_violation"] == "inf");
  CHECK(j["passed"] == false);
  CHECK(j["x"].is_null());
  const PropertyResult back = property_from_json(j);
  CHECK(back.name == "x");
  CHECK(back.status == PropertyStatus::fail);
  CHECK(std::isinf(back.worst_violation));
  CHECK(*back.t == 0.5);
  CHECK(back.trend == r.trend);

  VerificationReport rep;
  rep.properties.push_back(r);
  CHECK(to_json(rep)["all_passed"] == false);
  CHECK(to_json(derived_constants(3.0, 0.5))["lambda"] == 4.0);
}

}

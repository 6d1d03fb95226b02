#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "experiments.hpp"
#include "io.hpp"

using namespace pqlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ScenarioConfig config(const std::string& text) {
  return ScenarioConfig::from_json(json::parse(text));
}

const char* kSweep = R"({
  "problem": {"p": 3.0, "beta": 0.5, "domain": {"kind": "dirichlet", "half_length": 1.0}, "initial": {"kind": "cosine", "M": 1.0}},
  "grid": {"n_cells": 60},
  "experiment": "sweep",
  "sweep": {"p": [2.5, 3.0], "M": [0.5, 1.0]}
})";

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("sweep over a 2x2 grid") {
  const ScenarioConfig c = config(kSweep);
  const auto rows = cmd_sweep(c, 3);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].p == 2.5);
  CHECK(rows[0].M == 0.5);
  CHECK(rows[1].M == 1.0);
  CHECK(rows[3].p == 3.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CAPTURE(i);
    CHECK(rows[i].index == i);
    CHECK(rows[i].error.empty());
    CHECK(rows[i].mass_accounting);
    REQUIRE(rows[i].quench_time.has_value());
    CHECK(*rows[i].quench_time <= rows[i].quench_bound + 0.01);
  }
  CHECK(*rows[0].quench_time < *rows[1].quench_time);
  const std::string csv = sweep_csv(rows);
  CHECK(lines(csv) == 5);
  CHECK(sweep_csv(cmd_sweep(c, 1)) == csv);
}

TEST_CASE("sweep without axes writes only the header") {
  ScenarioConfig c = config(kSweep);
  c.sweep.clear();
  const auto rows = cmd_sweep(c, 2);
  CHECK(rows.empty());
  const std::string csv = sweep_csv(rows);
  CHECK(lines(csv) == 1);
  CHECK(csv.rfind("index,p,beta,M,quench_time", 0) == 0);
}

TEST_CASE("sweep rows record failures") {
  ScenarioConfig c = config(kSweep);
  c.sweep = {{"beta", {0.5, 1.5}}};
  const auto rows = cmd_sweep(c, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].error.empty());
  CHECK_FALSE(rows[1].error.empty());
}

TEST_CASE("run writes deterministic artifacts") {
  const ScenarioConfig c = config(R"({
    "problem": {"p": 3.0, "beta": 0.5, "domain": {"kind": "dirichlet", "half_length": 1.0}, "initial": {"kind": "cosine", "M": 1.0}},
    "grid": {"n_cells": 80},
    "experiment": "quench"
  })");
  const fs::path a = fs::temp_directory_path() / "pqlab_exp_a";
  const fs::path b = fs::temp_directory_path() / "pqlab_exp_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const RunSummary s = cmd_run(c, a);
  cmd_run(c, b);
  for (const char* f : {"snapshots.csv", "ledger.csv", "summary.json", "verify.json", "timing.json"})
    CHECK(fs::exists(a / f));
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "snapshots.csv") == slurp(b / "snapshots.csv"));
  REQUIRE(s.quench_time.has_value());

  const json summary = json::parse(slurp(a / "summary.json"));
  CHECK(summary["config"]["grid"]["n_cells"] == 80);
  CHECK(summary["trajectory"].contains("final_ledger"));

  const VerificationReport again = cmd_verify(a);
  CHECK(again.find("quench_bound")->passed());
  CHECK(again.find("mass_accounting")->passed());
}

TEST_CASE("bounds command") {
  const ScenarioConfig c = ScenarioConfig::from_file(std::string(PQLAB_SCENARIOS) + "/propagation.json");
  const BoundsReport r = cmd_bounds(c);
  REQUIRE(r.support_radius_m0.has_value());
  CHECK(*r.support_radius_m0 == doctest::Approx(1.8320335292207617).epsilon(1e-12));
  const json j = bounds_json(c, r);
  CHECK(j["bounds"].contains("quench_bound_sup"));
}

TEST_CASE("peak rescaling") {
  const InitialData b = rescale_peak(InitialData::bump(2.0, 1.0), 3.0);
  CHECK(b.sup_norm() == 3.0);
  CHECK(*b.support_radius() == 2.0);
  const InitialData t = rescale_peak(InitialData::table({-1, 0, 1}, {0, 2, 0}), 1.0);
  CHECK(t(0.0) == 1.0);
}

TEST_CASE("nonexistence scenario runs both schemes") {
  ScenarioConfig c = ScenarioConfig::from_file(std::string(PQLAB_SCENARIOS) + "/nonexistence.json");
  c.n_cells = 100;
  const ExperimentOutput out = run_experiment(c);
  CHECK(out.summary.verification.find("mass_accounting")->passed());
  CHECK(out.summary.verification.find("nonexistence_probe")->status == PropertyStatus::informational);
  CHECK(out.primary.has_value());
}

}

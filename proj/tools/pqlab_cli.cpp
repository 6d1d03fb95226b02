// Command-line front end over the pqlab C API.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pqlab/pqlab.h"

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::vector<std::string> overrides;
  long long seed = -1;
};

// Owns a malloc'd string returned by the library.
struct LibString {
  char* p = nullptr;
  ~LibString() { pqlab_string_free(p); }
};

struct ConfigHandle {
  pqlab_config* p = nullptr;
  ~ConfigHandle() { pqlab_config_free(p); }
};

int report(pqlab_status st) {
  if (st != PQLAB_OK && *pqlab_last_error()) std::cerr << "pqlab: " << pqlab_last_error() << '\n';
  return static_cast<int>(st);
}

pqlab_status load(const Common& c, ConfigHandle& h) {
  if (c.config.empty()) {
    std::cerr << "pqlab: --config is required\n";
    return PQLAB_USAGE_ERROR;
  }
  if (auto st = pqlab_config_from_file(c.config.c_str(), &h.p); st != PQLAB_OK) return st;
  for (const auto& o : c.overrides)
    if (auto st = pqlab_config_override(h.p, o.c_str()); st != PQLAB_OK) return st;
  if (c.seed >= 0)
    if (auto st = pqlab_config_set_seed(h.p, static_cast<unsigned long long>(c.seed)); st != PQLAB_OK)
      return st;
  return pqlab_config_finalize(h.p);
}

void add_common(CLI::App* cmd, Common& c, bool with_out) {
  cmd->add_option("--config", c.config, "Scenario configuration (JSON)");
  if (with_out) cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--override", c.overrides, "Set a dotted config key, e.g. run.t_end=0.5");
  cmd->add_option("--seed", c.seed, "Seed for randomized checks");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-difference laboratory for singular absorption p-Laplacian problems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pqlab_version());

  Common common;
  int workers = 1;

  auto* bounds = app.add_subcommand("bounds", "Print derived constants and a priori bounds");
  add_common(bounds, common, false);
  auto* run = app.add_subcommand("run", "Run the configured experiment and write artifacts");
  add_common(run, common, true);
  auto* verify = app.add_subcommand("verify", "Re-check the trajectory stored in an output directory");
  verify->add_option("--out", common.out, "Output directory of a previous run");
  auto* sweep = app.add_subcommand("sweep", "Run the configured parameter grid");
  add_common(sweep, common, true);
  sweep->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : PQLAB_USAGE_ERROR;
  }

  ConfigHandle cfg;
  LibString text;
  if (*bounds) {
    if (auto st = load(common, cfg); st != PQLAB_OK) return report(st);
    const auto st = pqlab_bounds(cfg.p, &text.p);
    if (st == PQLAB_OK) std::cout << text.p << '\n';
    return report(st);
  }
  if (*run) {
    if (auto st = load(common, cfg); st != PQLAB_OK) return report(st);
    const auto st = pqlab_run(cfg.p, common.out.c_str(), nullptr);
    if (st == PQLAB_OK || st == PQLAB_PROPERTY_FAILURE)
      std::cout << "wrote " << common.out << "/summary.json\n";
    return report(st);
  }
  if (*verify) {
    const auto st = pqlab_verify(common.out.c_str(), &text.p);
    if (text.p) std::cout << text.p << '\n';
    return report(st);
  }
  if (*sweep) {
    if (auto st = load(common, cfg); st != PQLAB_OK) return report(st);
    const auto st = pqlab_sweep(cfg.p, common.out.c_str(), workers, &text.p);
    if (st == PQLAB_OK) std::cout << text.p;
    return report(st);
  }
  return PQLAB_USAGE_ERROR;
}

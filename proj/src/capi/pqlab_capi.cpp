#include "pqlab/pqlab.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "config.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "io.hpp"

struct pqlab_config {
  nlohmann::json doc;
  std::optional<pqlab::ScenarioConfig> parsed;
};

struct pqlab_solver {
  std::unique_ptr<pqlab::Scheme> scheme;
  pqlab::GridState state;
};

namespace {

thread_local std::string last_error;

pqlab_status set_error(pqlab_status code, const std::string& msg) {
  last_error = msg;
  return code;
}

pqlab_status status_of(const pqlab::Error& e) {
  switch (e.kind()) {
    case pqlab::ErrorKind::invalid_argument: return PQLAB_USAGE_ERROR;
    default: return PQLAB_SOLVER_ERROR;
  }
}

template <class F>
pqlab_status guarded(F&& f) {
  last_error.clear();
  try {
    return f();
  } catch (const pqlab::Error& e) {
    return set_error(status_of(e), e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(PQLAB_USAGE_ERROR, e.what());
  } catch (const std::exception& e) {
    return set_error(PQLAB_SOLVER_ERROR, e.what());
  } catch (...) {
    return set_error(PQLAB_SOLVER_ERROR, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const pqlab::ScenarioConfig& finalized(pqlab_config* cfg) {
  if (!cfg->parsed) cfg->parsed = pqlab::ScenarioConfig::from_json(cfg->doc);
  return *cfg->parsed;
}

#define PQLAB_REQUIRE(cond, msg) \
  if (!(cond)) return set_error(PQLAB_USAGE_ERROR, msg)

}  // namespace

extern "C" {

const char* pqlab_version(void) { return "0.1.0"; }

const char* pqlab_last_error(void) { return last_error.c_str(); }

void pqlab_string_free(char* s) { std::free(s); }

pqlab_status pqlab_config_from_file(const char* path, pqlab_config** out) {
  PQLAB_REQUIRE(path && out, "null argument");
  return guarded([&] {
    auto cfg = std::make_unique<pqlab_config>();
    cfg->doc = pqlab::read_json_file(path);
    *out = cfg.release();
    return PQLAB_OK;
  });
}

pqlab_status pqlab_config_from_string(const char* json, pqlab_config** out) {
  PQLAB_REQUIRE(json && out, "null argument");
  return guarded([&] {
    auto cfg = std::make_unique<pqlab_config>();
    cfg->doc = nlohmann::json::parse(json);
    *out = cfg.release();
    return PQLAB_OK;
  });
}

pqlab_status pqlab_config_override(pqlab_config* cfg, const char* assignment) {
  PQLAB_REQUIRE(cfg && assignment, "null argument");
  return guarded([&] {
    pqlab::apply_override(cfg->doc, assignment);
    cfg->parsed.reset();
    return PQLAB_OK;
  });
}

pqlab_status pqlab_config_set_seed(pqlab_config* cfg, unsigned long long seed) {
  PQLAB_REQUIRE(cfg, "null argument");
  return guarded([&] {
    cfg->doc["seed"] = seed;
    cfg->parsed.reset();
    return PQLAB_OK;
  });
}

pqlab_status pqlab_config_finalize(pqlab_config* cfg) {
  PQLAB_REQUIRE(cfg, "null argument");
  return guarded([&] {
    finalized(cfg);
    return PQLAB_OK;
  });
}

pqlab_status pqlab_config_resolved(pqlab_config* cfg, char** json_out) {
  PQLAB_REQUIRE(cfg && json_out, "null argument");
  return guarded([&] {
    *json_out = dup_string(finalized(cfg).resolved.dump(2));
    return PQLAB_OK;
  });
}

void pqlab_config_free(pqlab_config* cfg) { delete cfg; }

pqlab_status pqlab_bounds(pqlab_config* cfg, char** json_out) {
  PQLAB_REQUIRE(cfg && json_out, "null argument");
  return guarded([&] {
    const auto& c = finalized(cfg);
    *json_out = dup_string(pqlab::bounds_json(c, pqlab::cmd_bounds(c)).dump(2));
    return PQLAB_OK;
  });
}

pqlab_status pqlab_run(pqlab_config* cfg, const char* out_dir, char** summary_out) {
  PQLAB_REQUIRE(cfg && out_dir, "null argument");
  return guarded([&] {
    const auto& c = finalized(cfg);
    const pqlab::RunSummary s = pqlab::cmd_run(c, out_dir);
    if (summary_out) {
      std::ifstream in(std::filesystem::path(out_dir) / "summary.json");
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      *summary_out = dup_string(text);
    }
    if (s.verification.any_failed())
      return set_error(PQLAB_PROPERTY_FAILURE, "one or more verification properties failed");
    return PQLAB_OK;
  });
}

pqlab_status pqlab_verify(const char* out_dir, char** report_out) {
  PQLAB_REQUIRE(out_dir, "null argument");
  return guarded([&] {
    const pqlab::VerificationReport r = pqlab::cmd_verify(out_dir);
    if (report_out) *report_out = dup_string(pqlab::to_json(r).dump(2));
    if (r.any_failed())
      return set_error(PQLAB_PROPERTY_FAILURE, "one or more verification properties failed");
    return PQLAB_OK;
  });
}

pqlab_status pqlab_sweep(pqlab_config* cfg, const char* out_dir, int workers, char** csv_out) {
  PQLAB_REQUIRE(cfg, "null argument");
  PQLAB_REQUIRE(workers >= 1, "workers must be at least 1");
  return guarded([&] {
    const auto rows = pqlab::cmd_sweep(finalized(cfg), workers);
    const std::string csv = pqlab::sweep_csv(rows);
    if (out_dir) pqlab::write_text(std::filesystem::path(out_dir) / "sweep.csv", csv);
    if (csv_out) *csv_out = dup_string(csv);
    return PQLAB_OK;
  });
}

pqlab_status pqlab_solver_create(pqlab_config* cfg, pqlab_solver** out) {
  PQLAB_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    const auto& c = finalized(cfg);
    auto s = std::make_unique<pqlab_solver>();
    s->scheme = std::make_unique<pqlab::Scheme>(
        c.problem, c.knobs, pqlab::Grid::make(c.problem.domain.half_length, c.n_cells), c.stepping);
    s->state = s->scheme->init_state();
    *out = s.release();
    return PQLAB_OK;
  });
}

pqlab_status pqlab_solver_step(pqlab_solver* s, size_t steps) {
  PQLAB_REQUIRE(s, "null argument");
  return guarded([&] {
    for (size_t i = 0; i < steps; ++i) s->scheme->advance(s->state);
    return PQLAB_OK;
  });
}

pqlab_status pqlab_solver_advance_to(pqlab_solver* s, double t) {
  PQLAB_REQUIRE(s, "null argument");
  PQLAB_REQUIRE(t >= s->state.time, "target time lies in the past");
  return guarded([&] {
    const double stop = t - 1e-12 * s->scheme->dt();
    while (s->state.time < stop) s->scheme->advance(s->state, t - s->state.time);
    return PQLAB_OK;
  });
}

double pqlab_solver_time(const pqlab_solver* s) { return s ? s->state.time : 0.0; }

double pqlab_solver_dt(const pqlab_solver* s) { return s ? s->scheme->dt() : 0.0; }

size_t pqlab_solver_size(const pqlab_solver* s) { return s ? s->state.values.size() : 0; }

pqlab_status pqlab_solver_values(const pqlab_solver* s, double* x, double* u, size_t n) {
  PQLAB_REQUIRE(s && u, "null argument");
  const size_t m = std::min(n, s->state.values.size());
  for (size_t i = 0; i < m; ++i) {
    u[i] = s->state.values[i];
    if (x) x[i] = s->scheme->grid().x(static_cast<int>(i));
  }
  return PQLAB_OK;
}

pqlab_status pqlab_solver_ledger(const pqlab_solver* s, double* mass, double* absorbed_singular,
                                 double* absorbed_source, double* boundary_outflux) {
  PQLAB_REQUIRE(s, "null argument");
  const auto& l = s->state.ledger;
  if (mass) *mass = l.mass;
  if (absorbed_singular) *absorbed_singular = l.absorbed_singular;
  if (absorbed_source) *absorbed_source = l.absorbed_source;
  if (boundary_outflux) *boundary_outflux = l.boundary_outflux;
  return PQLAB_OK;
}

void pqlab_solver_free(pqlab_solver* s) { delete s; }

}  // extern "C"

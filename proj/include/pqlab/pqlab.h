#ifndef PQLAB_PQLAB_H
#define PQLAB_PQLAB_H

/* C interface to the pqlab solver library.
 *
 * Every function returns a pqlab_status. On failure a message describing the
 * error is available from pqlab_last_error() on the calling thread until the
 * next call into the library. Strings returned through `char**` out
 * parameters are owned by the caller and released with pqlab_string_free().
 */

#include <stddef.h>

#if defined(_WIN32)
#if defined(PQLAB_BUILDING_LIBRARY)
#define PQLAB_API __declspec(dllexport)
#else
#define PQLAB_API __declspec(dllimport)
#endif
#else
#define PQLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pqlab_status {
  PQLAB_OK = 0,
  PQLAB_PROPERTY_FAILURE = 1, /* a pass/fail verification property failed */
  PQLAB_USAGE_ERROR = 2,      /* bad arguments or configuration */
  PQLAB_SOLVER_ERROR = 3      /* numerical or I/O failure during a run */
} pqlab_status;

typedef struct pqlab_config pqlab_config;
typedef struct pqlab_solver pqlab_solver;

PQLAB_API const char* pqlab_version(void);

/* Message for the last failed call on this thread, "" when none. */
PQLAB_API const char* pqlab_last_error(void);

PQLAB_API void pqlab_string_free(char* s);

/* Configuration. Overrides are applied in order and validated by
 * pqlab_config_finalize (called implicitly by every consumer). */
PQLAB_API pqlab_status pqlab_config_from_file(const char* path, pqlab_config** out);
PQLAB_API pqlab_status pqlab_config_from_string(const char* json, pqlab_config** out);
PQLAB_API pqlab_status pqlab_config_override(pqlab_config* cfg, const char* assignment);
PQLAB_API pqlab_status pqlab_config_set_seed(pqlab_config* cfg, unsigned long long seed);
PQLAB_API pqlab_status pqlab_config_finalize(pqlab_config* cfg);
/* Resolved configuration with defaults filled in. */
PQLAB_API pqlab_status pqlab_config_resolved(pqlab_config* cfg, char** json_out);
PQLAB_API void pqlab_config_free(pqlab_config* cfg);

/* Commands. */
PQLAB_API pqlab_status pqlab_bounds(pqlab_config* cfg, char** json_out);
/* Writes run artifacts under out_dir. summary_out may be NULL. Returns
 * PQLAB_PROPERTY_FAILURE when a pass/fail property failed. */
PQLAB_API pqlab_status pqlab_run(pqlab_config* cfg, const char* out_dir, char** summary_out);
PQLAB_API pqlab_status pqlab_verify(const char* out_dir, char** report_out);
/* Writes sweep.csv under out_dir (when non-NULL) and returns the same text. */
PQLAB_API pqlab_status pqlab_sweep(pqlab_config* cfg, const char* out_dir, int workers,
                                   char** csv_out);

/* Direct stepping of one regularized problem with the configured knobs. */
PQLAB_API pqlab_status pqlab_solver_create(pqlab_config* cfg, pqlab_solver** out);
PQLAB_API pqlab_status pqlab_solver_step(pqlab_solver* s, size_t steps);
PQLAB_API pqlab_status pqlab_solver_advance_to(pqlab_solver* s, double t);
PQLAB_API double pqlab_solver_time(const pqlab_solver* s);
PQLAB_API double pqlab_solver_dt(const pqlab_solver* s);
PQLAB_API size_t pqlab_solver_size(const pqlab_solver* s);
/* Copies min(n, size) nodal values; x may be NULL. */
PQLAB_API pqlab_status pqlab_solver_values(const pqlab_solver* s, double* x, double* u, size_t n);
PQLAB_API pqlab_status pqlab_solver_ledger(const pqlab_solver* s, double* mass,
                                           double* absorbed_singular, double* absorbed_source,
                                           double* boundary_outflux);
PQLAB_API void pqlab_solver_free(pqlab_solver* s);

#ifdef __cplusplus
}
#endif

#endif /* PQLAB_PQLAB_H */

/* C interface of the data-driven beam dynamics library.
 *
 * Every function returns a ddcd_status. On failure a description is
 * available from ddcd_last_error() on the calling thread until the next
 * library call on that thread. Strings returned through char** arguments
 * are owned by the caller and released with ddcd_string_free().
 */
#ifndef DDCD_H
#define DDCD_H

#include <stddef.h>

#if defined(DDCD_BUILDING_LIBRARY)
#define DDCD_API __attribute__((visibility("default")))
#else
#define DDCD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ddcd_status {
  DDCD_OK = 0,
  DDCD_ERROR = 1,            /* unexpected internal error */
  DDCD_VALIDATION_ERROR = 2, /* invalid config, arguments or input files */
  DDCD_SOLVER_ERROR = 3,     /* Newton or factorization failure */
  DDCD_SELF_CHECK_FAILED = 4,
  DDCD_IO_ERROR = 5
} ddcd_status;

typedef struct ddcd_scenario ddcd_scenario;
typedef struct ddcd_integrator ddcd_integrator;

DDCD_API const char* ddcd_version(void);
DDCD_API const char* ddcd_last_error(void);
DDCD_API void ddcd_string_free(char* s);

/* Scenarios. */
DDCD_API ddcd_status ddcd_scenario_load(const char* path, ddcd_scenario** out);
/* base_dir may be NULL; relative data paths are then kept as given. */
DDCD_API ddcd_status ddcd_scenario_parse(const char* json_text, const char* base_dir, ddcd_scenario** out);
DDCD_API ddcd_status ddcd_scenario_preset(const char* name, ddcd_scenario** out);
DDCD_API void ddcd_scenario_free(ddcd_scenario* scenario);
/* Non-positive values leave the current setting unchanged. */
DDCD_API ddcd_status ddcd_scenario_set_time(ddcd_scenario* scenario, double dt, double t_end);
DDCD_API ddcd_status ddcd_scenario_set_output_dir(ddcd_scenario* scenario, const char* directory);
DDCD_API ddcd_status ddcd_scenario_output_dir(const ddcd_scenario* scenario, char** out);
DDCD_API ddcd_status ddcd_scenario_to_json(const ddcd_scenario* scenario, char** out);
/* Writes a JSON array of problems (empty when valid); returns
 * DDCD_VALIDATION_ERROR if there is at least one. */
DDCD_API ddcd_status ddcd_scenario_validate(const ddcd_scenario* scenario, char** problems_json);

/* Full runs. out_dir may be NULL to use the scenario's output directory.
 * summary_json receives summary.json (or failure.json on a solver failure)
 * and may be NULL. */
DDCD_API ddcd_status ddcd_run(const ddcd_scenario* scenario, const char* out_dir, char** summary_json);
DDCD_API ddcd_status ddcd_dcnlp_study(const ddcd_scenario* scenario, char** report_json);
/* perturbation is the mutation hook added to B in the strain_jacobian
 * checks; pass 0 for a normal run. */
DDCD_API ddcd_status ddcd_self_check(double perturbation, char** report_json);

/* Step-by-step integration. */
DDCD_API ddcd_status ddcd_integrator_create(const ddcd_scenario* scenario, ddcd_integrator** out);
DDCD_API void ddcd_integrator_free(ddcd_integrator* integrator);
DDCD_API ddcd_status ddcd_integrator_step(ddcd_integrator* integrator);
DDCD_API int ddcd_integrator_finished(const ddcd_integrator* integrator);
DDCD_API int ddcd_integrator_step_index(const ddcd_integrator* integrator);
DDCD_API double ddcd_integrator_time(const ddcd_integrator* integrator);
DDCD_API size_t ddcd_integrator_dofs(const ddcd_integrator* integrator);
DDCD_API ddcd_status ddcd_integrator_configuration(const ddcd_integrator* integrator, double* q, size_t length);
/* Each output points to 3 doubles; any may be NULL. */
DDCD_API ddcd_status ddcd_integrator_momenta(const ddcd_integrator* integrator, double* linear,
                                             double* angular_minus, double* angular_plus);
DDCD_API ddcd_status ddcd_integrator_diagnostics(const ddcd_integrator* integrator, int* newton_iterations,
                                                 double* final_residual, double* constraint_norm);

#ifdef __cplusplus
}
#endif

#endif /* DDCD_H */

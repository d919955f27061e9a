/* C interface to the variable-viscosity Stokes solver library.
 *
 * All functions return a status code:
 *   VVS_OK          success (for `verify`: all spectral bounds hold)
 *   VVS_ERR_RUN     solver/assembly failure, or a verify bound violated
 *   VVS_ERR_CONFIG  config parse error, invalid argument, or size guard
 *
 * On any failure vvs_last_error() returns a message describing it. Handles
 * are opaque and must be released with vvs_run_destroy().
 */
#ifndef VVSTOKES_H
#define VVSTOKES_H

#ifdef __cplusplus
extern "C" {
#endif

#define VVS_OK 0
#define VVS_ERR_RUN 1
#define VVS_ERR_CONFIG 2

typedef struct vvs_run vvs_run;

const char* vvs_version(void);
const char* vvs_last_error(void);

/* Create an experiment from a config file or from config text. */
int vvs_run_create(vvs_run** out, const char* config_path);
int vvs_run_create_from_string(vvs_run** out, const char* config_text);

/* Override a single config option (same keys as the config file). */
int vvs_run_set_option(vvs_run* run, const char* key, const char* value);

/* Iteration-count sweep over (gamma, DR); prints an aligned table to stdout
 * and writes a CSV when the config names an output path. Convergence
 * failures are recorded as data, not errors. */
int vvs_run_table(vvs_run* run);

/* Spectral verification of the Schur approximation bounds. */
int vvs_run_verify(vvs_run* run);

/* Viscoplastic Newton experiment. */
int vvs_run_nonlinear(vvs_run* run);

void vvs_run_destroy(vvs_run* run);

#ifdef __cplusplus
}
#endif

#endif /* VVSTOKES_H */

/* C interface to the pinchfl simulation library.
 *
 * All entry points return a status code (pfl_status); 0 is success and the
 * nonzero codes mirror the CLI exit codes.  A context carries the loaded
 * configuration, runtime options, and the last error message.  Contexts are
 * not thread-safe; use one per thread.
 */
#ifndef PINCHFL_H
#define PINCHFL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pfl_ctx pfl_ctx;

typedef enum pfl_status {
    PFL_OK = 0,
    PFL_ERR_RUNTIME = 1,    /* unexpected failure */
    PFL_ERR_CONFIG = 2,     /* invalid configuration or arguments */
    PFL_ERR_DEPENDENCY = 3, /* missing upstream artifact */
    PFL_ERR_DIVERGENCE = 4  /* training diverged past the configured cap */
} pfl_status;

/* Library version string, static storage. */
const char* pfl_version(void);

/* Create a context holding the default configuration.  NULL on allocation
 * failure.  Free with pfl_ctx_free. */
pfl_ctx* pfl_ctx_new(void);
void pfl_ctx_free(pfl_ctx* ctx);

/* Last error message for this context; empty string when the previous call
 * succeeded.  Storage is owned by the context and valid until the next call
 * on it. */
const char* pfl_last_error(const pfl_ctx* ctx);

/* Replace the context configuration from a JSON file or an in-memory JSON
 * string.  Unknown keys are rejected with their dotted path. */
pfl_status pfl_load_config_file(pfl_ctx* ctx, const char* path);
pfl_status pfl_load_config_json(pfl_ctx* ctx, const char* json_text);

/* Canonical JSON of the current configuration.  Storage is owned by the
 * context and valid until the next call on it. */
const char* pfl_config_json(pfl_ctx* ctx);

/* Apply one dotted-path override, e.g. ("solver.total_steps", "5000"). */
pfl_status pfl_set_override(pfl_ctx* ctx, const char* dotted_key, const char* value);

/* Replace the master seed (seeds.master). */
pfl_status pfl_set_seed(pfl_ctx* ctx, uint64_t seed);

/* Worker threads for data-parallel stages; 1 (the default) keeps every
 * artifact byte-reproducible. */
pfl_status pfl_set_parallel(pfl_ctx* ctx, int threads);

/* Run one subcommand (classify, solve, train-ddpg, oracle, run-fl, compare),
 * writing artifacts into out_dir (created if missing). */
pfl_status pfl_run(pfl_ctx* ctx, const char* subcommand, const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PINCHFL_H */

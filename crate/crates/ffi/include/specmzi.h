/* C ABI for the specmzi toolkit.
 *
 * Kept in sync with src/lib.rs; regenerable with cbindgen using the
 * cbindgen.toml next to the crate manifest.
 *
 * Usage pattern:
 *
 *   SpecmziConfig *cfg = specmzi_config_new();
 *   specmzi_config_set(cfg, "delta_lambda", "4.9");
 *   if (specmzi_run_table(cfg, "out") != SPECMZI_OK) {
 *       char msg[256];
 *       specmzi_last_error(msg, sizeof msg);
 *       fprintf(stderr, "%s\n", msg);
 *   }
 *   specmzi_config_free(cfg);
 */

#ifndef SPECMZI_H
#define SPECMZI_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by every entry point. */
#define SPECMZI_OK 0
/* Physics or degeneracy failure (for example, no mode structure). */
#define SPECMZI_ERR_PHYSICS 1
/* Input, parse, or I/O failure. */
#define SPECMZI_ERR_INPUT 2
/* A required pointer was null or not valid UTF-8. */
#define SPECMZI_ERR_ARGUMENT 3
/* An internal panic was caught at the boundary. */
#define SPECMZI_ERR_INTERNAL 4

/* Opaque run-configuration handle. */
typedef struct SpecmziConfig SpecmziConfig;

/* Allocate a handle holding the default configuration. Never fails; free
 * with specmzi_config_free. */
SpecmziConfig *specmzi_config_new(void);

/* Load a key=value configuration file into a new handle. Returns NULL on
 * failure (see specmzi_last_error). */
SpecmziConfig *specmzi_config_load(const char *path);

/* Apply one key/value assignment, with the same keys as the configuration
 * file. */
int specmzi_config_set(SpecmziConfig *config, const char *key, const char *value);

/* Free a handle. NULL is ignored. */
void specmzi_config_free(SpecmziConfig *config);

/* Command entry points; each writes its CSV outputs into out_dir. */
int specmzi_run_scan(const SpecmziConfig *config, const char *out_dir);
int specmzi_run_table(const SpecmziConfig *config, const char *out_dir);
int specmzi_run_bins(const SpecmziConfig *config, const char *out_dir);
int specmzi_run_danan(const SpecmziConfig *config, const char *out_dir);
int specmzi_run_ingest(const SpecmziConfig *config,
                       const char *arm1_path,
                       const char *arm2_path,
                       const char *out_dir);

/* Fringe visibility (i_max - i_min) / (i_max + i_min); requires
 * i_max >= i_min >= 0 and positive total power. */
int specmzi_visibility(double i_max, double i_min, double *out);

/* Duality sum of squares v^2 + d^2; passes (when non-NULL) receives 1 if
 * the duality bound holds within tolerance. */
int specmzi_egy_check(double v, double d, double *out, int *passes);

/* Copy the last error message on this thread into buffer (always
 * NUL-terminated when len > 0). Returns the full message length. */
size_t specmzi_last_error(char *buffer, size_t len);

#ifdef __cplusplus
}
#endif

#endif /* SPECMZI_H */

/* C interface to the risim channel simulator. */

#ifndef RISIM_H
#define RISIM_H

/* Generated by cbindgen from the risim-capi crate; edit the Rust source, not this file. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum risim_status {
  // The call succeeded.
  RISIM_STATUS_OK = 0,
  // A required pointer argument was null.
  RISIM_STATUS_NULL_POINTER = 1,
  // The scenario could not be read, parsed, or validated.
  RISIM_STATUS_CONFIG_ERROR = 2,
  // The computation or an output write failed, or an argument was out
  // of its domain.
  RISIM_STATUS_RUNTIME_ERROR = 3,
  // A string argument was not valid UTF-8.
  RISIM_STATUS_INVALID_UTF8 = 4,
} risim_status;

// Cluster birth–death interpretation, for `risim_run_options`.
typedef enum risim_evolution_mode {
  // Keep whatever the scenario configures.
  RISIM_EVOLUTION_MODE_SCENARIO_DEFAULT = 0,
  // Survival-probability reading (the default interpretation).
  RISIM_EVOLUTION_MODE_CORRECTED = 1,
  // Verbatim death-probability reading, kept for auditability.
  RISIM_EVOLUTION_MODE_PAPER_LITERAL = 2,
} risim_evolution_mode;

// Which statistic a `risim_run` call produces.
typedef enum risim_experiment {
  // Time autocorrelation, estimator and closed form.
  RISIM_EXPERIMENT_ACF = 0,
  // Spatial cross-correlation along one array.
  RISIM_EXPERIMENT_CCF = 1,
  // RMS delay-spread distribution, baseline and doubled spreads.
  RISIM_EXPERIMENT_DS_CDF = 2,
  // Received-power sweeps over surface size and link distance.
  RISIM_EXPERIMENT_PATHLOSS = 3,
} risim_experiment;

// Opaque parsed-and-validated scenario handle.
typedef struct risim_scenario risim_scenario;

// Opaque result set: the tables produced by one `risim_run` call plus
// the provenance stamp written into their file headers.
typedef struct risim_tables risim_tables;

// Execution knobs for `risim_run`.
//
// Obtain scenario defaults with `risim_scenario_default_options`, then
// override fields as needed.  `workers == 0` means "use all cores".
typedef struct risim_run_options {
  // Base seed for all random draws.
  uint64_t seed;
  // Ensemble members per statistical estimate.
  size_t ensemble;
  // Worker thread count; 0 uses every available core.  Results are
  // byte-identical for any value.
  size_t workers;
  // One of the `risim_evolution_mode` values.
  int32_t evolution_mode;
} risim_run_options;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string; never null, never
// freed by the caller.
const char *risim_version(void);

// Message describing the most recent failure on the calling thread, or
// an empty string after a success.  The pointer stays valid until the
// next library call on the same thread; copy it if you need it longer.
const char *risim_last_error(void);

// Number of built-in example scenarios.
size_t risim_preset_count(void);

// Name of built-in scenario `index` (see `risim_preset_count`), as a
// fresh string for `risim_string_free`.
//
// # Safety
// `out` must be a valid pointer to a `char*`.
enum risim_status risim_preset_name(size_t index, char **out);

// Parse and validate a scenario from TOML text.  On success `*out` owns
// the handle; release it with `risim_scenario_free`.
//
// # Safety
// `text` must be a valid NUL-terminated string and `out` a valid
// pointer to a `risim_scenario*`.
enum risim_status risim_scenario_from_toml(const char *text, struct risim_scenario **out);

// Parse and validate a scenario from a TOML file.
//
// # Safety
// `path` must be a valid NUL-terminated UTF-8 string and `out` a valid
// pointer to a `risim_scenario*`.
enum risim_status risim_scenario_from_file(const char *path, struct risim_scenario **out);

// Load one of the built-in example scenarios by name.
//
// # Safety
// `name` must be a valid NUL-terminated string and `out` a valid
// pointer to a `risim_scenario*`.
enum risim_status risim_scenario_preset(const char *name, struct risim_scenario **out);

// Re-run full validation on a handle.  Handles from the constructors
// are already validated; this re-checks at no risk.
//
// # Safety
// `scenario` must be a live handle from one of the constructors.
enum risim_status risim_scenario_validate(const struct risim_scenario *scenario);

// The scenario's human-readable label, for `risim_string_free`.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum risim_status risim_scenario_label(const struct risim_scenario *scenario, char **out);

// Sixteen-hex-digit digest of the fully resolved configuration; two
// scenarios with equal digests produce identical results under equal
// options.  Free with `risim_string_free`.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum risim_status risim_scenario_config_hash(const struct risim_scenario *scenario, char **out);

// The fully resolved configuration as canonical TOML text (every
// default filled in), for `risim_string_free`.
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum risim_status risim_scenario_canonical_toml(const struct risim_scenario *scenario, char **out);

// Fill `out` with the run options the scenario itself configures
// (evolution mode is left at `RISIM_EVOLUTION_MODE_SCENARIO_DEFAULT`).
//
// # Safety
// `scenario` must be a live handle and `out` a valid pointer.
enum risim_status risim_scenario_default_options(const struct risim_scenario *scenario,
                                                 struct risim_run_options *out);

// Release a scenario handle.  Null is accepted and ignored.
//
// # Safety
// `scenario` must be null or a live handle, and must not be used after
// this call.
void risim_scenario_free(struct risim_scenario *scenario);

// Run one experiment and hand back the produced tables.  `options` may
// be null to use the scenario's own run settings.  On success `*out`
// owns the result set; release it with `risim_tables_free`.
//
// # Safety
// `scenario` must be a live handle, `options` null or a valid pointer,
// and `out` a valid pointer to a `risim_tables*`.
enum risim_status risim_run(const struct risim_scenario *scenario,
                            int32_t experiment,
                            const struct risim_run_options *options,
                            struct risim_tables **out);

// Number of tables in a result set; 0 for a null handle.
//
// # Safety
// `tables` must be null or a live handle.
size_t risim_tables_count(const struct risim_tables *tables);

// Name of table `index` (also its output file stem), for
// `risim_string_free`.
//
// # Safety
// `tables` must be a live handle and `out` a valid pointer.
enum risim_status risim_tables_name(const struct risim_tables *tables, size_t index, char **out);

// Row and column counts of table `index`.
//
// # Safety
// `tables` must be a live handle; `rows` and `cols` must be valid
// pointers.
enum risim_status risim_tables_dims(const struct risim_tables *tables,
                                    size_t index,
                                    size_t *rows,
                                    size_t *cols);

// Name of one column of one table, for `risim_string_free`.
//
// # Safety
// `tables` must be a live handle and `out` a valid pointer.
enum risim_status risim_tables_column_name(const struct risim_tables *tables,
                                           size_t index,
                                           size_t column,
                                           char **out);

// Unit of one column of one table (dimensionless columns report "1"),
// for `risim_string_free`.
//
// # Safety
// `tables` must be a live handle and `out` a valid pointer.
enum risim_status risim_tables_column_unit(const struct risim_tables *tables,
                                           size_t index,
                                           size_t column,
                                           char **out);

// Copy table `index` into `buffer` in row-major order.  `len` must be
// exactly rows × cols (see `risim_tables_dims`).
//
// # Safety
// `tables` must be a live handle and `buffer` must point to at least
// `len` writable doubles.
enum risim_status risim_tables_copy_data(const struct risim_tables *tables,
                                         size_t index,
                                         double *buffer,
                                         size_t len);

// Write every table of the result set into directory `dir` (created if
// missing), one self-describing text file per table, exactly as the
// command-line tool does.
//
// # Safety
// `tables` must be a live handle and `dir` a valid NUL-terminated
// UTF-8 string.
enum risim_status risim_tables_write(const struct risim_tables *tables, const char *dir);

// Release a result set.  Null is accepted and ignored.
//
// # Safety
// `tables` must be null or a live handle, and must not be used after
// this call.
void risim_tables_free(struct risim_tables *tables);

// Release a string obtained from this library.  Null is accepted and
// ignored.
//
// # Safety
// `s` must be null or a string returned by this library, and must not
// be used after this call.
void risim_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISIM_H */

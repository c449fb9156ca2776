#ifndef SKEWLAB_H
#define SKEWLAB_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SkewlabStatus {
  SKEWLAB_STATUS_OK = 0,
  SKEWLAB_STATUS_NULL_POINTER = 1,
  SKEWLAB_STATUS_INVALID_ARGUMENT = 2,
  SKEWLAB_STATUS_GRID_MISMATCH = 3,
  SKEWLAB_STATUS_DIMENSION_MISMATCH = 4,
  SKEWLAB_STATUS_CONFIG = 5,
  SKEWLAB_STATUS_IO = 6,
  SKEWLAB_STATUS_NUMERICAL = 7,
  SKEWLAB_STATUS_HYPOTHESIS = 8,
  SKEWLAB_STATUS_PANIC = 9,
} SkewlabStatus;

// Outcome of a verifier, mirroring the report's outcome field.
typedef enum SkewlabOutcome {
  SKEWLAB_OUTCOME_PASS = 0,
  SKEWLAB_OUTCOME_FAIL = 1,
  SKEWLAB_OUTCOME_HYPOTHESIS_UNMET = 2,
  SKEWLAB_OUTCOME_ERROR = 3,
} SkewlabOutcome;

// A parsed experiment configuration.
typedef struct SkewlabConfig SkewlabConfig;

// A profile on a grid.
typedef struct SkewlabProfile SkewlabProfile;

// The report of a finished run.
typedef struct SkewlabReport SkewlabReport;

// A state advanced step by step under a configuration's problem.
typedef struct SkewlabSimulation SkewlabSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null. Valid until
// the next failing call on the same thread.
const char *skewlab_last_error(void);

// Library version as a static NUL-terminated string.
const char *skewlab_version(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void skewlab_string_free(char *s);

// Parses and validates a JSON configuration.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum SkewlabStatus skewlab_config_parse(const char *json, struct SkewlabConfig **out);

// Loads and validates a configuration file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum SkewlabStatus skewlab_config_load(const char *path, struct SkewlabConfig **out);

// # Safety
// `cfg` must be null or a handle from `skewlab_config_parse`/`_load`.
void skewlab_config_free(struct SkewlabConfig *cfg);

// Runs an experiment. With a non-null `out_dir` the report, trajectory
// and plot data are written there as by the command-line runner.
//
// # Safety
// `cfg` must be a live config handle; `out_dir` null or a NUL-terminated
// string; `out` writable.
enum SkewlabStatus skewlab_run(const struct SkewlabConfig *cfg,
                               const char *out_dir,
                               struct SkewlabReport **out);

// # Safety
// `report` must be null or a handle from `skewlab_run`.
void skewlab_report_free(struct SkewlabReport *report);

// Process exit code the command-line runner would use for this report.
//
// # Safety
// `report` must be a live report handle; `out` writable.
enum SkewlabStatus skewlab_report_exit_code(const struct SkewlabReport *report, int32_t *out);

// The report as JSON; free the string with `skewlab_string_free`.
//
// # Safety
// `report` must be a live report handle; `out` writable.
enum SkewlabStatus skewlab_report_json(const struct SkewlabReport *report, char **out);

// Outcome and measured value of the named verifier. `measured` is NaN
// when the verifier produced no measurement.
//
// # Safety
// `report` must be a live report handle, `name` a NUL-terminated string,
// `outcome` and `measured` writable.
enum SkewlabStatus skewlab_report_verifier(const struct SkewlabReport *report,
                                           const char *name,
                                           enum SkewlabOutcome *outcome,
                                           double *measured);

// Sets up the configured problem at its initial datum, time zero.
//
// # Safety
// `cfg` must be a live config handle; `out` writable.
enum SkewlabStatus skewlab_simulation_new(const struct SkewlabConfig *cfg,
                                          struct SkewlabSimulation **out);

// # Safety
// `sim` must be null or a handle from `skewlab_simulation_new`.
void skewlab_simulation_free(struct SkewlabSimulation *sim);

// Advances the state by `steps` time steps.
//
// # Safety
// `sim` must be a live simulation handle.
enum SkewlabStatus skewlab_simulation_advance(struct SkewlabSimulation *sim, size_t steps);

// Current time and step size.
//
// # Safety
// `sim` must be a live simulation handle; `time` and `dt` writable.
enum SkewlabStatus skewlab_simulation_time(const struct SkewlabSimulation *sim,
                                           double *time,
                                           double *dt);

// Number of grid nodes.
//
// # Safety
// `sim` must be a live simulation handle; `out` writable.
enum SkewlabStatus skewlab_simulation_len(const struct SkewlabSimulation *sim, size_t *out);

// Copies the current profile (row-major in 2-D) into `buf`, which must
// hold exactly `len` values.
//
// # Safety
// `sim` must be a live simulation handle; `buf` must point to `len`
// writable doubles.
enum SkewlabStatus skewlab_simulation_values(const struct SkewlabSimulation *sim,
                                             double *buf,
                                             size_t len);

// Replaces the current profile; the time and phase are kept.
//
// # Safety
// `sim` must be a live simulation handle; `values` must point to `len`
// readable doubles.
enum SkewlabStatus skewlab_simulation_set_values(struct SkewlabSimulation *sim,
                                                 const double *values,
                                                 size_t len);

// Snapshot of the current profile as an independent handle.
//
// # Safety
// `sim` must be a live simulation handle; `out` writable.
enum SkewlabStatus skewlab_simulation_profile(const struct SkewlabSimulation *sim,
                                              struct SkewlabProfile **out);

// # Safety
// `p` must be null or a handle from `skewlab_simulation_profile`.
void skewlab_profile_free(struct SkewlabProfile *p);

// Sup-norm distance between two profiles on the same grid.
//
// # Safety
// `a` and `b` must be live profile handles; `out` writable.
enum SkewlabStatus skewlab_profile_distance(const struct SkewlabProfile *a,
                                            const struct SkewlabProfile *b,
                                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKEWLAB_H */

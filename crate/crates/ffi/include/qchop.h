#ifndef QCHOP_H
#define QCHOP_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  QCHOP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  QCHOP_STATUS_NULL_POINTER = 1,
  /**
   * An argument is out of range or a string is not valid UTF-8.
   */
  QCHOP_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Invalid simulation settings.
   */
  QCHOP_STATUS_CONFIG = 3,
  /**
   * The instance text or data is malformed.
   */
  QCHOP_STATUS_MALFORMED = 4,
  /**
   * The instance is valid but unusable for benchmarking.
   */
  QCHOP_STATUS_REJECTED = 5,
  /**
   * The generator kept producing rejected instances.
   */
  QCHOP_STATUS_GENERATOR = 6,
  /**
   * The integrator failed (step underflow, step budget, norm drift).
   */
  QCHOP_STATUS_INTEGRATION = 7,
  QCHOP_STATUS_IO = 8,
  /**
   * A precondition of the library was violated.
   */
  QCHOP_STATUS_PRECONDITION = 9,
  /**
   * The library panicked; the handle arguments should be considered lost.
   */
  QCHOP_STATUS_PANIC = 10,
} QchopStatus;

/**
 * Problem families of the built-in generator.
 */
typedef enum {
  QCHOP_PROBLEM_KIND_MIS = 0,
  QCHOP_PROBLEM_KIND_DMDS = 1,
  QCHOP_PROBLEM_KIND_KNAPSACK = 2,
  QCHOP_PROBLEM_KIND_AUCTION = 3,
  QCHOP_PROBLEM_KIND_ETF = 4,
} QchopProblemKind;

typedef enum {
  QCHOP_VARIANT_QCHOP = 0,
  QCHOP_VARIANT_QCHOP_CD = 1,
  QCHOP_VARIANT_SAA = 2,
  QCHOP_VARIANT_YWW = 3,
} QchopVariant;

/**
 * How [`QchopRunOptions::total_time`] is interpreted.
 */
typedef enum {
  /**
   * `T = 2πN`.
   */
  QCHOP_RUNTIME_TWO_PI_N = 0,
  /**
   * `T = 2πN²`.
   */
  QCHOP_RUNTIME_TWO_PI_N2 = 1,
  /**
   * `T = total_time`.
   */
  QCHOP_RUNTIME_FIXED = 2,
} QchopRuntime;

/**
 * An instance with its exact solution and simulation encoding.
 */
typedef struct QchopInstance QchopInstance;

/**
 * Metrics of one finished simulation.
 */
typedef struct QchopReport QchopReport;

/**
 * Exact solution of an instance.
 */
typedef struct {
  double e_best;
  double e_worst;
  uint64_t feasible_count;
  uint64_t optimal_count;
} QchopOracle;

/**
 * Settings of one simulation. Obtain defaults from
 * [`qchop_run_options_default`].
 */
typedef struct {
  /**
   * A [`QchopVariant`].
   */
  int32_t variant;
  /**
   * A [`QchopRuntime`].
   */
  int32_t runtime;
  double total_time;
  /**
   * Penalty factor; `0` selects the number of decision variables.
   */
  double lambda;
  /**
   * ε of `P_ε`; negative selects the problem family's default.
   */
  double epsilon;
  size_t checkpoints;
  double atol;
  double rtol;
  /**
   * Nonzero to apply the slack mixing operator.
   */
  int32_t mixing;
} QchopRunOptions;

/**
 * Expectations at one checkpoint.
 */
typedef struct {
  double t;
  double r;
  double p_feas;
  double p_opt;
  double p_eps;
} QchopCheckpoint;

typedef struct {
  uint64_t accepted_steps;
  uint64_t rejected_steps;
  uint64_t evaluations;
  double max_norm_drift;
} QchopIntegratorStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none failed
 * yet. Valid until the next failing call on this thread.
 */
const char *qchop_last_error_message(void);

/**
 * Static name of a [`QchopStatus`] value, e.g. `"QCHOP_STATUS_CONFIG"`,
 * or `"QCHOP_STATUS_UNKNOWN"`.
 */
const char *qchop_status_name(int32_t status);

/**
 * Library version as a static string.
 */
const char *qchop_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void qchop_string_free(char *s);

/**
 * Draws an admitted instance of `kind` (a [`QchopProblemKind`]) from the
 * built-in generator.
 *
 * # Safety
 * `out` must be valid for writes. On success `*out` owns a new instance.
 */
QchopStatus qchop_instance_generate(int32_t kind, size_t n, uint64_t seed, QchopInstance **out);

/**
 * Parses an instance from its JSON description.
 *
 * # Safety
 * `json` and `id` must be nul-terminated strings (`id` may be null);
 * `out` must be valid for writes.
 */
QchopStatus qchop_instance_from_json(const char *json, const char *id, QchopInstance **out);

/**
 * Releases an instance. Null is ignored.
 *
 * # Safety
 * `instance` must come from this library and not have been freed.
 */
void qchop_instance_free(QchopInstance *instance);

/**
 * Writes the instance's JSON description into `*out`; free it with
 * [`qchop_string_free`].
 *
 * # Safety
 * `instance` must be a live handle; `out` must be valid for writes.
 */
QchopStatus qchop_instance_to_json(const QchopInstance *instance, char **out);

/**
 * Number of decision variables, or 0 for a null handle.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
size_t qchop_instance_num_vars(const QchopInstance *instance);

/**
 * Dimension of the simulated space (qubits and slack qudits), or 0 for a
 * null handle.
 *
 * # Safety
 * `instance` must be null or a live handle.
 */
size_t qchop_instance_dimension(const QchopInstance *instance);

/**
 * The instance's exact solution.
 *
 * # Safety
 * `instance` must be a live handle; `out` must be valid for writes.
 */
QchopStatus qchop_instance_oracle(const QchopInstance *instance, QchopOracle *out);

/**
 * Default settings: Q-CHOP, `T = 2πN²`, `λ = N`, family default ε, 101
 * checkpoints, tolerances `1e-8`, mixing on.
 *
 * # Safety
 * `out` must be valid for writes.
 */
QchopStatus qchop_run_options_default(QchopRunOptions *out);

/**
 * Simulates `instance` with `options` (null selects the defaults).
 *
 * # Safety
 * `instance` must be a live handle, `options` null or valid, `out` valid
 * for writes. On success `*out` owns a new report.
 */
QchopStatus qchop_run(const QchopInstance *instance,
                      const QchopRunOptions *options,
                      QchopReport **out);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `report` must come from this library and not have been freed.
 */
void qchop_report_free(QchopReport *report);

/**
 * Number of checkpoints, or 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t qchop_report_len(const QchopReport *report);

/**
 * Checkpoint `index`, in time order.
 *
 * # Safety
 * `report` must be a live handle; `out` must be valid for writes.
 */
QchopStatus qchop_report_checkpoint(const QchopReport *report, size_t index, QchopCheckpoint *out);

/**
 * Penalty factor and total time the run used.
 *
 * # Safety
 * `report` must be a live handle; both outputs must be valid for writes.
 */
QchopStatus qchop_report_parameters(const QchopReport *report, double *lambda, double *total_time);

/**
 * Integrator statistics of the run.
 *
 * # Safety
 * `report` must be a live handle; `out` must be valid for writes.
 */
QchopStatus qchop_report_stats(const QchopReport *report, QchopIntegratorStats *out);

/**
 * The whole report as JSON; free it with [`qchop_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` must be valid for writes.
 */
QchopStatus qchop_report_to_json(const QchopReport *report, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCHOP_H */

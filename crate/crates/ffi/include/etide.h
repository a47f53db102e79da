#ifndef ETIDE_H
#define ETIDE_H

/* Generated by cbindgen from the etide-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for every fallible call.
 */
typedef enum EtideStatus {
  ETIDE_STATUS_OK = 0,
  ETIDE_STATUS_NULL_POINTER = 1,
  ETIDE_STATUS_INVALID_ARGUMENT = 2,
  ETIDE_STATUS_UNKNOWN_ALGORITHM = 3,
  ETIDE_STATUS_OUT_OF_RANGE = 4,
  ETIDE_STATUS_INTERNAL_ERROR = 5,
} EtideStatus;

/**
 * Opaque handle to one finished optimization run.
 */
typedef struct EtideRun EtideRun;

/**
 * Opaque handle to an immutable benchmark suite.
 */
typedef struct EtideSuite EtideSuite;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build the deterministic benchmark suite for `(seed, dimension)` and
 * store a handle in `out`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum EtideStatus etide_suite_new(uint64_t seed, size_t dimension, struct EtideSuite **out);

/**
 * Release a suite handle. Null is ignored.
 *
 * # Safety
 * `suite` must be null or a pointer previously returned by
 * [`etide_suite_new`] that has not been freed yet.
 */
void etide_suite_free(struct EtideSuite *suite);

/**
 * Number of functions in the suite; 0 for a null handle.
 *
 * # Safety
 * `suite` must be null or a live suite handle.
 */
size_t etide_suite_len(const struct EtideSuite *suite);

/**
 * Problem dimension of the suite; 0 for a null handle.
 *
 * # Safety
 * `suite` must be null or a live suite handle.
 */
size_t etide_suite_dimension(const struct EtideSuite *suite);

/**
 * Identifier of the `index`-th suite function as a caller-owned string;
 * null on a bad handle or index.
 *
 * # Safety
 * `suite` must be null or a live suite handle.
 */
char *etide_suite_function_id(const struct EtideSuite *suite, size_t index);

/**
 * The suite manifest (id, category, seed, dimension, optimum value per
 * function) as a caller-owned JSON string; null on a bad handle.
 *
 * # Safety
 * `suite` must be null or a live suite handle.
 */
char *etide_suite_manifest_json(const struct EtideSuite *suite);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by an `etide_*` call that has not
 * been freed yet.
 */
void etide_string_free(char *s);

/**
 * Evaluate suite function `index` at `x` (length `len`) and write the
 * objective value to `value`.
 *
 * # Safety
 * `suite` must be a live suite handle, `x` must point to `len` readable
 * doubles, and `value` must be writable.
 */
enum EtideStatus etide_evaluate(const struct EtideSuite *suite,
                                size_t index,
                                const double *x,
                                size_t len,
                                double *value);

/**
 * Run one seeded optimization of suite function `index` with the named
 * configuration (e.g. `"de-rand-1/eti"`) and store a run handle in `out`.
 * `record_stride` of 0 defaults to `max_fes / 200`.
 *
 * # Safety
 * `suite` must be a live suite handle, `algorithm` a valid NUL-terminated
 * string, and `out` writable storage for one pointer.
 */
enum EtideStatus etide_optimize(const struct EtideSuite *suite,
                                size_t index,
                                const char *algorithm,
                                uint64_t seed,
                                uint64_t max_fes,
                                uint64_t record_stride,
                                struct EtideRun **out);

/**
 * Release a run handle. Null is ignored.
 *
 * # Safety
 * `run` must be null or a pointer previously returned by
 * [`etide_optimize`] that has not been freed yet.
 */
void etide_run_free(struct EtideRun *run);

/**
 * Floored final error of the run; NaN for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
double etide_run_final_error(const struct EtideRun *run);

/**
 * Evaluations consumed by the run; 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
uint64_t etide_run_fes_used(const struct EtideRun *run);

/**
 * Stabilizing impulse count of the run; 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
uint64_t etide_run_stabilizing_events(const struct EtideRun *run);

/**
 * Destabilizing impulse count of the run; 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
uint64_t etide_run_destabilizing_events(const struct EtideRun *run);

/**
 * Number of sampled points on the best-so-far curve; 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live run handle.
 */
size_t etide_run_curve_len(const struct EtideRun *run);

/**
 * Read curve point `index` into `fes` and `error`.
 *
 * # Safety
 * `run` must be a live run handle; `fes` and `error` must be writable.
 */
enum EtideStatus etide_run_curve_point(const struct EtideRun *run,
                                       size_t index,
                                       uint64_t *fes,
                                       double *error);

/**
 * Copy the best point found into `buffer` (length `len`, which must equal
 * the problem dimension).
 *
 * # Safety
 * `run` must be a live run handle and `buffer` must point to `len`
 * writable doubles.
 */
enum EtideStatus etide_run_best_position(const struct EtideRun *run, double *buffer, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ETIDE_H */

#ifndef STREAMMOMENTS_H
#define STREAMMOMENTS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum SmStatus {
  SM_OK = 0,
  SM_NULL_POINTER = 1,
  SM_INVALID_ARGUMENT = 2,
  SM_ITEM_OUT_OF_RANGE = 3,
  SM_NO_ESTIMATE = 4,
  SM_INSUFFICIENT_DATA = 5,
  SM_INTERNAL = 6,
} SmStatus;

/**
 * Opaque second-moment estimator.
 */
typedef struct SmF2 SmF2;

/**
 * Opaque randomized p-th moment estimator.
 */
typedef struct SmFp SmFp;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static, NUL-terminated description of a status code.
 */
const char *sm_status_message(enum SmStatus status);

/**
 * Creates a second-moment estimator for items in `[1, n]`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SmStatus sm_f2_new(double epsilon, double delta, uint64_t n, struct SmF2 **out);

/**
 * Feeds `len` items. On `SM_ITEM_OUT_OF_RANGE` nothing is consumed.
 *
 * # Safety
 * `h` must come from [`sm_f2_new`]; `items` must point to `len` values.
 */
enum SmStatus sm_f2_update(struct SmF2 *h, const uint64_t *items, size_t len);

/**
 * # Safety
 * `h` must come from [`sm_f2_new`]; `out` must be writable.
 */
enum SmStatus sm_f2_estimate(const struct SmF2 *h, double *out);

/**
 * Bits of state currently held; 0 for a null handle.
 *
 * # Safety
 * `h` must be null or come from [`sm_f2_new`].
 */
uint64_t sm_f2_bits(const struct SmF2 *h);

/**
 * # Safety
 * `h` must be null or come from [`sm_f2_new`] and not be used afterwards.
 */
void sm_f2_free(struct SmF2 *h);

/**
 * Creates a p-th moment estimator, `0 < p < 2`. `copies == 0` picks the
 * count from `delta`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SmStatus sm_fp_new(double p,
                        double epsilon,
                        double delta,
                        uint64_t n,
                        uint64_t seed,
                        uint32_t copies,
                        struct SmFp **out);

/**
 * Feeds `len` items. On `SM_ITEM_OUT_OF_RANGE` nothing is consumed.
 *
 * # Safety
 * `h` must come from [`sm_fp_new`]; `items` must point to `len` values.
 */
enum SmStatus sm_fp_update(struct SmFp *h, const uint64_t *items, size_t len);

/**
 * Writes the current estimate, or returns `SM_NO_ESTIMATE` if every copy
 * failed.
 *
 * # Safety
 * `h` must come from [`sm_fp_new`]; `out` must be writable.
 */
enum SmStatus sm_fp_estimate(const struct SmFp *h, double *out);

/**
 * Peak bits over the stream so far; 0 for a null handle.
 *
 * # Safety
 * `h` must be null or come from [`sm_fp_new`].
 */
uint64_t sm_fp_peak_bits(const struct SmFp *h);

/**
 * # Safety
 * `h` must be null or come from [`sm_fp_new`] and not be used afterwards.
 */
void sm_fp_free(struct SmFp *h);

/**
 * Runs the deterministic estimator over a whole stream held in memory.
 *
 * # Safety
 * `items` must point to `len` values; `out` must be writable.
 */
enum SmStatus sm_fp_deterministic(double p,
                                  double epsilon,
                                  double delta,
                                  uint64_t n,
                                  const uint64_t *items,
                                  size_t len,
                                  uint32_t copies,
                                  double *out);

/**
 * Exact `Σ f_i^p` of a stream held in memory, `p ≥ 0`.
 *
 * # Safety
 * `items` must point to `len` values; `out` must be writable.
 */
enum SmStatus sm_exact_moment(const uint64_t *items, size_t len, double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STREAMMOMENTS_H */

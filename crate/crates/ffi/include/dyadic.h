#ifndef DYADIC_H
#define DYADIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum DyStatus {
  DY_STATUS_OK = 0,
  DY_STATUS_NULL_POINTER = 1,
  DY_STATUS_INVALID_INPUT = 2,
  DY_STATUS_UNSUPPORTED_INDEX = 3,
  DY_STATUS_PRECONDITION = 4,
  DY_STATUS_UNDEFINED_RATIO = 5,
  DY_STATUS_JSON = 6,
  DY_STATUS_IO = 7,
  DY_STATUS_PANIC = 8,
} DyStatus;

typedef struct DyCz DyCz;

typedef struct DyProfile DyProfile;

typedef struct DyStepFunction DyStepFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. Valid until
 * the next failing call on the same thread.
 */
const char *dy_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void dy_string_free(char *s);

/**
 * Step function on `[0, 2^m)` with `len = 2^(m+level)` cell values.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be writable.
 */
enum DyStatus dy_step_new(uint32_t m,
                          uint32_t level,
                          const double *values,
                          size_t len,
                          struct DyStepFunction **out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum DyStatus dy_step_from_json(const char *json, struct DyStepFunction **out);

/**
 * # Safety
 * `f` must be a live handle; `out` must be writable. Free the result with `dy_string_free`.
 */
enum DyStatus dy_step_to_json(const struct DyStepFunction *f, char **out);

/**
 * # Safety
 * `f` must be null or a handle from this library, not yet freed.
 */
void dy_step_free(struct DyStepFunction *f);

/**
 * Number of cells.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum DyStatus dy_step_len(const struct DyStepFunction *f, size_t *out);

/**
 * Copies `min(cap, len)` cell values into `buf`.
 *
 * # Safety
 * `f` must be a live handle; `buf` must have room for `cap` doubles.
 */
enum DyStatus dy_step_values(const struct DyStepFunction *f, double *buf, size_t cap);

/**
 * Measure of `{|f| > s}`.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum DyStatus dy_distribution(const struct DyStepFunction *f, double s, double *out);

/**
 * `||f||_p`; pass `INFINITY` for the sup norm.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum DyStatus dy_lp_norm(const struct DyStepFunction *f, double p, double *out);

/**
 * `||f||_{p,q}`.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum DyStatus dy_lorentz_norm(const struct DyStepFunction *f, double p, double q, double *out);

/**
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum DyStatus dy_rearrange(const struct DyStepFunction *f, struct DyProfile **out);

/**
 * Number of constant pieces of `f*`.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum DyStatus dy_profile_steps(const struct DyProfile *p, size_t *out);

/**
 * Piece `i`: `f* = value` on `[t_start, t_end)`.
 *
 * # Safety
 * `p` must be a live handle; the out-pointers must be writable.
 */
enum DyStatus dy_profile_step(const struct DyProfile *p,
                              size_t i,
                              double *t_start,
                              double *t_end,
                              double *value);

/**
 * `f*(t)`, right-continuous.
 *
 * # Safety
 * `p` must be a live handle; `out` must be writable.
 */
enum DyStatus dy_profile_eval(const struct DyProfile *p, double t, double *out);

/**
 * # Safety
 * `p` must be null or a handle from this library, not yet freed.
 */
void dy_profile_free(struct DyProfile *p);

/**
 * Haar function of `[j 2^-k, (j+1) 2^-k)` on the `(m, level)` grid.
 *
 * # Safety
 * `out` must be writable.
 */
enum DyStatus dy_haar(int32_t k,
                      uint64_t j,
                      uint32_t m,
                      uint32_t level,
                      struct DyStepFunction **out);

/**
 * `D_k f`.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum DyStatus dy_martingale_diff(const struct DyStepFunction *f,
                                 int32_t k,
                                 struct DyStepFunction **out);

/**
 * `S f` for coefficients given as `{"entries":[{"k":..,"j":..,"a":..}]}`.
 *
 * # Safety
 * `f` must be a live handle, `coeffs_json` a NUL-terminated string; `out` must be writable.
 */
enum DyStatus dy_maximal_s(const struct DyStepFunction *f,
                           const char *coeffs_json,
                           struct DyStepFunction **out);

/**
 * Calderon-Zygmund decomposition at `height`.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum DyStatus dy_cz_decompose(const struct DyStepFunction *f, double height, struct DyCz **out);

/**
 * # Safety
 * `dec` must be a live handle; `out` must be writable.
 */
enum DyStatus dy_cz_cube_count(const struct DyCz *dec, size_t *out);

/**
 * Cube `i` as the dyadic interval `[j 2^-k, (j+1) 2^-k)`.
 *
 * # Safety
 * `dec` must be a live handle; `k` and `j` must be writable.
 */
enum DyStatus dy_cz_cube(const struct DyCz *dec, size_t i, int32_t *k, uint64_t *j);

/**
 * A copy of the good part `g`.
 *
 * # Safety
 * `dec` must be a live handle; `out` must be writable.
 */
enum DyStatus dy_cz_good(const struct DyCz *dec, struct DyStepFunction **out);

/**
 * Runs the decomposition and stopping-time checks; `passed` is 1 when both pass,
 * `report_json` (optional, may be null) receives both reports as a JSON array.
 *
 * # Safety
 * `f` and `dec` must be live handles; `passed` must be writable.
 */
enum DyStatus dy_cz_verify(const struct DyStepFunction *f,
                           const struct DyCz *dec,
                           int32_t *passed,
                           char **report_json);

/**
 * # Safety
 * `dec` must be null or a handle from this library, not yet freed.
 */
void dy_cz_free(struct DyCz *dec);

/**
 * Runs a named suite. `terms < 0` means unset. `passed` is 1 iff every report
 * passes; `report_json` receives the report collection.
 *
 * # Safety
 * `suite` must be a NUL-terminated string; `passed` and `report_json` must be writable.
 */
enum DyStatus dy_run_suite(const char *suite,
                           uint64_t seed,
                           size_t cases,
                           uint32_t level,
                           uint32_t m,
                           int64_t terms,
                           int32_t *passed,
                           char **report_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYADIC_H */

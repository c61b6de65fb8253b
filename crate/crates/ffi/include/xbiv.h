#ifndef XBIV_H
#define XBIV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. `Ok` is zero; every other value names an error kind.
 */
typedef enum XbivStatus {
  XBIV_STATUS_OK = 0,
  XBIV_STATUS_NULL_POINTER = 1,
  XBIV_STATUS_INVALID_UTF8 = 2,
  XBIV_STATUS_CONFIG = 3,
  XBIV_STATUS_RESOLUTION = 4,
  XBIV_STATUS_PARSE = 5,
  XBIV_STATUS_NON_ASSOCIATIVE = 6,
  XBIV_STATUS_BAD_UNIT = 7,
  XBIV_STATUS_DIMENSION_MISMATCH = 8,
  XBIV_STATUS_ALGEBRA_MISMATCH = 9,
  XBIV_STATUS_TRUNCATION_OVERFLOW = 10,
  XBIV_STATUS_WRONG_DEGREE = 11,
  XBIV_STATUS_NOT_IDEMPOTENT = 12,
  XBIV_STATUS_MALFORMED_TRIPLE = 13,
  XBIV_STATUS_PARITY_ERROR = 14,
  XBIV_STATUS_PARITY_MISMATCH = 15,
  XBIV_STATUS_NEGATIVE_TIME = 16,
  XBIV_STATUS_TARGET_MISMATCH = 17,
  XBIV_STATUS_PRECONDITION_VIOLATED = 18,
  XBIV_STATUS_GRID_TOO_COARSE = 19,
  XBIV_STATUS_NOT_INTEGRABLE = 20,
  XBIV_STATUS_UNSUPPORTED_DIMENSION = 21,
  XBIV_STATUS_NOT_TOP_DEGREE = 22,
  XBIV_STATUS_MODE_MISMATCH = 23,
  XBIV_STATUS_NUMERICAL = 24,
  XBIV_STATUS_IO = 25,
  XBIV_STATUS_PANIC = 99,
  XBIV_STATUS_OTHER = 100,
} XbivStatus;

/**
 * A resolved problem: algebras, triples, idempotents and paths.
 */
typedef struct XbivProblem XbivProblem;

/**
 * The result of a suite run.
 */
typedef struct XbivReport XbivReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next call
 * that fails; never null.
 */
const char *xbiv_last_error(void);

/**
 * # Safety
 * `s` must come from this library, or be null.
 */
void xbiv_string_free(char *s);

/**
 * Problem with only the built-in names (`C`, `C1`, `M2`, `fixture0…`).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum XbivStatus xbiv_problem_builtin(struct XbivProblem **out);

/**
 * Parse and resolve a problem file given as JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum XbivStatus xbiv_problem_from_json(const char *json, struct XbivProblem **out);

/**
 * # Safety
 * `p` must come from this library, or be null.
 */
void xbiv_problem_free(struct XbivProblem *p);

/**
 * Run a suite (`identities`, `goodwillie`, `bar`, `jlo`, `bivariant`,
 * `bott`, `all`). `tol < 0` and `trunc < 0` select the per-check defaults.
 *
 * # Safety
 * `problem` must be a live handle, `suite` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum XbivStatus xbiv_run_suite(const struct XbivProblem *problem,
                               const char *suite,
                               uint64_t seed,
                               double tol,
                               int64_t trunc,
                               struct XbivReport **out);

/**
 * 1 if every check passed, 0 otherwise (also for a null handle).
 *
 * # Safety
 * `r` must be a live handle or null.
 */
int32_t xbiv_report_passed(const struct XbivReport *r);

/**
 * Number of checks in the report.
 *
 * # Safety
 * `r` must be a live handle or null.
 */
uintptr_t xbiv_report_len(const struct XbivReport *r);

/**
 * The report as JSON.
 *
 * # Safety
 * `r` must be a live handle; `out` a valid pointer.
 */
enum XbivStatus xbiv_report_json(const struct XbivReport *r, char **out);

/**
 * # Safety
 * `r` must come from this library, or be null.
 */
void xbiv_report_free(struct XbivReport *r);

/**
 * Evaluate `target` (`ch_idempotent`, `jlo`, `chi`, `pairing`, `bott`).
 * `args_json` is an object with optional keys `algebra`, `element`,
 * `idempotent`, `triple`, `chain`, `trunc`, `time`; it may be null.
 *
 * # Safety
 * `problem` must be a live handle, strings NUL-terminated, `out` valid.
 */
enum XbivStatus xbiv_compute(const struct XbivProblem *problem,
                             const char *target,
                             const char *args_json,
                             char **out);

/**
 * Pairing of the Bott element with the fundamental class in dimension `n`,
 * lowered at `π` and `λ = 1`. Writes real and imaginary parts.
 *
 * # Safety
 * `re` and `im` must be valid pointers.
 */
enum XbivStatus xbiv_bott_pairing(uintptr_t n, double *re, double *im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* XBIV_H */

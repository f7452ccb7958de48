#ifndef EXTREMAL_H
#define EXTREMAL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ExStatus {
  EX_STATUS_OK = 0,
  EX_STATUS_NULL_POINTER = 1,
  EX_STATUS_INVALID_ARGUMENT = 2,
  EX_STATUS_INVALID_UTF8 = 3,
  EX_STATUS_JSON = 4,
  EX_STATUS_DIMENSION_MISMATCH = 5,
  EX_STATUS_OUTSIDE_DOMAIN = 6,
  EX_STATUS_NOT_ARC_ALGEBRA = 7,
  EX_STATUS_INFEASIBLE_DISC = 8,
  EX_STATUS_NODE_CAP = 9,
  EX_STATUS_CONFIG = 10,
  EX_STATUS_IO = 11,
  EX_STATUS_PANIC = 12,
} ExStatus;

/**
 * Disc optimisation result handle.
 */
typedef struct ExDiscResult ExDiscResult;

/**
 * Domain handle.
 */
typedef struct ExDomain ExDomain;

/**
 * Converged envelope handle.
 */
typedef struct ExField ExField;

/**
 * Set handle.
 */
typedef struct ExSet ExSet;

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ex_last_error(char *buf, size_t len);

/**
 * Library version as a static string.
 */
const char *ex_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void ex_string_free(char *s);

/**
 * Parses a domain such as `{"kind":"unit_disc"}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ExStatus ex_domain_from_json(const char *json, struct ExDomain **out);

/**
 * # Safety
 * `d` must be null or a handle from this library, not yet freed.
 */
void ex_domain_free(struct ExDomain *d);

/**
 * Parses a set such as `{"type":"arc","start":0,"end":3.14}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum ExStatus ex_set_from_json(const char *json, struct ExSet **out);

/**
 * # Safety
 * `s` must be null or a handle from this library, not yet freed.
 */
void ex_set_free(struct ExSet *s);

/**
 * Grid envelope of `-chi_A` with spacing `h` and tolerance `tol`.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum ExStatus ex_envelope_solve(const struct ExDomain *domain,
                                const struct ExSet *set,
                                double h,
                                double tol,
                                struct ExField **out);

/**
 * # Safety
 * `f` must be null or a handle from this library, not yet freed.
 */
void ex_field_free(struct ExField *f);

/**
 * Non-zero when the solve met its tolerance.
 *
 * # Safety
 * `f` must be a live handle.
 */
int32_t ex_field_converged(const struct ExField *f);

/**
 * Envelope at a point given as `n` reals `(re1, im1[, re2, im2])`.
 *
 * # Safety
 * `f` must be live, `coords` must hold `n` doubles, `out` writable.
 */
enum ExStatus ex_field_interpolate(const struct ExField *f,
                                   const double *coords,
                                   size_t n,
                                   double *out);

/**
 * Writes the field as CSV (`re1,im1[,re2,im2],value`).
 *
 * # Safety
 * `f` must be live and `path` a NUL-terminated string.
 */
enum ExStatus ex_field_write_csv(const struct ExField *f, const char *path);

/**
 * Harmonic measure formula value `poisson(z, U)` for an arc set on the
 * unit disc.
 *
 * # Safety
 * `set` must be live and `out` writable.
 */
enum ExStatus ex_poisson(double re, double im, const struct ExSet *set, double *out);

/**
 * Boundary measure of `U` pulled back by the disc automorphism sending 0
 * to `re + i im`.
 *
 * # Safety
 * `set` must be live and `out` writable.
 */
enum ExStatus ex_mobius_sigma(double re, double im, const struct ExSet *set, double *out);

/**
 * Capacity of a set at grid spacing `h`.
 *
 * # Safety
 * Handles must be live and `out` writable.
 */
enum ExStatus ex_capacity(const struct ExDomain *domain,
                          const struct ExSet *set,
                          double h,
                          double *out);

/**
 * Best disc centred at the point `coords` (`n` reals).
 *
 * # Safety
 * Handles must be live, `coords` must hold `n` doubles, `out` writable.
 */
enum ExStatus ex_optimize_discs(const struct ExDomain *domain,
                                const struct ExSet *set,
                                const double *coords,
                                size_t n,
                                size_t degree,
                                size_t restarts,
                                uint64_t seed,
                                struct ExDiscResult **out);

/**
 * Best `sigma_f(A)` found; NaN for a null handle.
 *
 * # Safety
 * `r` must be null or live.
 */
double ex_disc_result_sigma(const struct ExDiscResult *r);

/**
 * The result as JSON; release with [`ex_string_free`].
 *
 * # Safety
 * `r` must be live and `out` writable.
 */
enum ExStatus ex_disc_result_to_json(const struct ExDiscResult *r, char **out);

/**
 * # Safety
 * `r` must be null or a handle from this library, not yet freed.
 */
void ex_disc_result_free(struct ExDiscResult *r);

/**
 * Runs an experiment config (JSON) and returns the result record as JSON.
 * A run with ledger failures still returns [`ExStatus::Ok`].
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` writable.
 */
enum ExStatus ex_run_json(const char *config, char **out);

#endif  /* EXTREMAL_H */

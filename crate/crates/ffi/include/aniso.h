#ifndef ANISO_H
#define ANISO_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Class tested by [`aniso_check`].
 */
typedef enum {
  ANISO_CLASS_B_WEAK = 0,
  ANISO_CLASS_B_STRONG = 1,
  ANISO_CLASS_B_SMOOTH = 2,
  ANISO_CLASS_A_WEAK = 3,
  ANISO_CLASS_A_STRONG = 4,
  ANISO_CLASS_A_SMOOTH = 5,
} AnisoClass;

/**
 * Termination status of [`aniso_descend`].
 */
typedef enum {
  ANISO_DESCENT_STATUS_CONVERGED = 0,
  ANISO_DESCENT_STATUS_MAX_ITER = 1,
  ANISO_DESCENT_STATUS_DIVERGED = 2,
} AnisoDescentStatus;

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum {
  ANISO_STATUS_OK = 0,
  ANISO_STATUS_NULL_POINTER = 1,
  ANISO_STATUS_INVALID_UTF8 = 2,
  ANISO_STATUS_PARSE = 3,
  ANISO_STATUS_DOMAIN = 4,
  ANISO_STATUS_DIMENSION = 5,
  ANISO_STATUS_INVALID_ARGUMENT = 6,
  ANISO_STATUS_NOT_FOUND = 7,
  ANISO_STATUS_BUFFER_TOO_SMALL = 8,
  ANISO_STATUS_PANIC = 9,
} AnisoStatus;

/**
 * Verdict of a check report.
 */
typedef enum {
  ANISO_VERDICT_HOLDS = 0,
  ANISO_VERDICT_VIOLATED = 1,
  ANISO_VERDICT_INCONCLUSIVE = 2,
} AnisoVerdict;

/**
 * Extended-real function of `arity` variables.
 */
typedef struct AnisoFunction AnisoFunction;

/**
 * Legendre reference pair.
 */
typedef struct AnisoPair AnisoPair;

/**
 * Finite sampling plan.
 */
typedef struct AnisoPlan AnisoPlan;

/**
 * Result of a sampled check.
 */
typedef struct AnisoReport AnisoReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *aniso_version(void);

/**
 * Message of the most recent failure on this thread; empty after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *aniso_last_error(void);

/**
 * Releases a string returned by the library.
 *
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void aniso_string_free(char *s);

/**
 * Parses an expression in `x1..x<arity>`; `arity = 0` infers it from the expression.
 *
 * # Safety
 * `source` must be a NUL-terminated string; `out` must be writable.
 */
AnisoStatus aniso_function_parse(const char *source, size_t arity, AnisoFunction **out);

/**
 * # Safety
 * `f` must be null or a handle from [`aniso_function_parse`], not yet freed.
 */
void aniso_function_free(AnisoFunction *f);

/**
 * # Safety
 * `f` must be null or a valid handle.
 */
size_t aniso_function_arity(const AnisoFunction *f);

/**
 * Value at `x`; `+inf` outside the domain.
 *
 * # Safety
 * `x` must point to `n` doubles and `value` must be writable.
 */
AnisoStatus aniso_function_eval(const AnisoFunction *f, const double *x, size_t n, double *value);

/**
 * Gradient at a smooth point, written to `grad[0..n]`.
 *
 * # Safety
 * `x` and `grad` must point to `n` doubles.
 */
AnisoStatus aniso_function_gradient(const AnisoFunction *f,
                                    const double *x,
                                    size_t n,
                                    double *grad);

/**
 * Builds a reference pair from `name[:p1,p2,...]`; `dim = 0` uses the entry's default.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
AnisoStatus aniso_pair_new(const char *spec, size_t dim, AnisoPair **out);

/**
 * # Safety
 * `p` must be null or a handle from [`aniso_pair_new`], not yet freed.
 */
void aniso_pair_free(AnisoPair *p);

/**
 * # Safety
 * `p` must be null or a valid handle.
 */
size_t aniso_pair_dim(const AnisoPair *p);

/**
 * `φ(x)`.
 *
 * # Safety
 * `x` must point to `n` doubles; `out` must be writable.
 */
AnisoStatus aniso_pair_phi(const AnisoPair *p, const double *x, size_t n, double *out);

/**
 * `φ*(v)`.
 *
 * # Safety
 * `v` must point to `n` doubles; `out` must be writable.
 */
AnisoStatus aniso_pair_phi_star(const AnisoPair *p, const double *v, size_t n, double *out);

/**
 * `∇φ(x)` into `out[0..n]`.
 *
 * # Safety
 * `x` and `out` must point to `n` doubles.
 */
AnisoStatus aniso_pair_grad_phi(const AnisoPair *p, const double *x, size_t n, double *out);

/**
 * `∇φ*(v)` into `out[0..n]`.
 *
 * # Safety
 * `v` and `out` must point to `n` doubles.
 */
AnisoStatus aniso_pair_grad_phi_star(const AnisoPair *p, const double *v, size_t n, double *out);

/**
 * Bregman distance `D(x, y)`.
 *
 * # Safety
 * `x` and `y` must point to `n` doubles; `out` must be writable.
 */
AnisoStatus aniso_pair_bregman(const AnisoPair *p,
                               const double *x,
                               const double *y,
                               size_t n,
                               double *out);

/**
 * Tensor grid with `counts[i]` points on `[lower[i], upper[i]]`.
 *
 * # Safety
 * `lower`, `upper` and `counts` must point to `dim` elements; `out` must be writable.
 */
AnisoStatus aniso_plan_grid(const double *lower,
                            const double *upper,
                            const size_t *counts,
                            size_t dim,
                            AnisoPlan **out);

/**
 * `count` seeded uniform points in the box.
 *
 * # Safety
 * `lower` and `upper` must point to `dim` doubles; `out` must be writable.
 */
AnisoStatus aniso_plan_random(const double *lower,
                              const double *upper,
                              size_t dim,
                              size_t count,
                              uint64_t seed,
                              AnisoPlan **out);

/**
 * Explicit points, row-major `count × dim`.
 *
 * # Safety
 * `coords` must point to `count * dim` doubles; `out` must be writable.
 */
AnisoStatus aniso_plan_points(const double *coords, size_t count, size_t dim, AnisoPlan **out);

/**
 * # Safety
 * `p` must be null or a plan handle, not yet freed.
 */
void aniso_plan_free(AnisoPlan *p);

/**
 * # Safety
 * `p` must be null or a valid handle.
 */
size_t aniso_plan_len(const AnisoPlan *p);

/**
 * Tests `class` (an [`AnisoClass`] value) on `probes`. Anchors (anisotropic classes only) default to
 * the probes when `anchors` is null; `tolerance < 0` selects the default.
 * A nonzero `far_field` adds a coarse ring of far probes for the
 * anisotropic convexity classes.
 *
 * # Safety
 * Handles must be valid (or null where allowed); `out` must be writable.
 */
AnisoStatus aniso_check(const AnisoFunction *f,
                        const AnisoPair *pair,
                        int32_t class_,
                        const AnisoPlan *probes,
                        const AnisoPlan *anchors,
                        double tolerance,
                        int32_t far_field,
                        AnisoReport **out);

/**
 * # Safety
 * `r` must be null or a report handle, not yet freed.
 */
void aniso_report_free(AnisoReport *r);

/**
 * # Safety
 * `r` must be a valid handle; `out` must be writable.
 */
AnisoStatus aniso_report_verdict(const AnisoReport *r, AnisoVerdict *out);

/**
 * Worst margin (`+inf` when nothing was tested).
 *
 * # Safety
 * `r` must be null or a valid handle.
 */
double aniso_report_worst_margin(const AnisoReport *r);

/**
 * Copies the witness point into `point[0..capacity]` and writes its length to `len`.
 * Returns `NotFound` when the report has no witness and `BufferTooSmall` when
 * `capacity` is short (with `len` still set).
 *
 * # Safety
 * `point` must point to `capacity` doubles; `len` must be writable.
 */
AnisoStatus aniso_report_witness(const AnisoReport *r, double *point, size_t capacity, size_t *len);

/**
 * Report as JSON; release with [`aniso_string_free`].
 *
 * # Safety
 * `r` must be a valid handle; `out` must be writable.
 */
AnisoStatus aniso_report_to_json(const AnisoReport *r, char **out);

/**
 * Runs `x ← x − ∇φ*(∇f(x))` from `x[0..n]`, overwriting `x` with the final iterate.
 *
 * # Safety
 * `x` must point to `n` doubles; `iterations` and `status` must be writable.
 */
AnisoStatus aniso_descend(const AnisoFunction *f,
                          const AnisoPair *pair,
                          double *x,
                          size_t n,
                          size_t max_iter,
                          double stop_tol,
                          size_t *iterations,
                          AnisoDescentStatus *status);

/**
 * Runs a registered scenario and returns its JSON result; `passed` receives 1 or 0.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `json` and `passed` must be writable.
 */
AnisoStatus aniso_scenario_run(const char *name, char **json, int32_t *passed);

/**
 * Number of registered scenarios.
 */
size_t aniso_scenario_count(void);

/**
 * Static name of scenario `index`, or null when out of range.
 */
const char *aniso_scenario_name(size_t index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANISO_H */

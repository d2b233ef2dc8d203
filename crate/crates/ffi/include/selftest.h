#ifndef SELFTEST_H
#define SELFTEST_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SelftestStatus {
  SELFTEST_STATUS_OK = 0,
  SELFTEST_STATUS_NULL_POINTER = 1,
  SELFTEST_STATUS_INVALID_ARGUMENT = 2,
  SELFTEST_STATUS_NOT_SELF_TESTING = 3,
  SELFTEST_STATUS_NUMERICAL_FAILURE = 4,
  SELFTEST_STATUS_PANIC = 5,
} SelftestStatus;

typedef enum SelftestTag {
  SELFTEST_TAG_SELF_TESTING = 0,
  SELFTEST_TAG_DEGENERATE_LOCAL = 1,
  SELFTEST_TAG_NOT_ON_SINGLET_BOUNDARY = 2,
} SelftestTag;

typedef enum SelftestVariant {
  SELFTEST_VARIANT_DIRECT = 0,
  SELFTEST_VARIANT_ROTATED = 1,
} SelftestVariant;

/**
 * Built-in criteria. The `ALPHA01_*` presets are four-setting criteria at
 * `θ = π/2, α00 = π/4` with the named `α01`.
 */
typedef enum SelftestPreset {
  SELFTEST_PRESET_CHSH = 0,
  SELFTEST_PRESET_MAYERS_YAO = 1,
  SELFTEST_PRESET_ALPHA01_HALF_PI = 2,
  SELFTEST_PRESET_ALPHA01_SEVEN_PI_OVER12 = 3,
  SELFTEST_PRESET_ALPHA01_TWO_PI_OVER3 = 4,
} SelftestPreset;

typedef enum SelftestSolveStatus {
  SELFTEST_SOLVE_STATUS_OPTIMAL = 0,
  SELFTEST_SOLVE_STATUS_NEAR_OPTIMAL = 1,
  SELFTEST_SOLVE_STATUS_INFEASIBLE = 2,
  SELFTEST_SOLVE_STATUS_NUMERICAL_FAILURE = 3,
} SelftestSolveStatus;

/**
 * Opaque robustness criterion.
 */
typedef struct SelftestCriterion SelftestCriterion;

/**
 * Opaque correlation point.
 */
typedef struct SelftestPoint SelftestPoint;

/**
 * Outcome of [`selftest_classify`]. `condition_*` and `residual` are set
 * for self-testing points; `degenerate_case` is 1 to 7 for cases (i) to
 * (vii) and 0 otherwise.
 */
typedef struct SelftestClassification {
  enum SelftestTag tag;
  int32_t condition_i;
  int32_t condition_j;
  int32_t condition_xi;
  double residual;
  int32_t degenerate_case;
} SelftestClassification;

typedef struct SelftestBound {
  double epsilon;
  double bound;
  double primal;
  double gap;
  enum SelftestSolveStatus status;
} SelftestBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *selftest_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *selftest_version(void);

/**
 * Creates a point from correlators ordered `(E00, E01, E10, E11)`.
 *
 * # Safety
 * `e` must point to four readable doubles and `out` to a writable handle.
 */
enum SelftestStatus selftest_point_new(const double *e, struct SelftestPoint **out);

/**
 * Creates a point from angles `α_xy = acos E_xy` ordered `(α00, α01, α10, α11)`.
 *
 * # Safety
 * As for [`selftest_point_new`].
 */
enum SelftestStatus selftest_point_from_angles(const double *alpha, struct SelftestPoint **out);

/**
 * # Safety
 * `p` must be NULL or a handle from this library that has not been freed.
 */
void selftest_point_free(struct SelftestPoint *p);

/**
 * # Safety
 * `p` must be a live point handle and `out` writable.
 */
enum SelftestStatus selftest_classify(const struct SelftestPoint *p,
                                      double tol,
                                      struct SelftestClassification *out);

/**
 * # Safety
 * `p` must be a live point handle and `out` writable.
 */
enum SelftestStatus selftest_chsh_max(const struct SelftestPoint *p, double *out);

/**
 * Canonical angles `(α00, α01, α10, α11)` of a self-testing point after
 * relabeling.
 *
 * # Safety
 * `p` must be a live point handle and `alpha_out` must point to four
 * writable doubles.
 */
enum SelftestStatus selftest_canonical_angles(const struct SelftestPoint *p,
                                              double tol,
                                              double *alpha_out);

/**
 * Swap fidelity of the ideal qubit realization of canonical angles.
 *
 * # Safety
 * `alpha` must point to four readable doubles and `out` be writable.
 */
enum SelftestStatus selftest_ideal_fidelity(const double *alpha,
                                            enum SelftestVariant variant,
                                            double *out);

/**
 * Tangent XOR game of canonical angles: coefficients `(f00, f01, f10, f11)`
 * and its classical and quantum values. `classical` and `quantum` may be
 * NULL.
 *
 * # Safety
 * `alpha` must point to four readable doubles, `f_out` to four writable
 * doubles.
 */
enum SelftestStatus selftest_game(const double *alpha,
                                  double *f_out,
                                  double *classical,
                                  double *quantum);

/**
 * # Safety
 * `out` must be writable.
 */
enum SelftestStatus selftest_criterion_preset(enum SelftestPreset preset,
                                              struct SelftestCriterion **out);

/**
 * Four-setting criterion at canonical angles.
 *
 * # Safety
 * `alpha` must point to four readable doubles and `out` be writable.
 */
enum SelftestStatus selftest_criterion_from_angles(const double *alpha,
                                                   struct SelftestCriterion **out);

/**
 * # Safety
 * `c` must be NULL or a live criterion handle.
 */
void selftest_criterion_free(struct SelftestCriterion *c);

/**
 * Certified lower bound on the swap fidelity at imperfection `epsilon`.
 * A bound with solve status `NUMERICAL_FAILURE` is still valid, only
 * loose; the call then returns `SELFTEST_STATUS_OK` with that status set.
 *
 * # Safety
 * `c` must be a live criterion handle and `out` writable.
 */
enum SelftestStatus selftest_bound(const struct SelftestCriterion *c,
                                   double epsilon,
                                   struct SelftestBound *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SELFTEST_H */

#ifndef NOISY_RESPONSE_H
#define NOISY_RESPONSE_H

/* Generated by cbindgen from noisy-response-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum NrStatus {
  NR_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  NR_STATUS_NULL_ARGUMENT = 1,
  /**
   * Malformed JSON, bad UTF-8, or a violated precondition.
   */
  NR_STATUS_INVALID_ARGUMENT = 2,
  /**
   * An iterative solver ran out of budget.
   */
  NR_STATUS_NOT_CONVERGED = 3,
  /**
   * An operation defined on zero-average measures received mass.
   */
  NR_STATUS_NONZERO_MASS = 4,
  /**
   * An output buffer was too small.
   */
  NR_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  NR_STATUS_PANIC = 6,
} NrStatus;

/**
 * A piecewise-constant density on the system's grid.
 */
typedef struct NrDensity NrDensity;

/**
 * An assembled random dynamical system (map, kernel, grid, operators).
 */
typedef struct NrSystem NrSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Pointer to the message describing the most recent failure on this thread.
 * Valid until the next failing call on the same thread; never null.
 */
const char *nr_last_error_message(void);

/**
 * Build a system from a JSON description (see the crate docs for the
 * schema). The handle must be released with [`nr_system_free`].
 *
 * # Safety
 * `system_json` must be a valid NUL-terminated string; `out` must be a
 * valid pointer.
 */
enum NrStatus nr_system_new_from_json(const char *system_json, struct NrSystem **out);

/**
 * # Safety
 * `sys` must be a handle from [`nr_system_new_from_json`] or null.
 */
void nr_system_free(struct NrSystem *sys);

/**
 * Number of grid cells, or 0 for a null handle.
 *
 * # Safety
 * `sys` must be a valid handle or null.
 */
size_t nr_system_grid_n(const struct NrSystem *sys);

/**
 * Solve the stationary density by power iteration.
 *
 * # Safety
 * `sys` must be a valid handle; `out` a valid pointer.
 */
enum NrStatus nr_stationary_density(const struct NrSystem *sys,
                                    double tol,
                                    size_t max_iter,
                                    struct NrDensity **out);

/**
 * Upper-bound estimate of the zero-average contraction `‖Lⁿ|_V‖₁`.
 *
 * # Safety
 * `sys` must be a valid handle; `out` a valid pointer.
 */
enum NrStatus nr_mixing_upper_bound(const struct NrSystem *sys, size_t n_steps, double *out);

/**
 * Linear-response direction for a perturbation described by the CLI's
 * perturbation JSON (e.g. `{"kind": "noise"}` or
 * `{"kind": "map", "bump": {...}}`). The stationary density is solved
 * internally at the given tolerance.
 *
 * # Safety
 * `sys` and `perturbation_json` must be valid; `out` a valid pointer.
 */
enum NrStatus nr_linear_response(const struct NrSystem *sys,
                                 const char *perturbation_json,
                                 double tol,
                                 size_t max_iter,
                                 struct NrDensity **out);

/**
 * Seeded Monte Carlo histogram of the trajectory `x ← fold(T(x) + ω)`;
 * the L¹ distance to the operator stationary density lands in `distance`
 * when it is non-null.
 *
 * # Safety
 * `sys` must be a valid handle; `out` a valid pointer; `distance` may be
 * null.
 */
enum NrStatus nr_simulate_histogram(const struct NrSystem *sys,
                                    uint64_t seed,
                                    uint64_t samples,
                                    uint64_t burn_in,
                                    double tol,
                                    size_t max_iter,
                                    double *distance,
                                    struct NrDensity **out);

/**
 * Solve the linear-request problem for a zero-average target. On success
 * the recovered perturbation values at the `grid_n + 1` cell boundaries are
 * written to `s_values` (which must have capacity `grid_n + 1`), and the
 * Lipschitz constant and forward round-trip error are reported.
 *
 * # Safety
 * All pointers must be valid; `s_values` must have the stated capacity.
 */
enum NrStatus nr_solve_linear_request(const struct NrSystem *sys,
                                      const struct NrDensity *target,
                                      double ridge,
                                      double denominator_floor,
                                      double tol,
                                      size_t max_iter,
                                      double *s_values,
                                      size_t s_capacity,
                                      double *lipschitz,
                                      double *round_trip_error);

/**
 * Wrap a caller-provided value array (density units, `grid_n` entries) as a
 * density handle on a `cells`-cell grid.
 *
 * # Safety
 * `values` must point to `cells` doubles; `out` must be valid.
 */
enum NrStatus nr_density_new(const double *values, size_t cells, struct NrDensity **out);

/**
 * # Safety
 * `density` must be a density handle or null.
 */
void nr_density_free(struct NrDensity *density);

/**
 * Number of cells, or 0 for a null handle.
 *
 * # Safety
 * `density` must be a valid handle or null.
 */
size_t nr_density_len(const struct NrDensity *density);

/**
 * Copy the cell values (density units) into `out`.
 *
 * # Safety
 * `out` must have the given capacity.
 */
enum NrStatus nr_density_values(const struct NrDensity *density, double *out, size_t capacity);

/**
 * Total mass `h·Σ values`; NaN for a null handle.
 *
 * # Safety
 * `density` must be a valid handle or null.
 */
double nr_density_mass(const struct NrDensity *density);

/**
 * # Safety
 * `density` must be a valid handle or null.
 */
double nr_density_l1_norm(const struct NrDensity *density);

/**
 * Interior-jump variation of the step density.
 *
 * # Safety
 * `density` must be a valid handle or null.
 */
double nr_density_bv_variation(const struct NrDensity *density);

/**
 * Wasserstein–Kantorovich norm; fails with `NR_STATUS_NONZERO_MASS` unless
 * the density has zero average (gate 1e-10).
 *
 * # Safety
 * Pointers must be valid.
 */
enum NrStatus nr_density_wasserstein_norm(const struct NrDensity *density, double *out);

/**
 * `‖a - b‖₁`; the grids must match.
 *
 * # Safety
 * Pointers must be valid.
 */
enum NrStatus nr_density_l1_distance(const struct NrDensity *a,
                                     const struct NrDensity *b,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOISY_RESPONSE_H */

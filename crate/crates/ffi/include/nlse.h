#ifndef NLSE_H
#define NLSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * How shifts are computed.
 */
typedef enum NlseMethod {
  NLSE_METHOD_QUADRATURE = 0,
  NLSE_METHOD_MONTE_CARLO = 1,
  NLSE_METHOD_CLOSED_FORM = 2,
} NlseMethod;

/**
 * Status codes returned by every fallible function.
 */
typedef enum NlseStatus {
  NLSE_STATUS_OK = 0,
  NLSE_STATUS_NULL_POINTER = 1,
  /**
   * Bad input: quantum numbers, regulator, length scales, config keys.
   */
  NLSE_STATUS_VALIDATION = 2,
  /**
   * Quadrature or Monte Carlo failure.
   */
  NLSE_STATUS_NUMERICAL = 3,
  NLSE_STATUS_INVALID_UTF8 = 4,
  NLSE_STATUS_PANIC = 5,
} NlseStatus;

typedef enum NlseSystem {
  NLSE_SYSTEM_WELL = 0,
  NLSE_SYSTEM_OSCILLATOR = 1,
  NLSE_SYSTEM_HYDROGEN = 2,
} NlseSystem;

/**
 * Opaque run configuration.
 */
typedef struct NlseConfig NlseConfig;

/**
 * Opaque unperturbed eigenstate.
 */
typedef struct NlseState NlseState;

typedef struct NlseShift {
  double delta_e;
  double delta_e_dimensionless;
  double err_estimate;
  double err_dimensionless;
  enum NlseMethod method;
  uint64_t evaluations;
  uint32_t warnings;
} NlseShift;

typedef struct NlseFit {
  double exponent;
  double exponent_err;
  double coefficient;
  double coefficient_err;
  double r_squared;
  double sign;
  uint64_t n_points;
} NlseFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. Valid until the
 * next failing call on the same thread.
 */
const char *nlse_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nlse_version(void);

/**
 * Create a state. `l` and `m` are ignored for one-dimensional systems.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum NlseStatus nlse_state_new(enum NlseSystem system,
                               uint32_t n,
                               uint32_t l,
                               int32_t m,
                               double a,
                               struct NlseState **out);

/**
 * Evaluate shifted densities of a well state with the physical density
 * (zero outside the box) when `hard` is nonzero.
 *
 * # Safety
 * `state` must be a handle from [`nlse_state_new`].
 */
enum NlseStatus nlse_state_set_hard_walls(struct NlseState *state, int32_t hard);

/**
 * # Safety
 * `state` must be null or a handle from [`nlse_state_new`] not yet freed.
 */
void nlse_state_free(struct NlseState *state);

/**
 * Unperturbed energy of the state.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum NlseStatus nlse_state_energy(const struct NlseState *state, double *out);

/**
 * Create a configuration with default tolerances and seed.
 *
 * # Safety
 * `out` must be writable.
 */
enum NlseStatus nlse_config_new(struct NlseConfig **out);

/**
 * Set a configuration key such as `rel_tol`, `mc_samples` or `rng_seed`.
 *
 * # Safety
 * `config` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum NlseStatus nlse_config_set(struct NlseConfig *config, const char *key, const char *value);

/**
 * # Safety
 * `config` must be null or a live handle.
 */
void nlse_config_free(struct NlseConfig *config);

/**
 * First-order shift of the regularized nonlinearity with scale `length` and
 * regulator `eta`. A null `config` uses the defaults.
 *
 * # Safety
 * `state` must be a live handle, `config` null or live, `out` writable.
 */
enum NlseStatus nlse_delta_e(const struct NlseState *state,
                             double length,
                             double eta,
                             const struct NlseConfig *config,
                             struct NlseShift *out);

/**
 * Gross-Pitaevskii shift `g int p^2`.
 *
 * # Safety
 * As for [`nlse_delta_e`].
 */
enum NlseStatus nlse_delta_e_gp(const struct NlseState *state,
                                double g,
                                const struct NlseConfig *config,
                                struct NlseShift *out);

/**
 * Shift of the rescaled kinetic term, `eps <T>`.
 *
 * # Safety
 * As for [`nlse_delta_e`].
 */
enum NlseStatus nlse_delta_e_pseudo(const struct NlseState *state,
                                    double eps,
                                    const struct NlseConfig *config,
                                    struct NlseShift *out);

/**
 * Regulator value where the shift changes sign.
 *
 * # Safety
 * `state` live, `config` null or live, `out` writable.
 */
enum NlseStatus nlse_critical_eta(const struct NlseState *state,
                                  double length,
                                  const struct NlseConfig *config,
                                  double *out);

/**
 * Large-`alpha` node integral `J(eta)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum NlseStatus nlse_j_closed(double eta, double *out);

/**
 * Node-dominated prediction of the dimensionless shift of a 1D state.
 *
 * # Safety
 * `state` live, `out` writable.
 */
enum NlseStatus nlse_node_prediction(const struct NlseState *state,
                                     double length,
                                     double eta,
                                     double *out);

/**
 * Power-law fit of `|y| = c x^k` over `len` points.
 *
 * # Safety
 * `x` and `y` must point to `len` readable doubles; `out` writable.
 */
enum NlseStatus nlse_power_law_fit(const double *x,
                                   const double *y,
                                   size_t len,
                                   struct NlseFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLSE_H */

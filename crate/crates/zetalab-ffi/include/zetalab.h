#ifndef ZETALAB_H
#define ZETALAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define ZL_OK 0

/**
 * A required pointer argument was null.
 */
#define ZL_ERR_NULL -1

/**
 * An argument was outside the domain of the operation.
 */
#define ZL_ERR_DOMAIN -2

/**
 * A numerical procedure failed (overflow, non-convergence, LAPACK error).
 */
#define ZL_ERR_NUMERIC -3

/**
 * An output buffer was too small; the required length has been written.
 */
#define ZL_ERR_BUFFER -4

/**
 * An internal error was caught at the boundary.
 */
#define ZL_ERR_INTERNAL -5

/**
 * One sample of the circular β ensemble.
 */
typedef struct ZlCircular ZlCircular;

/**
 * A seeded Brownian driver for one replicate of the stochastic operator.
 */
typedef struct ZlDriver ZlDriver;

/**
 * A deterministic Dirac operator (sine or Bessel).
 */
typedef struct ZlOperator ZlOperator;

typedef struct ZlComplex {
  double re;
  double im;
} ZlComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *zl_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `cap` bytes) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `cap` writes.
 */
size_t zl_last_error(char *buf, size_t cap);

/**
 * Sine operator of length `sigma` with boundary parameter `q`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
int32_t zl_operator_new_sine(double sigma, double q, struct ZlOperator **out);

/**
 * Bessel operator of length `sigma` and index `alpha > 0`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
int32_t zl_operator_new_bessel(double sigma, double alpha, struct ZlOperator **out);

/**
 * Releases an operator. Null is ignored.
 *
 * # Safety
 * `op` must be null or a handle from `zl_operator_new_*` not yet freed.
 */
void zl_operator_free(struct ZlOperator *op);

/**
 * Secular function by the ODE route. `err_estimate` may be null.
 *
 * # Safety
 * `op` must be a live handle; `out` valid for one write; `err_estimate`
 * null or valid for one write.
 */
int32_t zl_zeta_ode(const struct ZlOperator *op,
                    struct ZlComplex z,
                    struct ZlComplex *out,
                    double *err_estimate);

/**
 * Secular function by its Taylor series with `n_max` coefficients, to
 * absolute tolerance `tol`.
 *
 * # Safety
 * As for `zl_zeta_ode`.
 */
int32_t zl_zeta_taylor(const struct ZlOperator *op,
                       size_t n_max,
                       double tol,
                       struct ZlComplex z,
                       struct ZlComplex *out,
                       double *err_estimate);

/**
 * Driver for replicate `replicate` of `seed` on [ν, 0] with step `h`,
 * where ν = (4/β) log `delta`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
int32_t zl_driver_new(uint64_t seed,
                      uint64_t replicate,
                      double beta,
                      double delta,
                      double h,
                      struct ZlDriver **out);

/**
 * Releases a driver. Null is ignored.
 *
 * # Safety
 * `d` must be null or a handle from `zl_driver_new` not yet freed.
 */
void zl_driver_free(struct ZlDriver *d);

/**
 * Samples ζ_ν at `n` points sharing the driver; writes ζ_ν(z_k) to
 * `zeta[k]`, ℰ_ν(z_k) to `e` when non-null, and the boundary parameter q.
 *
 * # Safety
 * `d` must be a live handle; `z` and `zeta` valid for `n` elements; `e`
 * null or valid for `n` writes; `q` valid for one write.
 */
int32_t zl_sample_zeta(const struct ZlDriver *d,
                       const struct ZlComplex *z,
                       size_t n,
                       struct ZlComplex *zeta,
                       struct ZlComplex *e,
                       double *q);

/**
 * Eigenvalues in [−r, r] of the driver's truncated operator, ascending.
 * On `ZL_ERR_BUFFER`, `len` holds the number needed.
 *
 * # Safety
 * `d` must be a live handle; `out` valid for `cap` writes; `len` for one.
 */
int32_t zl_sample_eigenvalues(const struct ZlDriver *d,
                              double r,
                              double *out,
                              size_t cap,
                              size_t *len);

/**
 * Circular β ensemble of size `n` from `seed`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
int32_t zl_circular_new(size_t n, double beta, uint64_t seed, struct ZlCircular **out);

/**
 * Releases a circular sample. Null is ignored.
 *
 * # Safety
 * `c` must be null or a handle from `zl_circular_new` not yet freed.
 */
void zl_circular_free(struct ZlCircular *c);

/**
 * ℰ_n(z) = p_n(e^{iz/n})e^{−iz/2}.
 *
 * # Safety
 * `c` must be a live handle and `out` valid for one write.
 */
int32_t zl_circular_char_poly(const struct ZlCircular *c,
                              struct ZlComplex z,
                              struct ZlComplex *out);

/**
 * Eigenangles in (0, 2π), ascending. On `ZL_ERR_BUFFER`, `len` holds the
 * number needed.
 *
 * # Safety
 * `c` must be a live handle; `out` valid for `cap` writes; `len` for one.
 */
int32_t zl_circular_eigenangles(const struct ZlCircular *c, double *out, size_t cap, size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZETALAB_H */

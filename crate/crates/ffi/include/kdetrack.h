#ifndef KDETRACK_H
#define KDETRACK_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  KDT_STATUS_OK = 0,
  KDT_STATUS_NULL_POINTER = 1,
  KDT_STATUS_DOMAIN = 2,
  KDT_STATUS_DIMENSION_MISMATCH = 3,
  KDT_STATUS_CONVERGENCE = 4,
  KDT_STATUS_DEGENERATE_BATCH = 5,
  KDT_STATUS_MISSING_TRUE_PARAMS = 6,
  KDT_STATUS_OUT_OF_ORDER = 7,
  KDT_STATUS_IO = 8,
  KDT_STATUS_PARSE = 9,
  KDT_STATUS_BUFFER_TOO_SMALL = 10,
  KDT_STATUS_PANIC = 11,
} KdtStatus;

typedef enum {
  KDT_SCHEME_CURRENT = 0,
  KDT_SCHEME_AVERAGE = 1,
  KDT_SCHEME_EXPONENTIAL = 2,
  KDT_SCHEME_DYNAMIC = 3,
} KdtScheme;

typedef enum {
  KDT_PARAM_MODE_ORACLE = 0,
  KDT_PARAM_MODE_PLUGIN = 1,
} KdtParamMode;

// Opaque MISE quadratic form for one window and target.
typedef struct KdtComponents KdtComponents;

// Opaque sliding-window tracker.
typedef struct KdtTracker KdtTracker;

// Solver diagnostics filled by [`kdt_components_solve`].
typedef struct {
  double objective;
  double kkt_residual;
  uint64_t iterations;
} KdtSolveInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `cap` bytes). Returns the full message length excluding the
// terminator, or 0 if there is none.
uintptr_t kdt_last_error_message(char *buf, uintptr_t cap);

// Library version as a static NUL-terminated string.
const char *kdt_version(void);

KdtStatus kdt_phi(double scale, double z, double *out);

// Closed-form ISE between the mixture `sum_k weights[k] N(means[k], sigmas[k]^2)`
// and `N(target_mu, target_sigma^2)`.
KdtStatus kdt_closed_form_ise(const double *weights,
                              const double *means,
                              const double *sigmas,
                              uintptr_t len,
                              double target_mu,
                              double target_sigma,
                              double *out);

// Writes `len` weights of the requested baseline scheme into `out`.
// `beta` is only read for the exponential scheme; the dynamic scheme
// needs MISE components and is rejected here.
KdtStatus kdt_baseline_weights(KdtScheme scheme, uintptr_t len, double beta, double *out);

KdtStatus kdt_project_to_simplex(const double *v, uintptr_t len, double *out);

// Builds the MISE quadratic form for `len` batches given as parallel
// arrays of means, standard deviations and sample counts.
KdtStatus kdt_components_new(const double *means,
                             const double *gammas,
                             const uint64_t *counts,
                             uintptr_t len,
                             double target_mu,
                             double target_sigma,
                             double bandwidth,
                             KdtComponents **out);

void kdt_components_free(KdtComponents *c);

uintptr_t kdt_components_len(const KdtComponents *c);

// Exact MISE at weights `alpha` (length must equal the window length).
KdtStatus kdt_components_exact_mise(const KdtComponents *c,
                                    const double *alpha,
                                    uintptr_t len,
                                    double *out);

// Integrated squared bias at `alpha`.
KdtStatus kdt_components_ib_squared(const KdtComponents *c,
                                    const double *alpha,
                                    uintptr_t len,
                                    double *out);

// Integrated variance at `alpha`.
KdtStatus kdt_components_iv(const KdtComponents *c,
                            const double *alpha,
                            uintptr_t len,
                            double *out);

// Solves for the MISE-optimal weights. `alpha_out` must hold at least the
// window length; `info` may be NULL.
KdtStatus kdt_components_solve(const KdtComponents *c,
                               double *alpha_out,
                               uintptr_t cap,
                               KdtSolveInfo *info);

KdtStatus kdt_tracker_new(uintptr_t window,
                          double bandwidth,
                          KdtScheme scheme,
                          double beta,
                          KdtParamMode mode,
                          KdtTracker **out);

void kdt_tracker_free(KdtTracker *t);

// Number of batches currently in the window.
uintptr_t kdt_tracker_len(const KdtTracker *t);

// Pushes batch `t` with `n` samples. When `has_true_params` is nonzero,
// `true_mu`/`true_sigma` are attached (required in oracle mode).
KdtStatus kdt_tracker_push(KdtTracker *tracker,
                           uint64_t t,
                           const double *values,
                           uintptr_t n,
                           int32_t has_true_params,
                           double true_mu,
                           double true_sigma);

// Weights of the configured scheme against the tracker's default target.
// Writes the window length to `written`.
KdtStatus kdt_tracker_weights(const KdtTracker *tracker,
                              double *out,
                              uintptr_t cap,
                              uintptr_t *written);

// Evaluates the weighted estimator at `x`.
KdtStatus kdt_tracker_estimate_density(const KdtTracker *tracker,
                                       const double *alpha,
                                       uintptr_t len,
                                       double x,
                                       double *out);

// Closed-form ISE of the realized estimator against `N(target_mu, target_sigma^2)`.
KdtStatus kdt_tracker_ise(const KdtTracker *tracker,
                          const double *alpha,
                          uintptr_t len,
                          double target_mu,
                          double target_sigma,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KDETRACK_H */

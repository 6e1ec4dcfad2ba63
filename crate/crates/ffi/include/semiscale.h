#ifndef SEMISCALE_H
#define SEMISCALE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes. Values 2 to 4 match the CLI exit codes.
 */
typedef enum SemiscaleStatus {
  SEMISCALE_STATUS_OK = 0,
  SEMISCALE_STATUS_NULL_POINTER = 1,
  SEMISCALE_STATUS_DOMAIN = 2,
  SEMISCALE_STATUS_DEGENERATE = 3,
  SEMISCALE_STATUS_IO = 4,
  SEMISCALE_STATUS_PANIC = 5,
} SemiscaleStatus;

typedef enum SemiscaleHurstMethod {
  /*
   Order-1 ratio, switching to order 2 when the estimate is at least 0.75.
   */
  SEMISCALE_HURST_METHOD_AUTO = 0,
  SEMISCALE_HURST_METHOD_RATIO1 = 1,
  SEMISCALE_HURST_METHOD_RATIO2 = 2,
  SEMISCALE_HURST_METHOD_QUADRATIC_VARIATION = 3,
} SemiscaleHurstMethod;

/*
 Opaque time series handle.
 */
typedef struct SemiscaleSeries SemiscaleSeries;

/*
 Scale-stage summary from `semiscale_estimate_scale`.
 */
typedef struct SemiscaleScaleResult {
  double lambda0;
  double lambda_star;
  double mu_bar_star;
  double h_minus_hprime;
  size_t j_used;
  /*
   Non-zero when the refinement objective was flat.
   */
  int32_t degenerate;
} SemiscaleScaleResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *semiscale_last_error(void);

/*
 Copy `len` samples into a new series. Times must be strictly increasing.

 # Safety
 `times` and `values` must point to `len` readable doubles; `out` must be writable.
 */
enum SemiscaleStatus semiscale_series_new(const double *times,
                                          const double *values,
                                          size_t len,
                                          struct SemiscaleSeries **out);

/*
 Simulate simple fBm on the uniform grid `1, 1 + h, …, end` with `steps` steps.

 # Safety
 `out` must be writable.
 */
enum SemiscaleStatus semiscale_simulate_sfbm(double lambda,
                                             double hurst,
                                             double hurst_prime,
                                             size_t steps,
                                             double end,
                                             uint64_t seed,
                                             struct SemiscaleSeries **out);

/*
 Number of samples; 0 for a null handle.

 # Safety
 `series` must be null or a live handle.
 */
size_t semiscale_series_len(const struct SemiscaleSeries *series);

/*
 Copy up to `capacity` times and values out; either destination may be null.

 # Safety
 `series` must be a live handle; non-null destinations must hold `capacity` doubles.
 */
enum SemiscaleStatus semiscale_series_copy(const struct SemiscaleSeries *series,
                                           double *times_out,
                                           double *values_out,
                                           size_t capacity);

/*
 Release a handle. Null is ignored.

 # Safety
 `series` must be null or a handle not yet freed.
 */
void semiscale_series_free(struct SemiscaleSeries *series);

/*
 Run the scale stage with default settings.

 # Safety
 `series` must be a live handle and `out` writable.
 */
enum SemiscaleStatus semiscale_estimate_scale(const struct SemiscaleSeries *series,
                                              struct SemiscaleScaleResult *out);

/*
 Divide samples in `[λ^{k−1}, λ^k)` by `λ^{(k−1)·h_gap}` into a new series.

 # Safety
 `series` must be a live handle and `out` writable.
 */
enum SemiscaleStatus semiscale_rescale_to_fbm(const struct SemiscaleSeries *series,
                                              double lambda_star,
                                              double h_gap,
                                              struct SemiscaleSeries **out);

/*
 Hurst index of `len` equally spaced samples.

 # Safety
 `values` must point to `len` readable doubles; `out` must be writable.
 */
enum SemiscaleStatus semiscale_estimate_hurst(const double *values,
                                              size_t len,
                                              enum SemiscaleHurstMethod method,
                                              size_t k_max,
                                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMISCALE_H */

/* C interface of the waveguide PINN solver. */

#ifndef WGPINN_H
#define WGPINN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every API call.
 */
typedef enum WgpinnStatus {
  WGPINN_OK = 0,
  WGPINN_NULL_ARGUMENT = 1,
  WGPINN_INVALID_UTF8 = 2,
  WGPINN_IO_ERROR = 3,
  WGPINN_PARSE_ERROR = 4,
  WGPINN_CONTRACT_VIOLATION = 5,
  WGPINN_NUMERIC_FAILURE = 6,
  /**
   * The checkpoint has no problem block, so the reconstructed field is
   * undefined (raw network evaluation still works).
   */
  WGPINN_MISSING_PROBLEM = 7,
  WGPINN_VERIFICATION_FAILED = 8,
  WGPINN_INTERNAL_ERROR = 9,
} WgpinnStatus;

/**
 * Opaque trained-model handle.
 */
typedef struct WgpinnModel WgpinnModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads a checkpoint file into a model handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer. On
 * success `*out` owns the model and must be released with
 * [`wgpinn_model_free`].
 */
enum WgpinnStatus wgpinn_model_load(const char *path, struct WgpinnModel **out);

/**
 * Releases a model handle. NULL is a no-op.
 *
 * # Safety
 * `model` must have been produced by [`wgpinn_model_load`] and not freed
 * before.
 */
void wgpinn_model_free(struct WgpinnModel *model);

/**
 * Raw network output at `(x, z)`.
 *
 * # Safety
 * All pointers must be valid; `model` must be a live handle.
 */
enum WgpinnStatus wgpinn_model_eval(const struct WgpinnModel *model,
                                    double x,
                                    double z,
                                    double *re,
                                    double *im);

/**
 * Reconstructed solution at `(x, z)`; for a taper-formulation model the
 * tapered incoming wave is added back. Requires the checkpoint's problem
 * block.
 *
 * # Safety
 * All pointers must be valid; `model` must be a live handle.
 */
enum WgpinnStatus wgpinn_model_eval_field(const struct WgpinnModel *model,
                                          double x,
                                          double z,
                                          double *re,
                                          double *im);

/**
 * Wave number stored in the model's problem block, or NaN when absent.
 *
 * # Safety
 * `model` must be a live handle or NULL.
 */
double wgpinn_model_wave_number(const struct WgpinnModel *model);

/**
 * Runs one training configuration end to end; artifacts land in the
 * config's output directory.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string.
 */
enum WgpinnStatus wgpinn_run_config(const char *config_path);

/**
 * Runs the built-in verification suite for wave number `k` on the
 * half-length-`b` junction.
 */
enum WgpinnStatus wgpinn_verify(double k, double b);

/**
 * Static name of a status code (never NULL; does not allocate).
 */
const char *wgpinn_status_name(enum WgpinnStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WGPINN_H */

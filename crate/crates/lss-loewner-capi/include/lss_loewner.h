#ifndef LSS_LOEWNER_H
#define LSS_LOEWNER_H

/* Generated by cbindgen from lss-loewner-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by fallible operations.
 */
typedef enum LssStatus {
  LSS_STATUS_OK = 0,
  /**
   * A pointer argument was null or an index was out of range.
   */
  LSS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Input text failed to parse or violated the model contract.
   */
  LSS_STATUS_PARSE_ERROR = 2,
  /**
   * A numerical precondition failed (singular pencil, unstable mode, ...).
   */
  LSS_STATUS_NUMERICAL_ERROR = 3,
} LssStatus;

/**
 * Opaque switched-system model.
 */
typedef struct LssModelHandle LssModelHandle;

/**
 * Opaque simulation result.
 */
typedef struct LssTrajectoryHandle LssTrajectoryHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. Never null; empty when
 * no failure happened yet. Valid until the next failing call on this thread.
 */
const char *lss_last_error_message(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void lss_string_free(char *s);

/**
 * Parses a model from the JSON contract. NULL on failure.
 *
 * # Safety
 * `json` must point to a NUL-terminated string.
 */
struct LssModelHandle *lss_model_from_json(const char *json);

/**
 * Serializes the model back to JSON; free with [`lss_string_free`].
 *
 * # Safety
 * `model` must be a live handle from this library.
 */
char *lss_model_to_json(const struct LssModelHandle *model);

/**
 * # Safety
 * `model` must be a live handle from this library; it is consumed.
 */
void lss_model_free(struct LssModelHandle *model);

/**
 * Number of modes; 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uint32_t lss_model_num_modes(const struct LssModelHandle *model);

/**
 * State dimension of 1-based `mode`; 0 when out of range.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uint32_t lss_model_dim(const struct LssModelHandle *model, uint32_t mode);

/**
 * Count of structural-invariant violations; when nonzero, the joined
 * descriptions are available through [`lss_last_error_message`].
 *
 * # Safety
 * `model` must be a live handle.
 */
uint32_t lss_model_validate(const struct LssModelHandle *model);

/**
 * Evaluates a generalized transfer-function value for the word given by
 * 1-based `modes[0..len]` and points `re/im[0..len]`.
 *
 * # Safety
 * All pointers must reference `len` valid elements; outputs must be writable.
 */
enum LssStatus lss_eval_transfer(const struct LssModelHandle *model,
                                 const uint32_t *modes,
                                 uintptr_t len,
                                 const double *re,
                                 const double *im,
                                 double *out_re,
                                 double *out_im);

/**
 * Frequency response of one mode at `s = i omega` over `omega[0..n]`.
 *
 * # Safety
 * All pointers must reference `n` valid (writable, for outputs) elements.
 */
enum LssStatus lss_freq_response(const struct LssModelHandle *model,
                                 uint32_t mode,
                                 const double *omega,
                                 uintptr_t n,
                                 double *out_re,
                                 double *out_im);

/**
 * Loewner reduction driven by a tuple-spec JSON (same schema as the CLI).
 * `tol` is the relative truncation tolerance; pass `exact != 0` for the
 * square realization and `realify != 0` to apply the conjugate-pair
 * transform first. NULL on failure.
 *
 * # Safety
 * `model` must be a live handle and `tuples_json` a NUL-terminated string.
 */
struct LssModelHandle *lss_loewner_reduce(const struct LssModelHandle *model,
                                          const char *tuples_json,
                                          double tol,
                                          int32_t exact,
                                          int32_t realify);

/**
 * Balanced truncation at the given order. NULL on failure.
 *
 * # Safety
 * `model` must be a live handle.
 */
struct LssModelHandle *lss_bt_reduce(const struct LssModelHandle *model, uint32_t order);

/**
 * Integrates the switched system from zero state. `modes`/`durations` hold
 * `n_events` dwell intervals; `input_spec` follows the CLI grammar (`zero`,
 * `step:A`, `sin:A,F`). NULL on failure.
 *
 * # Safety
 * Array arguments must reference `n_events` valid elements; `input_spec`
 * must be NUL-terminated.
 */
struct LssTrajectoryHandle *lss_simulate(const struct LssModelHandle *model,
                                         const uint32_t *modes,
                                         const double *durations,
                                         uintptr_t n_events,
                                         const char *input_spec,
                                         double max_step);

/**
 * Number of samples in a trajectory.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
uintptr_t lss_trajectory_len(const struct LssTrajectoryHandle *traj);

/**
 * Borrowed pointer to the time grid; valid while the handle lives.
 *
 * # Safety
 * `traj` must be a live handle.
 */
const double *lss_trajectory_times(const struct LssTrajectoryHandle *traj);

/**
 * Borrowed pointer to the first output channel; valid while the handle lives.
 *
 * # Safety
 * `traj` must be a live handle.
 */
const double *lss_trajectory_outputs(const struct LssTrajectoryHandle *traj);

/**
 * Borrowed pointer to the active-mode annotation; valid while the handle lives.
 *
 * # Safety
 * `traj` must be a live handle.
 */
const uint32_t *lss_trajectory_modes(const struct LssTrajectoryHandle *traj);

/**
 * # Safety
 * `traj` must be a live handle from this library; it is consumed.
 */
void lss_trajectory_free(struct LssTrajectoryHandle *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LSS_LOEWNER_H */

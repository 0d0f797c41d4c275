#ifndef PALS_H
#define PALS_H

/* Generated by cbindgen from the pals-ffi crate. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum PalsStatus {
  /**
   * Success.
   */
  PALS_STATUS_OK = 0,
  /**
   * Null pointer, malformed UTF-8, or an unknown name.
   */
  PALS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Integration left the physically sane region.
   */
  PALS_STATUS_NUMERICAL_DIVERGENCE = 3,
  /**
   * Bad parameter file or an operation precondition not met.
   */
  PALS_STATUS_CONFIG_ERROR = 4,
  /**
   * Calibration sweep or least-squares fit failed.
   */
  PALS_STATUS_CALIBRATION_FAILED = 5,
  /**
   * File could not be read, written, or parsed.
   */
  PALS_STATUS_IO_ERROR = 6,
  /**
   * Unexpected internal failure; the handle stays usable.
   */
  PALS_STATUS_INTERNAL = 7,
} PalsStatus;

/**
 * Opaque simulator handle. Create with `pals_sim_new`, destroy with
 * `pals_sim_free`.
 */
typedef struct PalsSim PalsSim;

/**
 * Maneuver knobs. Any field at or below zero keeps its default.
 */
typedef struct PalsRunOptions {
  /**
   * Fishhook entrance speed [mph].
   */
  double mes_mph;
  /**
   * Sinusoid steer frequency [Hz].
   */
  double frequency_hz;
  /**
   * Sinusoid steering-wheel amplitude [deg].
   */
  double amplitude_deg;
  /**
   * Steady-cornering duration factor (1.0 = full-length ramp).
   */
  double scale;
} PalsRunOptions;

/**
 * Per-run scalar summary. Times in seconds, angles in radians.
 */
typedef struct PalsRunReport {
  double rms_roll;
  double rms_pitch;
  double peak_roll;
  double peak_pitch;
  /**
   * Roll settling time; negative when the run never settles.
   */
  double settling_time;
  /**
   * First rollover-threshold crossing; negative when none.
   */
  double rollover_time;
  /**
   * Number of detected two-wheel-lift episodes.
   */
  uint32_t two_wheel_lift_count;
  /**
   * Episodes whose lifted side regained contact before the run ended.
   */
  uint32_t closed_lift_count;
  /**
   * True when the run was cut short at the roll hard limit.
   */
  bool truncated;
} PalsRunReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *pals_version(void);

/**
 * Creates a simulator from a TOML parameter file, or from built-in
 * defaults when `config_path` is null. On failure `*out` is null.
 *
 * # Safety
 * `out` must be a valid pointer; `config_path` must be null or a valid
 * nul-terminated string.
 */
enum PalsStatus pals_sim_new(const char *config_path, struct PalsSim **out);

/**
 * Destroys a handle. Null is a no-op.
 *
 * # Safety
 * `sim` must be null or a pointer from `pals_sim_new` not yet freed.
 */
void pals_sim_free(struct PalsSim *sim);

/**
 * Message for the most recent failure on this handle; empty when the
 * last call succeeded. Valid until the next call on the handle.
 *
 * # Safety
 * `sim` must be a live handle.
 */
const char *pals_sim_last_error(const struct PalsSim *sim);

/**
 * Runs the calibration sweeps and stores the fitted compensation
 * coefficients in the handle for subsequent feedforward runs.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum PalsStatus pals_sim_calibrate(struct PalsSim *sim);

/**
 * Loads compensation coefficients from a file written by
 * `pals_sim_save_coefficients` or the CLI's fit command.
 *
 * # Safety
 * `sim` must be a live handle; `path` a valid nul-terminated string.
 */
enum PalsStatus pals_sim_load_coefficients(struct PalsSim *sim, const char *path);

/**
 * Writes the handle's coefficients to a file.
 *
 * # Safety
 * `sim` must be a live handle; `path` a valid nul-terminated string.
 */
enum PalsStatus pals_sim_save_coefficients(struct PalsSim *sim, const char *path);

/**
 * Simulates one maneuver under one controller.
 *
 * `maneuver` is one of `step-steer`, `steady-cornering`, `brake-in-turn`,
 * `accel-brake`, `fishhook`, `sinusoid`; `controller` is `passive`,
 * `pals-pid`, or `ff-pid-non` (which requires coefficients). `options`
 * may be null for defaults. When `telemetry_csv_path` is non-null the
 * decimated telemetry is written there. When `report` is non-null it is
 * filled with the run summary.
 *
 * # Safety
 * `sim` must be a live handle; string arguments must be null or valid
 * nul-terminated strings; `options` and `report` null or valid.
 */
enum PalsStatus pals_sim_run(struct PalsSim *sim,
                             const char *maneuver,
                             const char *controller,
                             const struct PalsRunOptions *options,
                             const char *telemetry_csv_path,
                             struct PalsRunReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PALS_H */

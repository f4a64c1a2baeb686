/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef ZZLAB_H
#define ZZLAB_H

#include <stddef.h>
#include <stdint.h>

#define ZZ_GATE_CZ 0

#define ZZ_GATE_ISWAP 1

// Partial swap; `angle` is θ.
#define ZZ_GATE_XY 2

// Controlled phase; `angle` is φ.
#define ZZ_GATE_CPHASE 3

#define ZZ_OBJECTIVE_LEAKAGE 0

#define ZZ_OBJECTIVE_INFIDELITY 1

// Result code of every fallible call.
typedef enum ZzStatus {
  ZZ_STATUS_OK = 0,
  // A required pointer argument was null.
  ZZ_STATUS_NULL_POINTER = 1,
  // Out-of-range parameter, dimension, grid or gate code.
  ZZ_STATUS_INVALID_ARGUMENT = 2,
  // A closed-form expression hit a pole.
  ZZ_STATUS_SINGULAR = 3,
  // Propagation or frame construction failed numerically.
  ZZ_STATUS_NUMERICAL = 4,
  // The calibration search found no usable point.
  ZZ_STATUS_CALIBRATION_FAILED = 5,
  // A Rust panic was caught at the boundary.
  ZZ_STATUS_PANIC = 6,
} ZzStatus;

// Opaque device handle.
typedef struct ZzDevice ZzDevice;

// One transmon-like mode.
typedef struct ZzMode {
  double freq_ghz;
  double anharm_mhz;
  uint32_t levels;
} ZzMode;

// Gate selector. `angle` is read only for `ZZ_GATE_XY` and `ZZ_GATE_CPHASE`.
typedef struct ZzGate {
  uint32_t kind;
  double angle;
} ZzGate;

// Flat-top flux pulse on mode a.
typedef struct ZzPulse {
  double parking_ghz;
  double interaction_ghz;
  double overshoot_mhz;
  double hold_ns;
  double ramp_ns;
  double time_step_ns;
  double padding_ns;
} ZzPulse;

typedef struct ZzGateMetrics {
  double fidelity;
  double eps_leak;
  double eps_swap;
  double theta;
  double phi;
  double delta_theta;
  double delta_phi;
  double virtual_z_a;
  double virtual_z_b;
} ZzGateMetrics;

// Hold-time grid and overshoot search bounds for `zz_calibrate_gate`.
typedef struct ZzCalibrationSettings {
  double hold_min_ns;
  double hold_max_ns;
  double hold_step_ns;
  double overshoot_min_mhz;
  double overshoot_max_mhz;
  uint32_t objective;
} ZzCalibrationSettings;

typedef struct ZzCalibration {
  double hold_ns;
  double overshoot_mhz;
  double objective_value;
  struct ZzGateMetrics metrics;
} ZzCalibration;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a device with a direct exchange coupling `g_mhz`.
//
// # Safety
// `mode_a` and `mode_b` must be null or valid; `out_device` must be null or
// writable. On success `*out_device` owns a handle for `zz_device_free`.
enum ZzStatus zz_device_new_direct(const struct ZzMode *mode_a,
                                   const struct ZzMode *mode_b,
                                   double g_mhz,
                                   struct ZzDevice **out_device);

// Creates a device whose modes both couple to a bus resonator.
//
// # Safety
// Same contract as `zz_device_new_direct`.
enum ZzStatus zz_device_new_resonator(const struct ZzMode *mode_a,
                                      const struct ZzMode *mode_b,
                                      double resonator_ghz,
                                      double g_a_mhz,
                                      double g_b_mhz,
                                      uint32_t resonator_levels,
                                      struct ZzDevice **out_device);

// Releases a device. Null is a no-op.
//
// # Safety
// `device` must be null or a handle from `zz_device_new_*` not yet freed.
void zz_device_free(struct ZzDevice *device);

// Dimension of the device Hilbert space.
//
// # Safety
// `device` must be null or a live handle; `out_dim` null or writable.
enum ZzStatus zz_device_dimension(const struct ZzDevice *device, uintptr_t *out_dim);

// ZZ rate in MHz from exact diagonalization. `out_degenerate` may be null;
// otherwise it receives 1 when the labeling near |11> is ambiguous.
//
// # Safety
// `device` must be null or a live handle; output pointers null or writable.
enum ZzStatus zz_zeta_numeric(const struct ZzDevice *device,
                              double *out_zeta_mhz,
                              int32_t *out_degenerate);

// Fourth-order closed-form ZZ rate of a directly coupled pair, all in MHz.
// Returns `ZzStatus::Singular` at a pole.
//
// # Safety
// `out_zeta_mhz` must be null or writable.
enum ZzStatus zz_zeta_analytic(double delta_mhz,
                               double alpha_a_mhz,
                               double alpha_b_mhz,
                               double g_mhz,
                               double *out_zeta_mhz);

// Second-order perturbative ZZ rate, all in MHz.
//
// # Safety
// `out_zeta_mhz` must be null or writable.
enum ZzStatus zz_zeta_perturbative(double delta_mhz,
                                   double alpha_a_mhz,
                                   double alpha_b_mhz,
                                   double g_mhz,
                                   double *out_zeta_mhz);

// Fills `out_pulse` with default ramp, time step and padding for `gate`,
// parked at mode a's frequency and targeting the gate's resonance.
//
// # Safety
// `device` and `gate` must be null or valid; `out_pulse` null or writable.
enum ZzStatus zz_pulse_default(const struct ZzDevice *device,
                               const struct ZzGate *gate,
                               double hold_ns,
                               struct ZzPulse *out_pulse);

// Propagates `pulse` on `device` and scores the result against `gate`.
//
// # Safety
// Pointer arguments must be null or valid; `out_metrics` null or writable.
enum ZzStatus zz_simulate_gate(const struct ZzDevice *device,
                               const struct ZzPulse *pulse,
                               const struct ZzGate *gate,
                               struct ZzGateMetrics *out_metrics);

// Scans the hold grid, optimizing the overshoot at each hold, and returns the
// best point. Ramp, time step and padding take their defaults.
//
// # Safety
// Pointer arguments must be null or valid; `out_result` null or writable.
enum ZzStatus zz_calibrate_gate(const struct ZzDevice *device,
                                const struct ZzGate *gate,
                                const struct ZzCalibrationSettings *settings,
                                struct ZzCalibration *out_result);

// Message of the most recent failure on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *zz_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *zz_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZZLAB_H */

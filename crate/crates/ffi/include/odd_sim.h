#ifndef ODD_SIM_H
#define ODD_SIM_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OddStatus {
  ODD_STATUS_OK = 0,
  ODD_STATUS_NULL_POINTER = 1,
  ODD_STATUS_INVALID_ARGUMENT = 2,
  ODD_STATUS_NON_POSITIVE_SPACING = 3,
  ODD_STATUS_SLIP_INCONSISTENCY = 4,
  ODD_STATUS_NON_POSITIVE_MASS = 5,
  ODD_STATUS_SPACING_OUT_OF_RANGE = 6,
  ODD_STATUS_DEGENERATE_ROLLER = 7,
  ODD_STATUS_SINGULAR_CONFIGURATION = 8,
  ODD_STATUS_INVALID_GEOMETRY = 9,
  ODD_STATUS_NON_POSITIVE_DT = 10,
  ODD_STATUS_BAD_WHEEL_INDEX = 11,
  ODD_STATUS_INVALID_GAINS = 12,
  ODD_STATUS_MODE_MISMATCH = 13,
  ODD_STATUS_UNKNOWN_SCRIPT = 14,
  ODD_STATUS_EMPTY_SCRIPT = 15,
  ODD_STATUS_EMPTY_LOG = 16,
  ODD_STATUS_CONFIG = 17,
  ODD_STATUS_IO = 18,
  ODD_STATUS_MALFORMED_MESSAGE = 19,
  ODD_STATUS_PORT_UNAVAILABLE = 20,
  ODD_STATUS_DRIVER_SLOT_BUSY = 21,
  ODD_STATUS_PANIC = 99,
} OddStatus;

// Closed-loop simulator handle.
typedef struct OddSession OddSession;

typedef struct OddGroupRates {
  double x_dot_left;
  double y_dot_left;
  double x_dot_right;
  double y_dot_right;
} OddGroupRates;

// Body-frame rates `(ẋ, ẏ, φ̇, ḋ)`.
typedef struct OddRate {
  double x_dot;
  double y_dot;
  double phi_dot;
  double d_dot;
} OddRate;

// Roller angles in radians, wheels 1 to 4.
typedef struct OddRigGeometry {
  double wheel_radius;
  double group_width;
  double roller_angles[4];
  double d_min;
  double d_max;
} OddRigGeometry;

typedef struct OddState {
  double t;
  double x;
  double y;
  double phi;
  double d;
  double pitch;
  struct OddRate rate;
  double wheel_speeds[4];
} OddState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or an empty string. Valid
// until the next call into this library from the same thread.
const char *odd_last_error_message(void);

// Stable name of a status code.
const char *odd_status_name(enum OddStatus status);

// Differential drive: wheel-group speeds to `(ẋ, φ̇)`.
//
// # Safety
// Output pointers must be null or valid for writes.
enum OddStatus odd_dd_forward(double x_dot_left,
                              double x_dot_right,
                              double d,
                              double *out_x_dot,
                              double *out_phi_dot);

// # Safety
// Pointers must be null or valid.
enum OddStatus odd_odd_forward(const struct OddGroupRates *groups, double d, struct OddRate *out);

// # Safety
// Pointers must be null or valid.
enum OddStatus odd_odd_inverse(const struct OddRate *rate, double d, struct OddGroupRates *out);

// # Safety
// `out` must be null or valid for writes.
enum OddStatus odd_rig_default(struct OddRigGeometry *out);

// Wheel speeds (rad/s) realizing `rate` at spacing `d`.
//
// # Safety
// `out_wheels` must be null or point to four writable doubles.
enum OddStatus odd_mecanum_inverse(const struct OddRigGeometry *geom,
                                   double d,
                                   const struct OddRate *rate,
                                   double *out_wheels);

// Body rates produced by four wheel speeds.
//
// # Safety
// `wheels` must be null or point to four readable doubles.
enum OddStatus odd_mecanum_forward(const struct OddRigGeometry *geom,
                                   double d,
                                   const double *wheels,
                                   struct OddRate *out);

// Creates a closed-loop session from a config file, or the defaults when
// `config_path` is null.
//
// # Safety
// `config_path` must be null or a NUL-terminated string; `out` must be valid.
enum OddStatus odd_session_new(const char *config_path, struct OddSession **out);

// Releases a session. Null is accepted.
//
// # Safety
// `session` must come from [`odd_session_new`] and not be used afterwards.
void odd_session_free(struct OddSession *session);

// Advances one step with the operator command `cmd`.
//
// # Safety
// Pointers must be null or valid.
enum OddStatus odd_session_tick(struct OddSession *session, const struct OddRate *cmd);

// # Safety
// Pointers must be null or valid.
enum OddStatus odd_session_state(const struct OddSession *session, struct OddState *out);

// Runs a builtin script and writes its CSV log.
//
// # Safety
// String arguments must be null or NUL-terminated; `script` and `out_csv`
// are required.
enum OddStatus odd_run_script(const char *script, const char *config_path, const char *out_csv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ODD_SIM_H */

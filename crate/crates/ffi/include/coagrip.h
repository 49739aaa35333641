#ifndef COAGRIP_H
#define COAGRIP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CoagripStatus {
  COAGRIP_STATUS_OK = 0,
  COAGRIP_STATUS_NULL_POINTER = 1,
  COAGRIP_STATUS_INVALID_ARGUMENT = 2,
  COAGRIP_STATUS_NUMERICAL = 3,
  COAGRIP_STATUS_ORACLE_DOMAIN = 4,
  COAGRIP_STATUS_BUFFER_TOO_SMALL = 5,
  COAGRIP_STATUS_PANIC = 6,
} CoagripStatus;

// Tabulated exact solution for the constant kernel.
typedef struct CoagripOracle CoagripOracle;

// Running simulation built from a configuration text.
typedef struct CoagripSimulation CoagripSimulation;

// Physical parameters of the dimensionless model.
typedef struct CoagripParams {
  double gamma;
  double kappa;
  double chi;
  double c_s;
  double delta0;
  double phi00;
  double b0;
} CoagripParams;

// Scalar summary of a state.
typedef struct CoagripMoments {
  double tau;
  double n;
  double v;
  double delta;
} CoagripMoments;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *coagrip_last_error(void);

// Library version as a static NUL-terminated string.
const char *coagrip_version(void);

// Reference parameter set (gamma = 1, kappa = 0.2, chi = 0.01, ...).
struct CoagripParams coagrip_params_default(void);

// Builds a simulation from `key = value` configuration text. The initial
// state is the configured initial condition at `tau = 0`.
//
// # Safety
// `config` must be a NUL-terminated string or null; `out` must be a valid
// pointer to writable storage for a handle.
enum CoagripStatus coagrip_simulation_new(const char *config, struct CoagripSimulation **out);

// Advances the simulation by `steps` steps of the configured size.
//
// # Safety
// `sim` must be a handle from `coagrip_simulation_new` or null.
enum CoagripStatus coagrip_simulation_step(struct CoagripSimulation *sim, size_t steps);

// Writes the current time, moments and supersaturation.
//
// # Safety
// `sim` must be a valid handle or null; `out` must be writable or null.
enum CoagripStatus coagrip_simulation_moments(const struct CoagripSimulation *sim,
                                              struct CoagripMoments *out);

// Number of grid nodes (length of the distribution array).
//
// # Safety
// `sim` must be a valid handle or null (returns 0).
size_t coagrip_simulation_len(const struct CoagripSimulation *sim);

// Copies the distribution into `buf` (`len` doubles).
//
// # Safety
// `sim` must be a valid handle; `buf` must point to `len` writable doubles.
enum CoagripStatus coagrip_simulation_phi(const struct CoagripSimulation *sim,
                                          double *buf,
                                          size_t len);

// # Safety
// `sim` must be a handle from `coagrip_simulation_new`, or null.
void coagrip_simulation_free(struct CoagripSimulation *sim);

// Tabulates the exact solution for the given parameters.
//
// # Safety
// `params` and `out` must be valid pointers.
enum CoagripStatus coagrip_oracle_new(const struct CoagripParams *params,
                                      struct CoagripOracle **out);

// Exact moments and decay rate `b` at time `t`.
//
// # Safety
// `oracle` must be a valid handle; `out` and `b` must be writable (`b` may be null).
enum CoagripStatus coagrip_oracle_at(const struct CoagripOracle *oracle,
                                     double t,
                                     struct CoagripMoments *out,
                                     double *b);

// # Safety
// `oracle` must be a handle from `coagrip_oracle_new`, or null.
void coagrip_oracle_free(struct CoagripOracle *oracle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COAGRIP_H */

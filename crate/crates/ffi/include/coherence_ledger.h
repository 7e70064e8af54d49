#ifndef COHERENCE_LEDGER_H
#define COHERENCE_LEDGER_H

#include <stdbool.h>
#include <stddef.h>

// Result of every fallible call.
typedef enum ClStatus {
  CL_STATUS_OK = 0,
  // Malformed arguments or documents.
  CL_STATUS_INVALID_INPUT = 1,
  // The computation itself failed (non-Hermitian input, ambiguous blocking, ...).
  CL_STATUS_NUMERICAL = 2,
  CL_STATUS_NULL_POINTER = 3,
  // The output buffer is too small; the required length has been written.
  CL_STATUS_BUFFER_TOO_SMALL = 4,
  // A bound asked for by name does not apply to the state.
  CL_STATUS_NOT_FOUND = 5,
  CL_STATUS_PANIC = 6,
} ClStatus;

// Opaque density matrix on a [`ClSystem`].
typedef struct ClState ClState;

// Opaque composite system.
typedef struct ClSystem ClSystem;

// One inequality `lhs <= rhs`.
typedef struct ClBound {
  double lhs;
  double rhs;
  double slack;
  bool holds;
  bool saturated;
} ClBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the next call that fails.
const char *cl_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cl_version(void);

// Builds a system from `num_subsystems` local spectra stored back to back in
// `levels`, subsystem `i` holding `dims[i]` levels.
//
// # Safety
// `dims` must point to `num_subsystems` values and `levels` to their sum; `out` must be writable.
enum ClStatus cl_system_new(const double *levels,
                            const size_t *dims,
                            size_t num_subsystems,
                            struct ClSystem **out);

// `n` qubits with levels `{0, omega0}`.
//
// # Safety
// `out` must be writable.
enum ClStatus cl_system_qubits(size_t n, double omega0, struct ClSystem **out);

// # Safety
// `sys` must come from a `cl_system_*` constructor and not be used afterwards. Null is ignored.
void cl_system_free(struct ClSystem *sys);

// Total Hilbert-space dimension.
//
// # Safety
// `sys` must be a live handle and `out` writable.
enum ClStatus cl_system_dimension(const struct ClSystem *sys, size_t *out);

// Dense state from row-major real and imaginary parts of a `dim x dim` matrix.
//
// # Safety
// `re` and `im` must each point to `dim * dim` values; `sys` must be live and `out` writable.
enum ClStatus cl_state_dense(const struct ClSystem *sys,
                             const double *re,
                             const double *im,
                             size_t dim,
                             struct ClState **out);

// State from a job document (the same JSON the command-line tool reads).
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum ClStatus cl_state_from_json(const char *json, struct ClState **out);

// # Safety
// `state` must come from a `cl_state_*` constructor and not be used afterwards. Null is ignored.
void cl_state_free(struct ClState *state);

// # Safety
// `state` must be live and `out` writable.
enum ClStatus cl_state_dimension(const struct ClState *state, size_t *out);

// Work extractable from internal coherence at inverse temperature `beta`, in units of `k_B T`.
//
// # Safety
// `state` must be live and `out` writable.
enum ClStatus cl_w_coh(const struct ClState *state, double beta, double *out);

// Work extractable from the energy populations alone.
//
// # Safety
// `state` must be live and `out` writable.
enum ClStatus cl_w_incoh(const struct ClState *state, double beta, double *out);

// Quantum Fisher information with respect to the system Hamiltonian.
//
// # Safety
// `state` must be live and `out` writable.
enum ClStatus cl_qfi(const struct ClState *state, double *out);

// Wigner-Yanase-Dyson skew information of order `alpha ∈ (0, 1)`.
//
// # Safety
// `state` must be live and `out` writable.
enum ClStatus cl_skew_information(const struct ClState *state, double alpha, double *out);

// Looks up a trade-off bound by name (`prop1`, `theorem1`, `theorem2`, `eq4`, `eq6`, `tight_binomial`, ...).
//
// # Safety
// `state` must be live, `name` NUL-terminated and `out` writable.
enum ClStatus cl_tradeoff_bound(const struct ClState *state,
                                double beta,
                                const char *name,
                                struct ClBound *out);

// All `2^n` levels of the periodic transverse-field Ising chain, ascending.
//
// Writes at most `capacity` values to `levels` and the full count to `len`;
// returns [`ClStatus::BufferTooSmall`] when `capacity < 2^n`.
//
// # Safety
// `levels` must hold `capacity` values (may be null when `capacity == 0`); `len` must be writable.
enum ClStatus cl_ising_spectrum(size_t n,
                                double h,
                                double j,
                                double *levels,
                                size_t capacity,
                                size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COHERENCE_LEDGER_H */

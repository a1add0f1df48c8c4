#ifndef QAOA_LAB_H
#define QAOA_LAB_H

#include <stddef.h>
#include <stdint.h>

// Result of an FFI call.
typedef enum QlStatus {
  QL_STATUS_OK = 0,
  QL_STATUS_NULL_POINTER = 1,
  QL_STATUS_INVALID_ARGUMENT = 2,
  QL_STATUS_PARSE = 3,
  QL_STATUS_LIMIT_EXCEEDED = 4,
  QL_STATUS_NUMERICAL_FAILURE = 5,
  QL_STATUS_IO = 6,
  QL_STATUS_PANIC = 7,
} QlStatus;

// A circuit over `{H, PhaseT, CPhase}`.
typedef struct QlCircuit QlCircuit;

// A compiled post-selected QAOA circuit.
typedef struct QlCompiled QlCompiled;

// A constraint satisfaction instance.
typedef struct QlCsp QlCsp;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread. Valid until the next
// failing call on the same thread.
const char *ql_last_error(void);

// Library version as a static NUL-terminated string.
const char *ql_version(void);

// Parses an instance in the `csp n m` text format.
//
// # Safety
// `text` must be a NUL-terminated string and `out_csp` a valid pointer.
enum QlStatus ql_csp_parse(const char *text, struct QlCsp **out_csp);

// Parses a DIMACS CNF formula.
//
// # Safety
// As for `ql_csp_parse`.
enum QlStatus ql_csp_parse_dimacs(const char *text, struct QlCsp **out_csp);

// Releases an instance. Null is ignored.
//
// # Safety
// `csp` must come from `ql_csp_parse*` and not be used afterwards.
void ql_csp_free(struct QlCsp *csp);

// Number of variables and clauses.
//
// # Safety
// `csp` must be a live handle; the out pointers must be valid.
enum QlStatus ql_csp_shape(const struct QlCsp *csp, uintptr_t *out_n, uintptr_t *out_m);

// `C(z)` with variable 0 in the least significant bit of `z`.
//
// # Safety
// `csp` must be a live handle and `out_cost` valid.
enum QlStatus ql_csp_cost(const struct QlCsp *csp, uint64_t z, uintptr_t *out_cost);

// Number of assignments satisfying every clause, computed from QAOA
// matrix elements.
//
// # Safety
// `csp` must be a live handle and `out_count` valid.
enum QlStatus ql_fourier_count(const struct QlCsp *csp, uint64_t *out_count);

// `<gamma, beta| C |gamma, beta>` at depth `p`.
//
// # Safety
// `gammas` and `betas` must each point to `p` doubles.
enum QlStatus ql_qaoa_objective(const struct QlCsp *csp,
                                uintptr_t p,
                                const double *gammas,
                                const double *betas,
                                double *out_value);

// Exhaustive p = 1 grid search with `resolution` points per angle.
//
// # Safety
// `csp` must be a live handle; the out pointers must be valid.
enum QlStatus ql_qaoa_grid_search(const struct QlCsp *csp,
                                  uintptr_t resolution,
                                  double *out_gamma,
                                  double *out_beta,
                                  double *out_value);

// Spectral gap of `H(s) = (1 - s)(-B) + s(-C)`.
//
// # Safety
// `csp` must be a live handle and `out_gap` valid.
enum QlStatus ql_spectral_gap(const struct QlCsp *csp, double s, double *out_gap);

// Counts the marked strings among `2^k` by post-selected amplification.
//
// # Safety
// `marked` must point to `len` values (it may be null when `len` is 0).
enum QlStatus ql_count_marked(uintptr_t k,
                              const uint64_t *marked,
                              uintptr_t len,
                              uint64_t *out_count);

// Parses a circuit in the `circuit n` text format.
//
// # Safety
// `text` must be a NUL-terminated string and `out_circuit` valid.
enum QlStatus ql_circuit_parse(const char *text, struct QlCircuit **out_circuit);

// Releases a circuit. Null is ignored.
//
// # Safety
// `circuit` must come from `ql_circuit_parse` and not be used afterwards.
void ql_circuit_free(struct QlCircuit *circuit);

// Compiles a circuit into the post-selected p = 1 form.
//
// # Safety
// `circuit` must be a live handle and `out_compiled` valid.
enum QlStatus ql_compile(const struct QlCircuit *circuit, struct QlCompiled **out_compiled);

// Releases a compiled circuit. Null is ignored.
//
// # Safety
// `compiled` must come from `ql_compile` and not be used afterwards.
void ql_compiled_free(struct QlCompiled *compiled);

// Total and auxiliary qubit counts of a compiled circuit.
//
// # Safety
// `compiled` must be a live handle; the out pointers must be valid.
enum QlStatus ql_compiled_shape(const struct QlCompiled *compiled,
                                uintptr_t *out_total,
                                uintptr_t *out_auxiliary);

// Compares a circuit with a compiled circuit. `out_passed` is 1 when the
// distributions and phase-aligned amplitudes agree within `tolerance`.
//
// # Safety
// Both handles must be live; the out pointers must be valid.
enum QlStatus ql_verify(const struct QlCircuit *circuit,
                        const struct QlCompiled *compiled,
                        double tolerance,
                        double *out_tv,
                        double *out_amplitude,
                        int32_t *out_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QAOA_LAB_H */

#ifndef DQC_LAYOUT_H
#define DQC_LAYOUT_H

#include <stddef.h>
#include <stdint.h>

typedef enum DqcStatus {
  DQC_STATUS_OK = 0,
  DQC_STATUS_NULL_POINTER = 1,
  DQC_STATUS_INVALID_UTF8 = 2,
  DQC_STATUS_PARSE = 3,
  DQC_STATUS_INVALID_ARGUMENT = 4,
  DQC_STATUS_TOPOLOGY = 5,
  DQC_STATUS_PLACEMENT = 6,
  DQC_STATUS_ROUTING = 7,
  DQC_STATUS_BUFFER_TOO_SMALL = 8,
  DQC_STATUS_PANIC = 99,
} DqcStatus;

typedef enum DqcMode {
  DQC_MODE_CLASS = 0,
  DQC_MODE_BASELINE = 1,
} DqcMode;

typedef enum DqcCostMode {
  DQC_COST_MODE_PAIR = 0,
  DQC_COST_MODE_PER_TARGET = 1,
} DqcCostMode;

// Opaque circuit handle.
typedef struct DqcCircuit DqcCircuit;

// Opaque handle to a device plus its controllers.
typedef struct DqcTarget DqcTarget;

typedef struct DqcOptions {
  enum DqcMode mode;
  enum DqcCostMode cost_mode;
  uint64_t seed;
  // Number of refinement sweeps; 0 is treated as 1.
  size_t sweeps;
} DqcOptions;

typedef struct DqcMetrics {
  size_t qubits;
  size_t input_operations;
  size_t operations;
  size_t depth;
  uint64_t iccs;
  uint64_t placement_iccs;
  size_t swaps_inserted;
  size_t forced_swaps;
  double runtime_ms;
} DqcMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null after a
// successful call. Valid until the next call on the same thread.
const char *dqc_last_error_message(void);

// Parses OpenQASM 2.0 text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a writable pointer.
enum DqcStatus dqc_circuit_parse(const char *text, struct DqcCircuit **out);

// Generates a benchmark circuit by name, e.g. `dqft-20`, `ipe-12`, `cc-8`
// or `random-20`. `seed` only affects the random family.
//
// # Safety
// `name` must be a NUL-terminated string and `out` a writable pointer.
enum DqcStatus dqc_circuit_generate(const char *name, uint64_t seed, struct DqcCircuit **out);

// # Safety
// `circuit` must be null or a handle from this library not yet freed.
void dqc_circuit_free(struct DqcCircuit *circuit);

// Number of qubits, or 0 for a null handle.
//
// # Safety
// `circuit` must be null or a live handle.
size_t dqc_circuit_num_qubits(const struct DqcCircuit *circuit);

// Operation count excluding barriers, or 0 for a null handle.
//
// # Safety
// `circuit` must be null or a live handle.
size_t dqc_circuit_num_ops(const struct DqcCircuit *circuit);

// Serializes a circuit to OpenQASM 2.0. Free the result with
// [`dqc_string_free`].
//
// # Safety
// `circuit` must be a live handle and `out` a writable pointer.
enum DqcStatus dqc_circuit_to_qasm(const struct DqcCircuit *circuit, char **out);

// # Safety
// `s` must be null or a string returned by this library not yet freed.
void dqc_string_free(char *s);

// Builds a target from a topology document such as
// `{"controllers": {"kind": "star", "k": 4}, "device": {"kind": "heavy_hex_127"}}`.
// Relative edge-list paths resolve against the working directory.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum DqcStatus dqc_target_from_json(const char *json, struct DqcTarget **out);

// # Safety
// `target` must be null or a handle from this library not yet freed.
void dqc_target_free(struct DqcTarget *target);

// Number of physical qubits of the target, or 0 for a null handle.
//
// # Safety
// `target` must be null or a live handle.
size_t dqc_target_num_qubits(const struct DqcTarget *target);

// Places and routes `circuit` on `target`. `metrics` receives the report;
// when `qasm_out` is non-null it receives the routed program, to be freed
// with [`dqc_string_free`].
//
// # Safety
// Handles must be live; `options` and `metrics` must be valid pointers;
// `qasm_out` must be null or writable.
enum DqcStatus dqc_transpile(const struct DqcCircuit *circuit,
                             const struct DqcTarget *target,
                             const struct DqcOptions *options,
                             struct DqcMetrics *metrics,
                             char **qasm_out);

// Runs feedforward-aware placement only. `layout` receives the physical
// qubit of each logical qubit and must hold at least the circuit's qubit
// count; `iccs` receives the cost of the placement. `options.mode` is
// ignored.
//
// # Safety
// Handles must be live; `options` and `iccs` must be valid pointers;
// `layout` must point to `layout_len` writable elements.
enum DqcStatus dqc_place(const struct DqcCircuit *circuit,
                         const struct DqcTarget *target,
                         const struct DqcOptions *options,
                         size_t *layout,
                         size_t layout_len,
                         uint64_t *iccs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DQC_LAYOUT_H */

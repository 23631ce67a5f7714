/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef TOPAS_H
#define TOPAS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TopasStatus {
  TOPAS_STATUS_OK = 0,
  TOPAS_STATUS_NULL_POINTER = 1,
  TOPAS_STATUS_INVALID_UTF8 = 2,
  /**
   * QASM syntax error or unsupported gate/statement.
   */
  TOPAS_STATUS_PARSE = 3,
  /**
   * Invalid configuration value or unknown topology.
   */
  TOPAS_STATUS_CONFIG = 4,
  /**
   * Circuit is wider than the device or the simulation cap.
   */
  TOPAS_STATUS_TOO_WIDE = 5,
  TOPAS_STATUS_IO = 6,
  /**
   * Any other library error.
   */
  TOPAS_STATUS_FAILED = 7,
  /**
   * A panic was caught at the boundary.
   */
  TOPAS_STATUS_PANIC = 8,
} TopasStatus;

/**
 * A parsed circuit.
 */
typedef struct TopasCircuit TopasCircuit;

/**
 * Pipeline settings.
 */
typedef struct TopasConfig TopasConfig;

/**
 * Routed circuit and run report.
 */
typedef struct TopasResult TopasResult;

/**
 * Circuit statistics.
 */
typedef struct TopasStats {
  size_t width;
  size_t gates;
  size_t cnots;
  size_t depth;
} TopasStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *topas_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into the library from the same thread.
 */
const char *topas_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void topas_string_free(char *s);

/**
 * Parses OpenQASM 2 text.
 *
 * # Safety
 * `qasm` must be a NUL-terminated string; `out` must be writable.
 */
enum TopasStatus topas_circuit_parse_qasm(const char *qasm, struct TopasCircuit **out);

/**
 * # Safety
 * `c` must come from this library and not be freed twice. NULL is ignored.
 */
void topas_circuit_free(struct TopasCircuit *c);

/**
 * Emits the circuit as OpenQASM 2.
 *
 * # Safety
 * `c` must be a live circuit handle; `out` must be writable.
 */
enum TopasStatus topas_circuit_to_qasm(const struct TopasCircuit *c, char **out);

/**
 * # Safety
 * `c` must be a live circuit handle; `out` must be writable.
 */
enum TopasStatus topas_circuit_stats(const struct TopasCircuit *c, struct TopasStats *out);

/**
 * Default settings. Never returns NULL.
 */
struct TopasConfig *topas_config_new(void);

/**
 * # Safety
 * `cfg` must come from this library and not be freed twice. NULL is ignored.
 */
void topas_config_free(struct TopasConfig *cfg);

/**
 * Merges TOML keys over the current settings. On error the settings are
 * unchanged.
 *
 * # Safety
 * `cfg` must be a live config handle; `toml` a NUL-terminated string.
 */
enum TopasStatus topas_config_apply_toml(struct TopasConfig *cfg, const char *toml);

/**
 * Device spec such as `mesh:6x6`, `linear:8` or `falcon27`.
 *
 * # Safety
 * `cfg` must be a live config handle; `spec` a NUL-terminated string.
 */
enum TopasStatus topas_config_set_topology(struct TopasConfig *cfg, const char *spec);

/**
 * `topas`, `post_mapping` or `map_only`.
 *
 * # Safety
 * `cfg` must be a live config handle; `mode` a NUL-terminated string.
 */
enum TopasStatus topas_config_set_mode(struct TopasConfig *cfg, const char *mode);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum TopasStatus topas_config_set_seed(struct TopasConfig *cfg, uint64_t seed);

/**
 * Worker threads; 0 picks the default.
 *
 * # Safety
 * `cfg` must be a live config handle.
 */
enum TopasStatus topas_config_set_threads(struct TopasConfig *cfg, size_t threads);

/**
 * Compiles `c` for the configured device.
 *
 * # Safety
 * `c` and `cfg` must be live handles; `out` must be writable.
 */
enum TopasStatus topas_compile(const struct TopasCircuit *c,
                               const struct TopasConfig *cfg,
                               struct TopasResult **out);

/**
 * # Safety
 * `r` must come from this library and not be freed twice. NULL is ignored.
 */
void topas_result_free(struct TopasResult *r);

/**
 * Routed circuit as OpenQASM 2.
 *
 * # Safety
 * `r` must be a live result handle; `out` must be writable.
 */
enum TopasStatus topas_result_qasm(const struct TopasResult *r, char **out);

/**
 * Run report as JSON.
 *
 * # Safety
 * `r` must be a live result handle; `out` must be writable.
 */
enum TopasStatus topas_result_report_json(const struct TopasResult *r, char **out);

/**
 * Statistics of the routed circuit.
 *
 * # Safety
 * `r` must be a live result handle; `out` must be writable.
 */
enum TopasStatus topas_result_stats(const struct TopasResult *r, struct TopasStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPAS_H */

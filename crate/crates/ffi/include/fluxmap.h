#ifndef FLUXMAP_H
#define FLUXMAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum FmStatus {
  FM_STATUS_OK = 0,
  FM_STATUS_NULL_POINTER = 1,
  FM_STATUS_INVALID_UTF8 = 2,
  FM_STATUS_PARSE_ERROR = 3,
  FM_STATUS_MAP_ERROR = 4,
  FM_STATUS_VERIFY_ERROR = 5,
  FM_STATUS_PANIC = 6,
} FmStatus;

/**
 * Parsed cell library.
 */
typedef struct FmLibrary FmLibrary;

/**
 * Parsed combinational netlist.
 */
typedef struct FmNetlist FmNetlist;

/**
 * A finished mapping with its BLIF text and report.
 */
typedef struct FmResult FmResult;

/**
 * Characteristics of the built-in DFF and splitter cells.
 */
typedef struct FmBuiltinParams {
  double dff_delay;
  double dff_area;
  double splitter_delay;
  double splitter_area;
} FmBuiltinParams;

/**
 * Mapping options; start from [`fm_map_options_default`].
 */
typedef struct FmMapOptions {
  /**
   * PSD tuning iterations.
   */
  uint32_t iterations;
  /**
   * Cut size in 2..=6; 0 picks min(6, widest library gate).
   */
  uint32_t cut_size;
  /**
   * Depth-optimal mapping with area tie-break that ignores balancing.
   */
  bool baseline;
  /**
   * Also align all primary outputs to the same level.
   */
  bool balance_outputs;
  /**
   * Check balance, splitter legality and equivalence before returning.
   */
  bool verify;
} FmMapOptions;

/**
 * Statistics of one mapped network.
 */
typedef struct FmStats {
  uint64_t gate_count;
  uint64_t dff_count;
  uint64_t splitter_count;
  uint32_t logical_depth;
  uint32_t iterations;
  double worst_stage_delay;
  double psd;
  double runtime_s;
} FmStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default characteristics: every delay and area equals 1.
 */
struct FmBuiltinParams fm_builtin_params_default(void);

/**
 * Defaults of the command-line tool: 5 iterations, automatic cut size,
 * SFQ mode, no output alignment, no verification.
 */
struct FmMapOptions fm_map_options_default(void);

/**
 * Parse a genlib cell library. `params` may be null for the defaults. On
 * success `*out` owns a new handle.
 *
 * # Safety
 * `genlib` must be a nul-terminated string, `params` null or valid, and
 * `out` a valid pointer.
 */
enum FmStatus fm_library_from_genlib(const char *genlib,
                                     const struct FmBuiltinParams *params,
                                     struct FmLibrary **out);

/**
 * Number of logic gates in a library, or 0 for a null handle.
 *
 * # Safety
 * `lib` must be null or a live handle.
 */
size_t fm_library_gate_count(const struct FmLibrary *lib);

/**
 * # Safety
 * `lib` must be null or a handle not yet freed.
 */
void fm_library_free(struct FmLibrary *lib);

/**
 * Parse a combinational BLIF netlist. On success `*out` owns a new handle.
 *
 * # Safety
 * `blif` must be a nul-terminated string and `out` a valid pointer.
 */
enum FmStatus fm_netlist_from_blif(const char *blif, struct FmNetlist **out);

/**
 * # Safety
 * `netlist` must be null or a handle not yet freed.
 */
void fm_netlist_free(struct FmNetlist *netlist);

/**
 * Map a netlist onto a library. `options` may be null for the defaults.
 * On success `*out` owns a new result handle.
 *
 * # Safety
 * `netlist` and `lib` must be live handles, `options` null or valid, and
 * `out` a valid pointer.
 */
enum FmStatus fm_map(const struct FmNetlist *netlist,
                     const struct FmLibrary *lib,
                     const struct FmMapOptions *options,
                     struct FmResult **out);

/**
 * Statistics before (`phase1`) and after PSD tuning (`final`). Either
 * destination may be null.
 *
 * # Safety
 * `result` must be a live handle; non-null destinations must be valid.
 */
enum FmStatus fm_result_stats(const struct FmResult *result,
                              struct FmStats *phase1,
                              struct FmStats *final_);

/**
 * The mapped netlist as BLIF. `*out` receives a string to release with
 * [`fm_string_free`].
 *
 * # Safety
 * `result` must be a live handle and `out` a valid pointer.
 */
enum FmStatus fm_result_blif(const struct FmResult *result, char **out);

/**
 * The run report as `key=value` lines. `*out` receives a string to release
 * with [`fm_string_free`].
 *
 * # Safety
 * `result` must be a live handle and `out` a valid pointer.
 */
enum FmStatus fm_result_report(const struct FmResult *result, char **out);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void fm_result_free(struct FmResult *result);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void fm_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *fm_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *fm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLUXMAP_H */

#ifndef SUBSTREAM_H
#define SUBSTREAM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an FFI call. Zero is success.
 */
typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  SS_STATUS_INVALID_UTF8 = 2,
  SS_STATUS_INVALID_ARGUMENT = 3,
  SS_STATUS_PARSE = 4,
  SS_STATUS_IO = 5,
  SS_STATUS_PANIC = 6,
} SsStatus;

/**
 * A validated instance description together with its materialized oracle.
 */
typedef struct SsInstance SsInstance;

/**
 * The full report of a multi-trial experiment.
 */
typedef struct SsReport SsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null if none.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *ss_last_error_message(void);

/**
 * Parses an instance description in the JSON format written by `substream gen`.
 *
 * # Safety
 * `json` is a nul-terminated string and `out` is valid for a pointer write.
 */
enum SsStatus ss_instance_from_json(const char *json, struct SsInstance **out);

/**
 * The hard cardinality instance on `n` elements with rank `k` and weight `h`.
 *
 * # Safety
 * `out` is valid for a pointer write.
 */
enum SsStatus ss_instance_hard_cardinality(size_t n,
                                           size_t k,
                                           size_t h,
                                           uint64_t seed,
                                           struct SsInstance **out);

/**
 * The hard partition-matroid instance with rank `k` and block size `m`.
 *
 * # Safety
 * `out` is valid for a pointer write.
 */
enum SsStatus ss_instance_hard_matroid(size_t k, size_t m, uint64_t seed, struct SsInstance **out);

/**
 * Releases an instance. Null is ignored.
 *
 * # Safety
 * `inst` is null or a handle from this library that has not been freed.
 */
void ss_instance_free(struct SsInstance *inst);

/**
 * Number of ground elements, or 0 for a null handle.
 *
 * # Safety
 * `inst` is null or a live handle.
 */
size_t ss_instance_ground_size(const struct SsInstance *inst);

/**
 * Exact optimum as a decimal string.
 *
 * # Safety
 * `inst` is a live handle and `out` is valid for a pointer write.
 */
enum SsStatus ss_instance_optimum(const struct SsInstance *inst, char **out);

/**
 * Runs `trials` independent trials of `algorithm` (`branching`, `greedy`,
 * `sieve` or `store-all`) with accuracy `eps_num/eps_den`. A `budget` of 0
 * means no element budget.
 *
 * # Safety
 * `inst` is a live handle, `algorithm` is a nul-terminated string and `out`
 * is valid for a pointer write.
 */
enum SsStatus ss_run_experiment(const struct SsInstance *inst,
                                const char *algorithm,
                                int64_t eps_num,
                                int64_t eps_den,
                                size_t trials,
                                uint64_t seed,
                                size_t budget,
                                struct SsReport **out);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `report` is null or a handle from this library that has not been freed.
 */
void ss_report_free(struct SsReport *report);

/**
 * Number of trials, or 0 for a null handle.
 *
 * # Safety
 * `report` is null or a live handle.
 */
size_t ss_report_trials(const struct SsReport *report);

/**
 * Trials that ended in an error, or 0 for a null handle.
 *
 * # Safety
 * `report` is null or a live handle.
 */
size_t ss_report_failed(const struct SsReport *report);

/**
 * Mean of value over optimum, or NaN for a null handle.
 *
 * # Safety
 * `report` is null or a live handle.
 */
double ss_report_mean_ratio(const struct SsReport *report);

/**
 * Smallest value over optimum, or NaN for a null handle.
 *
 * # Safety
 * `report` is null or a live handle.
 */
double ss_report_min_ratio(const struct SsReport *report);

/**
 * Queries refused by the access policy over all trials, or 0 for a null handle.
 *
 * # Safety
 * `report` is null or a live handle.
 */
size_t ss_report_violations(const struct SsReport *report);

/**
 * Report as pretty-printed JSON.
 *
 * # Safety
 * `report` is a live handle and `out` is valid for a pointer write.
 */
enum SsStatus ss_report_json(const struct SsReport *report, char **out);

/**
 * Report aggregates as a two-line CSV.
 *
 * # Safety
 * `report` is a live handle and `out` is valid for a pointer write.
 */
enum SsStatus ss_report_csv(const struct SsReport *report, char **out);

/**
 * Regenerates verification table `which` (2, 3 or 4) as CSV.
 *
 * # Safety
 * `out` is valid for a pointer write.
 */
enum SsStatus ss_table_csv(uint32_t which, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` is null or a string from this library that has not been freed.
 */
void ss_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUBSTREAM_H */

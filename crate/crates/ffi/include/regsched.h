#ifndef REGSCHED_H
#define REGSCHED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RegschedStatus {
  REGSCHED_STATUS_OK = 0,
  REGSCHED_STATUS_NULL_POINTER = 1,
  REGSCHED_STATUS_INVALID_UTF8 = 2,
  REGSCHED_STATUS_IO = 3,
  REGSCHED_STATUS_PARSE = 4,
  REGSCHED_STATUS_INVALID = 5,
  REGSCHED_STATUS_OUT_OF_RANGE = 6,
  REGSCHED_STATUS_PANIC = 7,
} RegschedStatus;

/**
 * Opaque simulation configuration.
 */
typedef struct RegschedConfig RegschedConfig;

/**
 * Opaque experiment result.
 */
typedef struct RegschedStats RegschedStats;

/**
 * Analytic quantities; NaN where undefined (see the CLI `bounds` command).
 */
typedef struct RegschedBounds {
  double additive_eps;
  double multiplicative_eps;
  double drift_constant;
  double queue_bound;
  double lower_bound;
  double upper_bound_conservative;
  /**
   * NaN unless all arrival rates are equal.
   */
  double symmetric_threshold;
} RegschedBounds;

/**
 * Mean across replications; `stderr` is NaN with one replication and both
 * are NaN when the quantity is undefined.
 */
typedef struct RegschedEstimate {
  double mean;
  double stderr;
} RegschedEstimate;

typedef struct RegschedLinkSummary {
  struct RegschedEstimate mean_q;
  struct RegschedEstimate std_q;
  struct RegschedEstimate mean_t;
  struct RegschedEstimate e_i;
  struct RegschedEstimate e_i2;
  struct RegschedEstimate norm_i2;
  struct RegschedEstimate var_i;
  struct RegschedEstimate p_service;
  struct RegschedEstimate mean_unused;
  struct RegschedEstimate mean_departed;
} RegschedLinkSummary;

typedef struct RegschedAggregate {
  size_t replications;
  size_t num_links;
  struct RegschedEstimate total_mean_q;
  struct RegschedEstimate sum_alpha_mean_q;
  struct RegschedEstimate sum_mean_t;
  struct RegschedEstimate total_mean_unused;
  struct RegschedEstimate regularity_metric;
  struct RegschedEstimate weighted_norm_i2;
  struct RegschedEstimate lemma1_residual_max;
  struct RegschedEstimate lemma2_r1;
  struct RegschedEstimate lemma2_r2;
} RegschedAggregate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *regsched_last_error(void);

/**
 * Parses and validates a TOML configuration.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RegschedStatus regsched_config_parse(const char *text, struct RegschedConfig **out);

/**
 * Reads, parses and validates a TOML configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RegschedStatus regsched_config_load(const char *path, struct RegschedConfig **out);

/**
 * # Safety
 * `config` must be null or a handle from this library not freed before.
 */
void regsched_config_free(struct RegschedConfig *config);

/**
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum RegschedStatus regsched_config_num_links(const struct RegschedConfig *config, size_t *out);

/**
 * Replaces the run parameters. The handle is unchanged on failure.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum RegschedStatus regsched_config_set_run(struct RegschedConfig *config,
                                            uint64_t horizon,
                                            uint64_t warmup,
                                            uint64_t seed,
                                            size_t replications);

/**
 * Replaces the policy's gamma. The handle is unchanged on failure.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum RegschedStatus regsched_config_set_gamma(struct RegschedConfig *config, double gamma);

/**
 * Computes capacity margins and analytic bounds.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum RegschedStatus regsched_bounds(const struct RegschedConfig *config,
                                    struct RegschedBounds *out);

/**
 * Runs all replications on at most `jobs` threads (0 = one per core).
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum RegschedStatus regsched_run(const struct RegschedConfig *config,
                                 size_t jobs,
                                 struct RegschedStats **out);

/**
 * # Safety
 * `stats` must be null or a handle from this library not freed before.
 */
void regsched_stats_free(struct RegschedStats *stats);

/**
 * # Safety
 * `stats` must be a live handle and `out` a valid pointer.
 */
enum RegschedStatus regsched_stats_link(const struct RegschedStats *stats,
                                        size_t link,
                                        struct RegschedLinkSummary *out);

/**
 * # Safety
 * `stats` must be a live handle and `out` a valid pointer.
 */
enum RegschedStatus regsched_stats_aggregate(const struct RegschedStats *stats,
                                             struct RegschedAggregate *out);

/**
 * Renders the result in the CLI `run` CSV format. Release the string with
 * [`regsched_string_free`].
 *
 * # Safety
 * `stats` must be a live handle and `out` a valid pointer.
 */
enum RegschedStatus regsched_stats_to_csv(const struct RegschedStats *stats, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not freed before.
 */
void regsched_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGSCHED_H */

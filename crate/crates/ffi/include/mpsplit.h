#ifndef MPSPLIT_H
#define MPSPLIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum MpsStatus {
  MPS_STATUS_OK = 0,
  MPS_STATUS_NULL_POINTER = 1,
  MPS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The configuration could not be parsed or failed validation.
   */
  MPS_STATUS_CONFIG = 3,
  /**
   * The simulation or solver failed.
   */
  MPS_STATUS_RUNTIME = 4,
  MPS_STATUS_IO = 5,
  MPS_STATUS_PANIC = 6,
} MpsStatus;

typedef enum MpsSolution {
  MPS_SOLUTION_MULTI_PATH = 0,
  MPS_SOLUTION_SINGLE_PATH1 = 1,
  MPS_SOLUTION_SINGLE_PATH2 = 2,
  MPS_SOLUTION_PATH_SELECTION = 3,
} MpsSolution;

/**
 * Experiment configuration.
 */
typedef struct MpsConfig MpsConfig;

/**
 * Completed run with its summary.
 */
typedef struct MpsRun MpsRun;

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *mps_last_error_message(void);

/**
 * Built-in scenario (`"scenario1"` or `"scenario2"`) at the given total bandwidth.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum MpsStatus mps_config_preset(const char *name, double bandwidth_hz, struct MpsConfig **out);

/**
 * Loads a TOML configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum MpsStatus mps_config_load(const char *path, struct MpsConfig **out);

/**
 * # Safety
 * `cfg` must be a live handle.
 */
enum MpsStatus mps_config_set_seed(struct MpsConfig *cfg, uint64_t seed);

/**
 * Dotted-key override, e.g. `("radio.shadowing_sigma_db", "6")`. The
 * configuration is left unchanged when the result would not validate.
 *
 * # Safety
 * `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum MpsStatus mps_config_set(struct MpsConfig *cfg, const char *key, const char *value);

/**
 * # Safety
 * `cfg` must be null or a handle not yet freed.
 */
void mps_config_free(struct MpsConfig *cfg);

/**
 * Runs every enabled solution.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum MpsStatus mps_run(const struct MpsConfig *cfg, struct MpsRun **out);

/**
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum MpsStatus mps_run_interval_count(const struct MpsRun *run, size_t *out);

/**
 * Mean instant latency in seconds of `traffic` (0-based) under `solution`.
 *
 * # Safety
 * `run` must be a live handle; `out` must be writable.
 */
enum MpsStatus mps_run_mean_latency(const struct MpsRun *run,
                                    enum MpsSolution solution,
                                    size_t traffic,
                                    double *out);

/**
 * Writes the standard output directory for the run.
 *
 * # Safety
 * `run` must be a live handle; `out_dir` a NUL-terminated string.
 */
enum MpsStatus mps_run_export(const struct MpsRun *run, const char *out_dir);

/**
 * # Safety
 * `run` must be null or a handle not yet freed.
 */
void mps_run_free(struct MpsRun *run);

/**
 * Solves a single interval with default solver settings.
 *
 * Path `p` has bandwidth `bandwidth_hz[p]` and receive SNR per transmitted
 * watt `snr_per_watt[p]`. Traffic type `i` has `packets[i]` packets of
 * `packet_size_bits[i]` bits and GBRs `gbr_bps[2*i]`, `gbr_bps[2*i + 1]`.
 * On success `alphas_out[i]` holds the share of traffic `i` on path 1.
 *
 * # Safety
 * Array arguments must hold the documented number of elements; the output
 * pointers must be writable.
 */
enum MpsStatus mps_solve_interval(const double *bandwidth_hz,
                                  const double *snr_per_watt,
                                  double p_total_watts,
                                  size_t n_traffic,
                                  const uint64_t *packets,
                                  const uint64_t *packet_size_bits,
                                  const double *gbr_bps,
                                  double *alphas_out,
                                  double *p1_watts_out,
                                  double *objective_s_out);

#endif  /* MPSPLIT_H */

#ifndef LAYERED_RA_H
#define LAYERED_RA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LraStatus {
  LRA_STATUS_OK = 0,
  LRA_STATUS_NULL_POINTER = 1,
  LRA_STATUS_INVALID_ARGUMENT = 2,
  LRA_STATUS_BUFFER_TOO_SMALL = 3,
  LRA_STATUS_PANIC = 4,
} LraStatus;

/**
 * Opaque system configuration.
 */
typedef struct LraConfig LraConfig;

typedef struct LraSimSettings {
  uint64_t slots;
  uint64_t seed;
  /**
   * Worker threads; 0 uses all cores.
   */
  uint32_t workers;
  /**
   * Non-zero lets cancelled channels re-open for upper layers.
   */
  uint8_t reopen_blocked;
} LraSimSettings;

typedef struct LraEstimate {
  double mean;
  double std_error;
  uint64_t slots;
  uint64_t seed;
} LraEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a configuration with explicit per-layer arrival rates, powers and
 * rates (arrays of length `layers`, layer 1 first).
 *
 * # Safety
 * Array pointers must be valid for `layers` reads; `out` must be writable.
 */
enum LraStatus lra_config_new(size_t channels,
                              size_t layers,
                              const double *arrivals,
                              const double *powers,
                              const double *rates,
                              double gain_mean,
                              double noise_power,
                              size_t repetition,
                              struct LraConfig **out);

/**
 * Creates a configuration whose powers follow the target-SINR rule.
 *
 * # Safety
 * Array pointers must be valid for `layers` reads; `out` must be writable.
 */
enum LraStatus lra_config_new_target_sinr(size_t channels,
                                          size_t layers,
                                          const double *arrivals,
                                          const double *rates,
                                          double gamma_db,
                                          double gain_mean,
                                          double noise_power,
                                          size_t repetition,
                                          struct LraConfig **out);

/**
 * Releases a configuration. Null is ignored.
 *
 * # Safety
 * `cfg` must come from `lra_config_new*` and not be used afterwards.
 */
void lra_config_free(struct LraConfig *cfg);

/**
 * Number of layers, or 0 for a null handle.
 *
 * # Safety
 * `cfg` must be null or a live handle.
 */
size_t lra_config_num_layers(const struct LraConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live handle; `out` valid for `len` writes.
 */
enum LraStatus lra_config_powers(const struct LraConfig *cfg, double *out, size_t len);

/**
 * Replaces the per-layer rates.
 *
 * # Safety
 * `cfg` must be a live handle; `rates` valid for `len` reads.
 */
enum LraStatus lra_config_set_rates(struct LraConfig *cfg, const double *rates, size_t len);

/**
 * Capture probability of `layer` (1-based).
 *
 * # Safety
 * `cfg` must be a live handle; `out` writable.
 */
enum LraStatus lra_capture_prob(const struct LraConfig *cfg,
                                size_t layer,
                                uint8_t lower_bound,
                                double *out);

/**
 * Analytic throughput per layer and in total. `layer_out` may be null.
 *
 * # Safety
 * `cfg` must be a live handle; non-null outputs valid for writes.
 */
enum LraStatus lra_throughput(const struct LraConfig *cfg,
                              uint8_t lower_bound,
                              double *layer_out,
                              size_t len,
                              double *total_out);

/**
 * Throughput-maximizing per-layer rates. Pass `grid_points = 0` for the
 * default search settings.
 *
 * # Safety
 * `cfg` must be a live handle; `rates_out` valid for `len` writes.
 */
enum LraStatus lra_optimize_rates(const struct LraConfig *cfg,
                                  double rate_max,
                                  size_t grid_points,
                                  double refine_tol,
                                  uint8_t lower_bound,
                                  double *rates_out,
                                  size_t len,
                                  double *total_out);

/**
 * Per-layer failure probabilities Ψ and cascaded outage. Either output may
 * be null.
 *
 * # Safety
 * `cfg` must be a live handle; non-null outputs valid for `len` writes.
 */
enum LraStatus lra_outage(const struct LraConfig *cfg,
                          double *psi_out,
                          double *outage_out,
                          size_t len);

/**
 * Monte Carlo throughput estimate. `layer_out` may be null.
 *
 * # Safety
 * Pointers must be valid; `layer_out` valid for `len` writes if non-null.
 */
enum LraStatus lra_simulate_throughput(const struct LraConfig *cfg,
                                       const struct LraSimSettings *settings,
                                       struct LraEstimate *layer_out,
                                       size_t len,
                                       struct LraEstimate *total_out);

/**
 * Monte Carlo outage estimate per layer.
 *
 * # Safety
 * Pointers must be valid; `out` valid for `len` writes.
 */
enum LraStatus lra_simulate_outage(const struct LraConfig *cfg,
                                   const struct LraSimSettings *settings,
                                   struct LraEstimate *out,
                                   size_t len);

/**
 * SINR threshold `2^rate − 1`.
 */
double lra_snr_gap(double rate);

/**
 * Probability that a tagged copy collides with one of `users − 1` others.
 *
 * # Safety
 * `out` must be writable.
 */
enum LraStatus lra_collision_prob(size_t users, size_t channels, size_t repetition, double *out);

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to fit) and returns the full message length
 * excluding the NUL. Returns 0 if there is no message.
 *
 * # Safety
 * `buf` must be null or valid for `len` writes.
 */
size_t lra_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lra_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAYERED_RA_H */

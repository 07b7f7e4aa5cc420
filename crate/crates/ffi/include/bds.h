#ifndef BDS_FFI_H
#define BDS_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BdsStatus {
  BDS_STATUS_OK = 0,
  BDS_STATUS_NULL_POINTER = 1,
  BDS_STATUS_INVALID_ARGUMENT = 2,
  BDS_STATUS_INVALID_CONFIG = 3,
  BDS_STATUS_IO = 4,
  BDS_STATUS_OUT_OF_RANGE = 5,
  BDS_STATUS_PANIC = 6,
} BdsStatus;

typedef enum BdsChannelModel {
  BDS_CHANNEL_MODEL_UMTS = 0,
  BDS_CHANNEL_MODEL_WINNER_II = 1,
} BdsChannelModel;

/**
 * Opaque scenario configuration.
 */
typedef struct BdsConfig BdsConfig;

/**
 * Opaque result of one simulated arm.
 */
typedef struct BdsRun BdsRun;

typedef struct BdsUsageRecord {
  uint64_t ue_id;
  double initial_j;
  /**
   * Nonzero when the battery ran out during the run.
   */
  uint8_t depleted;
  /**
   * Depletion instant in seconds; NaN when `depleted == 0`.
   */
  double depleted_at_s;
  double remaining_j;
  uint64_t bytes_sent_direct;
  uint64_t bytes_sent_d2d;
  uint64_t bytes_relayed_for_others;
} BdsUsageRecord;

typedef struct BdsLinkBudgetRow {
  enum BdsChannelModel model;
  double cellular_db;
  double d2d_db;
  double pl_diff_db;
  double tx_diff_db;
} BdsLinkBudgetRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *bds_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bds_version(void);

/**
 * # Safety
 * `s` must come from a function of this library documented as returning
 * an owned string, and must not be freed twice.
 */
void bds_string_free(char *s);

/**
 * Creates a configuration holding the default scenario.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum BdsStatus bds_config_new_default(struct BdsConfig **out);

/**
 * Parses `key = value` config text on top of the defaults.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum BdsStatus bds_config_parse(const char *text, struct BdsConfig **out);

/**
 * Loads a config file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BdsStatus bds_config_from_file(const char *path, struct BdsConfig **out);

/**
 * Sets one key. The whole config is revalidated; on failure it is left
 * unchanged.
 *
 * # Safety
 * `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum BdsStatus bds_config_set(struct BdsConfig *cfg, const char *key, const char *value);

/**
 * Config rendered as `key = value` text; free with [`bds_string_free`].
 * Returns NULL when `cfg` is NULL.
 *
 * # Safety
 * `cfg` must be NULL or a live handle.
 */
char *bds_config_to_text(const struct BdsConfig *cfg);

/**
 * # Safety
 * `cfg` must be NULL or a handle from this library not yet freed.
 */
void bds_config_free(struct BdsConfig *cfg);

/**
 * Simulates one arm of replication `replication`. Battery levels are
 * snapshotted at each of the `n_targets` times in `targets_s` (may be NULL
 * when `n_targets == 0`).
 *
 * # Safety
 * `cfg` must be a live handle, `targets_s` must point to `n_targets`
 * doubles, and `out` must be writable.
 */
enum BdsStatus bds_run(const struct BdsConfig *cfg,
                       uint64_t replication,
                       bool cooperation,
                       const double *targets_s,
                       size_t n_targets,
                       struct BdsRun **out);

/**
 * Number of UE records in a run; 0 for NULL.
 *
 * # Safety
 * `run` must be NULL or a live handle.
 */
size_t bds_run_len(const struct BdsRun *run);

/**
 * Number of associations created during the run; 0 for NULL.
 *
 * # Safety
 * `run` must be NULL or a live handle.
 */
size_t bds_run_association_count(const struct BdsRun *run);

/**
 * Copies record `index` into `out`.
 *
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
enum BdsStatus bds_run_record(const struct BdsRun *run, size_t index, struct BdsUsageRecord *out);

/**
 * Fraction of UEs depleted before `target_s`.
 *
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
enum BdsStatus bds_run_outage_probability(const struct BdsRun *run, double target_s, double *out);

/**
 * Mean remaining battery of survivors at `target_s` as a fraction of
 * capacity; NaN when nobody survived. `target_s` must be one of the
 * snapshot times passed to [`bds_run`].
 *
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
enum BdsStatus bds_run_valueless_battery(const struct BdsRun *run, double target_s, double *out);

/**
 * Per-UE records as CSV; free with [`bds_string_free`]. NULL for NULL.
 *
 * # Safety
 * `run` must be NULL or a live handle.
 */
char *bds_run_records_csv(const struct BdsRun *run);

/**
 * # Safety
 * `run` must be NULL or a handle from this library not yet freed.
 */
void bds_run_free(struct BdsRun *run);

/**
 * Writes the link-budget comparison rows into `rows` (capacity `cap`)
 * and their count into `n`. `cfg` may be NULL for the defaults.
 *
 * # Safety
 * `rows` must point to `cap` writable rows; `n` must be writable.
 */
enum BdsStatus bds_link_budget(const struct BdsConfig *cfg,
                               struct BdsLinkBudgetRow *rows,
                               size_t cap,
                               size_t *n);

/**
 * WINNER II C2 NLOS path loss in dB.
 *
 * # Safety
 * `out` must be writable.
 */
enum BdsStatus bds_pl_winner_c2(double d_m,
                                double h_enb_m,
                                double h_ue_m,
                                double fc_ghz,
                                double *out);

/**
 * WINNER II A1 NLOS path loss in dB.
 *
 * # Safety
 * `out` must be writable.
 */
enum BdsStatus bds_pl_winner_a1(double d_m, uint32_t n_walls, double fc_ghz, double *out);

/**
 * Open-loop uplink transmit power in dBm for the power settings of `cfg`
 * (NULL for defaults).
 *
 * # Safety
 * `cfg` must be NULL or a live handle; `out` writable.
 */
enum BdsStatus bds_uplink_tx_power_dbm(const struct BdsConfig *cfg,
                                       double pl_total_db,
                                       bool is_d2d,
                                       double *out);

/**
 * Energy of one burst in joules.
 *
 * # Safety
 * `cfg` must be NULL or a live handle; `out` writable.
 */
enum BdsStatus bds_burst_energy_j(const struct BdsConfig *cfg,
                                  double pl_total_db,
                                  bool is_d2d,
                                  uint64_t bytes,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BDS_FFI_H */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef WBRIER_H
#define WBRIER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WbStatus {
  WB_STATUS_OK = 0,
  WB_STATUS_NULL_POINTER = 1,
  /**
   * An argument is out of range or unparsable.
   */
  WB_STATUS_INVALID_ARGUMENT = 2,
  WB_STATUS_INVALID_DATA = 3,
  /**
   * The quantity is undefined for this data, e.g. one outcome class.
   */
  WB_STATUS_DEGENERATE = 4,
  WB_STATUS_BOOTSTRAP = 5,
  WB_STATUS_PANIC = 6,
} WbStatus;

/**
 * Predicted risks with their observed outcomes.
 */
typedef struct WbDataset WbDataset;

/**
 * A weight distribution over cutoffs.
 */
typedef struct WbWeight WbWeight;

typedef struct WbDecomposition {
  double mcb_w;
  double dsc_w;
  double unc_w;
  double bs_w;
  /**
   * `bs_w - (mcb_w - dsc_w + unc_w)`
   */
  double residual;
  size_t bins;
} WbDecomposition;

typedef struct WbInterval {
  double estimate;
  double lower;
  double upper;
  double level;
} WbInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `wb_*` call on the same thread.
 */
const char *wb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wb_version(void);

/**
 * Copies `n` risks in [0, 1] and outcomes (0 or 1) into a new dataset.
 *
 * # Safety
 * `risks` and `outcomes` must point to `n` readable elements.
 */
enum WbStatus wb_dataset_new(const double *risks,
                             const uint8_t *outcomes,
                             size_t n,
                             struct WbDataset **out);

/**
 * Attaches one cluster id per row, enabling cluster bootstrap.
 *
 * # Safety
 * `data` must be a live dataset handle and `ids` must point to `n` elements.
 */
enum WbStatus wb_dataset_set_clusters(struct WbDataset *data, const uint32_t *ids, size_t n);

/**
 * # Safety
 * `data` must be a live dataset handle.
 */
enum WbStatus wb_dataset_len(const struct WbDataset *data, size_t *out);

/**
 * # Safety
 * `data` must be NULL or a handle from `wb_dataset_new` not yet freed.
 */
void wb_dataset_free(struct WbDataset *data);

/**
 * Parses `uniform`, `beta:a,b`, `point:c` or `mix:w1*spec1+w2*spec2…`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string.
 */
enum WbStatus wb_weight_parse(const char *spec, struct WbWeight **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum WbStatus wb_weight_uniform(struct WbWeight **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum WbStatus wb_weight_beta(double a, double b, struct WbWeight **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum WbStatus wb_weight_point_mass(double c, struct WbWeight **out);

/**
 * # Safety
 * `weight` must be NULL or a live weight handle.
 */
void wb_weight_free(struct WbWeight *weight);

/**
 * `F_w(r)`.
 *
 * # Safety
 * `weight` must be a live weight handle.
 */
enum WbStatus wb_weight_cdf(const struct WbWeight *weight, double r, double *out);

/**
 * `m_w(r)`, the integral of `c w(c)` over `[0, r]`.
 *
 * # Safety
 * `weight` must be a live weight handle.
 */
enum WbStatus wb_weight_inc_moment(const struct WbWeight *weight, double r, double *out);

/**
 * # Safety
 * `weight` must be a live weight handle.
 */
enum WbStatus wb_weight_mean(const struct WbWeight *weight, double *out);

/**
 * Cutoff `C / (C + B)` from the four outcome costs.
 *
 * # Safety
 * `out` must be writable.
 */
enum WbStatus wb_cutoff_from_costs(double c_fp, double c_tn, double c_fn, double c_tp, double *out);

/**
 * # Safety
 * `data` must be a live dataset handle.
 */
enum WbStatus wb_loss_at(const struct WbDataset *data, double c, double *out);

/**
 * # Safety
 * `data` must be a live dataset handle.
 */
enum WbStatus wb_net_benefit_opt_in(const struct WbDataset *data, double c, double *out);

/**
 * # Safety
 * `data` must be a live dataset handle.
 */
enum WbStatus wb_net_benefit_opt_out(const struct WbDataset *data, double c, double *out);

/**
 * # Safety
 * `data` must be a live dataset handle.
 */
enum WbStatus wb_auc(const struct WbDataset *data, double *out);

/**
 * # Safety
 * `data` must be a live dataset handle.
 */
enum WbStatus wb_ipa(const struct WbDataset *data, double *out);

/**
 * # Safety
 * `data` must be a live dataset handle.
 */
enum WbStatus wb_spiegelhalter_z(const struct WbDataset *data, double *out);

/**
 * # Safety
 * `data` and `weight` must be live handles.
 */
enum WbStatus wb_weighted_brier(const struct WbDataset *data,
                                const struct WbWeight *weight,
                                double *out);

/**
 * Weighted Brier score under the assumption that the model is calibrated.
 *
 * # Safety
 * `data` and `weight` must be live handles.
 */
enum WbStatus wb_weighted_brier_calibrated(const struct WbDataset *data,
                                           const struct WbWeight *weight,
                                           double *out);

/**
 * # Safety
 * `data` and `weight` must be live handles.
 */
enum WbStatus wb_scaled_weighted_brier(const struct WbDataset *data,
                                       const struct WbWeight *weight,
                                       double *out);

/**
 * # Safety
 * `data` and `weight` must be live handles.
 */
enum WbStatus wb_h_measure(const struct WbDataset *data,
                           const struct WbWeight *weight,
                           double *out);

/**
 * # Safety
 * `data` and `weight` must be live handles.
 */
enum WbStatus wb_spiegelhalter_z_weighted(const struct WbDataset *data,
                                          const struct WbWeight *weight,
                                          double *out);

/**
 * `bins = 0` groups by distinct risk values; otherwise `bins` quantile
 * groups. `per_sample` selects the per-observation MCB estimator.
 *
 * # Safety
 * `data` and `weight` must be live handles.
 */
enum WbStatus wb_decompose(const struct WbDataset *data,
                           const struct WbWeight *weight,
                           size_t bins,
                           bool per_sample,
                           struct WbDecomposition *out);

/**
 * Normal-approximation interval for the weighted Brier score.
 *
 * # Safety
 * `data` and `weight` must be live handles.
 */
enum WbStatus wb_asymptotic_ci_bsw(const struct WbDataset *data,
                                   const struct WbWeight *weight,
                                   double level,
                                   struct WbInterval *out);

/**
 * Percentile bootstrap interval for the weighted Brier score. With
 * `by_cluster` whole clusters are resampled.
 *
 * # Safety
 * `data` and `weight` must be live handles.
 */
enum WbStatus wb_bootstrap_bsw(const struct WbDataset *data,
                               const struct WbWeight *weight,
                               size_t replicates,
                               uint64_t seed,
                               double level,
                               bool by_cluster,
                               struct WbInterval *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WBRIER_H */

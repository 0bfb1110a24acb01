#ifndef LGDKIT_H
#define LGDKIT_H

/* Generated by cbindgen from lgdkit-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum LgdStatus {
  LgdStatus_Ok = 0,
  LgdStatus_NullPointer = 1,
  LgdStatus_InvalidArgument = 2,
  LgdStatus_Io = 3,
  LgdStatus_Utf8 = 4,
  LgdStatus_Internal = 5,
} LgdStatus;

/**
 * Opaque dataset handle.
 */
typedef struct LgdDataset LgdDataset;

/**
 * Opaque fitted-model handle.
 */
typedef struct LgdModel LgdModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the message of the last failing call on this thread into `buffer`
 * (NUL-terminated, truncated to `capacity`). Returns the full message
 * length in bytes, excluding the terminator; 0 when no error is recorded.
 */
size_t lgd_last_error_message(char *buffer, size_t capacity);

/**
 * Release a string allocated by this library.
 *
 * # Safety
 * `s` must have been returned by an `lgd_*` function and not yet freed.
 */
void lgd_string_free(char *s);

/**
 * Generate a synthetic mixture dataset with the default component shapes.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum LgdStatus lgd_dataset_generate(size_t n,
                                    double pi_proxy,
                                    uint64_t seed,
                                    struct LgdDataset **out);

/**
 * Load a dataset CSV (canonical schema) and apply the default
 * sample-selection filters.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid.
 */
enum LgdStatus lgd_dataset_load_csv(const char *path, struct LgdDataset **out);

/**
 * Number of records.
 *
 * # Safety
 * `dataset` must be a live handle; `out` must be valid.
 */
enum LgdStatus lgd_dataset_len(const struct LgdDataset *dataset, size_t *out);

/**
 * Realized proxy share of the dataset.
 *
 * # Safety
 * `dataset` must be a live handle; `out` must be valid.
 */
enum LgdStatus lgd_dataset_mixture_proportion(const struct LgdDataset *dataset, double *out);

/**
 * Copy the label vector into `out` (capacity `len`, must equal the dataset
 * length).
 *
 * # Safety
 * `dataset` must be a live handle; `out` must point to `len` doubles.
 */
enum LgdStatus lgd_dataset_labels(const struct LgdDataset *dataset, double *out, size_t len);

/**
 * Release a dataset handle.
 *
 * # Safety
 * `dataset` must have come from this library and not yet be freed.
 */
void lgd_dataset_free(struct LgdDataset *dataset);

/**
 * Fit a model family (`industry`, `size`, `linear`, `forest`, `info`).
 *
 * # Safety
 * `dataset` must be live; `family` NUL-terminated; `out` valid.
 */
enum LgdStatus lgd_model_fit(const struct LgdDataset *dataset,
                             const char *family,
                             uint64_t seed,
                             struct LgdModel **out);

/**
 * Predict every dataset row into `out` (capacity `len`, must equal the
 * dataset length). Predictions lie in [0,1].
 *
 * # Safety
 * Handles must be live; `out` must point to `len` doubles.
 */
enum LgdStatus lgd_model_predict(const struct LgdModel *model,
                                 const struct LgdDataset *dataset,
                                 double *out,
                                 size_t len);

/**
 * Serialize a fitted model as JSON; release with [`lgd_string_free`].
 *
 * # Safety
 * `model` must be live; `out` valid.
 */
enum LgdStatus lgd_model_to_json(const struct LgdModel *model, char **out);

/**
 * Restore a fitted model from JSON produced by [`lgd_model_to_json`].
 *
 * # Safety
 * `json` must be NUL-terminated; `out` valid.
 */
enum LgdStatus lgd_model_from_json(const char *json, struct LgdModel **out);

/**
 * Release a model handle.
 *
 * # Safety
 * `model` must have come from this library and not yet be freed.
 */
void lgd_model_free(struct LgdModel *model);

/**
 * Stratified k-fold cross-validation of one family; writes the
 * fold-averaged RMSE, R², and MAE.
 *
 * # Safety
 * `dataset` must be live; `family` NUL-terminated; outputs valid.
 */
enum LgdStatus lgd_cross_validate(const struct LgdDataset *dataset,
                                  const char *family,
                                  size_t folds,
                                  uint64_t seed,
                                  double *out_rmse,
                                  double *out_r2,
                                  double *out_mae);

/**
 * Sturges bin count (rounded form).
 */
size_t lgd_sturges_bins(size_t n);

/**
 * Histogram entropy of `values` over `bins` equal-width bins, in bits;
 * `corrected` applies the finite-sample bias correction.
 *
 * # Safety
 * `values` must point to `len` doubles; `out_bits` must be valid.
 */
enum LgdStatus lgd_histogram_entropy(const double *values,
                                     size_t len,
                                     size_t bins,
                                     bool corrected,
                                     double *out_bits);

/**
 * Bias-corrected mutual information between two equal-length columns, in
 * bits (floored at zero).
 *
 * # Safety
 * `x` and `y` must each point to `len` doubles; `out_bits` must be valid.
 */
enum LgdStatus lgd_mutual_information(const double *x,
                                      const double *y,
                                      size_t len,
                                      size_t bins,
                                      double *out_bits);

/**
 * Closed-form Gaussian mutual information `-1/2 log2(1 - rho^2)`, bits.
 *
 * # Safety
 * `out_bits` must be valid.
 */
enum LgdStatus lgd_gaussian_mi(double rho, double *out_bits);

/**
 * Information-theoretic R² ceiling `1 - exp(-2 I)` for `mi_bits` of mutual
 * information.
 */
double lgd_r2_ceiling(double mi_bits);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LGDKIT_H */

#ifndef RISKLAB_H
#define RISKLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call. The first four values match the CLI exit codes.
 */
typedef enum RisklabStatus {
  RISKLAB_STATUS_OK = 0,
  RISKLAB_STATUS_CONFIG = 1,
  RISKLAB_STATUS_IO = 2,
  RISKLAB_STATUS_NUMERICAL = 3,
  RISKLAB_STATUS_NULL_POINTER = 4,
  RISKLAB_STATUS_BUFFER_TOO_SMALL = 5,
  RISKLAB_STATUS_PANIC = 6,
} RisklabStatus;

/**
 * Penalty applied by `risklab_glm_fit`.
 */
typedef enum RisklabPenalty {
  RISKLAB_PENALTY_NONE = 0,
  RISKLAB_PENALTY_RIDGE = 1,
  RISKLAB_PENALTY_LASSO = 2,
} RisklabPenalty;

/**
 * A cohort: feature matrix, column names and binary labels.
 */
typedef struct RisklabDataset RisklabDataset;

/**
 * A fitted logistic regression.
 */
typedef struct RisklabGlm RisklabGlm;

/**
 * A trained feedforward network.
 */
typedef struct RisklabNn RisklabNn;

/**
 * Training options for `risklab_nn_train`.
 */
typedef struct RisklabNnOptions {
  /**
   * Hidden layer sizes; `hidden_len` entries.
   */
  const size_t *hidden;
  size_t hidden_len;
  /**
   * Activation tag such as `sigmoid`, `tanh`, `relu(0.1)` or `selu(1.67,1.05)`;
   * null means sigmoid.
   */
  const char *activation;
  double learning_rate;
  size_t epochs;
  size_t batch_size;
  uint64_t seed;
} RisklabNnOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next risklab call on the same thread.
 */
const char *risklab_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *risklab_version(void);

/**
 * Simulates the study cohort: `n` rows from `seed`, with intercept `intercept`.
 *
 * # Safety
 * `out` must point to writable storage for one handle.
 */
enum RisklabStatus risklab_dataset_simulate(size_t n,
                                            uint64_t seed,
                                            double intercept,
                                            struct RisklabDataset **out);

/**
 * Builds a dataset from a row-major `rows × cols` matrix and 0/1 labels.
 * `names` may be null, giving columns `x1, x2, ...`; all columns are continuous.
 *
 * # Safety
 * `values` must hold `rows * cols` doubles, `labels` `rows` bytes, and
 * `names` (when non-null) `cols` NUL-terminated strings.
 */
enum RisklabStatus risklab_dataset_from_rows(const double *values,
                                             size_t rows,
                                             size_t cols,
                                             const uint8_t *labels,
                                             const char *const *names,
                                             struct RisklabDataset **out);

/**
 * Reads a CSV with a header row and a final `label` column.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a writable handle slot.
 */
enum RisklabStatus risklab_dataset_read_csv(const char *path, struct RisklabDataset **out);

/**
 * # Safety
 * `data` must be a live dataset handle and `path` a NUL-terminated string.
 */
enum RisklabStatus risklab_dataset_write_csv(const struct RisklabDataset *data, const char *path);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `data` must be null or a live dataset handle.
 */
size_t risklab_dataset_rows(const struct RisklabDataset *data);

/**
 * Number of feature columns, or 0 for a null handle.
 *
 * # Safety
 * `data` must be null or a live dataset handle.
 */
size_t risklab_dataset_cols(const struct RisklabDataset *data);

/**
 * # Safety
 * `data` must be null or a handle not yet freed.
 */
void risklab_dataset_free(struct RisklabDataset *data);

/**
 * Fits a logistic regression. `lambda` is ignored for `RISKLAB_PENALTY_NONE`.
 *
 * # Safety
 * `data` must be a live dataset handle; `out` a writable handle slot.
 */
enum RisklabStatus risklab_glm_fit(const struct RisklabDataset *data,
                                   enum RisklabPenalty penalty,
                                   double lambda,
                                   struct RisklabGlm **out);

/**
 * Number of coefficients (intercept plus one per feature).
 *
 * # Safety
 * `fit` must be null or a live GLM handle.
 */
size_t risklab_glm_coefficient_count(const struct RisklabGlm *fit);

/**
 * Copies the intercept and slopes into `out`.
 *
 * # Safety
 * `fit` must be a live GLM handle and `out` hold `len` doubles.
 */
enum RisklabStatus risklab_glm_coefficients(const struct RisklabGlm *fit, double *out, size_t len);

/**
 * Copies the Wald standard errors and p-values (intercept first). Fails for
 * penalized fits.
 *
 * # Safety
 * `fit` must be a live GLM handle; each buffer must hold `len` doubles.
 */
enum RisklabStatus risklab_glm_inference(const struct RisklabGlm *fit,
                                         double *std_errors,
                                         double *p_values,
                                         size_t len);

/**
 * Writes P(event) for every row of `data` into `out`.
 *
 * # Safety
 * Handles must be live; `out` must hold `len` doubles.
 */
enum RisklabStatus risklab_glm_predict(const struct RisklabGlm *fit,
                                       const struct RisklabDataset *data,
                                       double *out,
                                       size_t len);

/**
 * # Safety
 * `fit` must be a live GLM handle and `path` a NUL-terminated string.
 */
enum RisklabStatus risklab_glm_save(const struct RisklabGlm *fit, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` a writable handle slot.
 */
enum RisklabStatus risklab_glm_load(const char *path, struct RisklabGlm **out);

/**
 * # Safety
 * `fit` must be null or a handle not yet freed.
 */
void risklab_glm_free(struct RisklabGlm *fit);

/**
 * Options matching the simulation-study defaults (one hidden layer of three).
 */
struct RisklabNnOptions risklab_nn_default_options(void);

/**
 * Trains a two-class network on `data`.
 *
 * # Safety
 * `data` must be a live dataset handle, `options` valid for reading and its
 * pointers valid as documented on `RisklabNnOptions`; `out` a writable slot.
 */
enum RisklabStatus risklab_nn_train(const struct RisklabDataset *data,
                                    const struct RisklabNnOptions *options,
                                    struct RisklabNn **out);

/**
 * Writes P(event) for every row of `data` into `out`.
 *
 * # Safety
 * Handles must be live; `out` must hold `len` doubles.
 */
enum RisklabStatus risklab_nn_predict(const struct RisklabNn *model,
                                      const struct RisklabDataset *data,
                                      double *out,
                                      size_t len);

/**
 * Garson importances, one per input feature, summing to one. Fails unless
 * the network has exactly one hidden layer.
 *
 * # Safety
 * `model` must be a live network handle and `out` hold `len` doubles.
 */
enum RisklabStatus risklab_nn_garson(const struct RisklabNn *model, double *out, size_t len);

/**
 * # Safety
 * `model` must be a live network handle and `path` a NUL-terminated string.
 */
enum RisklabStatus risklab_nn_save(const struct RisklabNn *model, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` a writable handle slot.
 */
enum RisklabStatus risklab_nn_load(const char *path, struct RisklabNn **out);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void risklab_nn_free(struct RisklabNn *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RISKLAB_H */

#ifndef CONFBOOST_H
#define CONFBOOST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CbBase {
  CB_BASE_RLC = 0,
  CB_BASE_STUMP = 1,
  CB_BASE_LMC = 2,
} CbBase;

typedef enum CbConstruction {
  CB_CONSTRUCTION_HE_GC = 0,
  CB_CONSTRUCTION_SECSH_GC = 1,
} CbConstruction;

typedef enum CbStatus {
  CB_STATUS_OK = 0,
  CB_STATUS_NULL_ARGUMENT = 1,
  CB_STATUS_INVALID_ARGUMENT = 2,
  CB_STATUS_IO = 3,
  CB_STATUS_PARSE = 4,
  CB_STATUS_TRAINING = 5,
  CB_STATUS_PROTOCOL = 6,
  CB_STATUS_PANIC = 7,
} CbStatus;

/**
 * Opaque dataset handle.
 */
typedef struct CbDataset CbDataset;

/**
 * Opaque model handle.
 */
typedef struct CbModel CbModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a
 * successful one. Valid until the next call into this library.
 */
const char *cb_last_error_message(void);

/**
 * Loads a CSV with a header row. `label_column` may be NULL (last column),
 * a 0-based index or a header name. `positive` may be NULL when the labels
 * are already +1/-1 or 1/0.
 *
 * # Safety
 * String arguments must be NUL-terminated or NULL where allowed; `out`
 * must point to writable storage.
 */
enum CbStatus cb_dataset_load_csv(const char *path,
                                  const char *label_column,
                                  const char *positive,
                                  struct CbDataset **out);

/**
 * One of the bundled datasets ("ionosphere", "credit").
 *
 * # Safety
 * `name` must be NUL-terminated; `out` must point to writable storage.
 */
enum CbStatus cb_dataset_builtin(const char *name, struct CbDataset **out);

/**
 * Seeded synthetic dataset with `n` records and `k` features.
 *
 * # Safety
 * `out` must point to writable storage.
 */
enum CbStatus cb_dataset_synthetic(size_t n, size_t k, uint64_t seed, struct CbDataset **out);

/**
 * Record count, or 0 for a NULL handle.
 *
 * # Safety
 * `ds` must be NULL or a live handle.
 */
size_t cb_dataset_n(const struct CbDataset *ds);

/**
 * Feature count, or 0 for a NULL handle.
 *
 * # Safety
 * `ds` must be NULL or a live handle.
 */
size_t cb_dataset_k(const struct CbDataset *ds);

/**
 * # Safety
 * `ds` must be NULL or a handle not yet freed.
 */
void cb_dataset_free(struct CbDataset *ds);

/**
 * Plaintext boosting with `rounds` base classifiers. `seed` picks the RLC
 * pool and is ignored by the other bases.
 *
 * # Safety
 * `ds` must be a live handle; `out` must point to writable storage.
 */
enum CbStatus cb_train_plain(const struct CbDataset *ds,
                             enum CbBase base,
                             size_t rounds,
                             uint64_t seed,
                             struct CbModel **out);

/**
 * Runs the two-party protocol in-process. `p_max` of 0 means 2 * `tau`;
 * `frac_bits` and `key_bits` of 0 take the defaults.
 *
 * # Safety
 * `ds` must be a live handle; `out` must point to writable storage.
 */
enum CbStatus cb_train_secure(const struct CbDataset *ds,
                              enum CbConstruction construction,
                              size_t tau,
                              size_t p_max,
                              uint32_t frac_bits,
                              uint32_t key_bits,
                              struct CbModel **out);

/**
 * Number of base classifiers in the model, or 0 for a NULL handle.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t cb_model_len(const struct CbModel *model);

/**
 * Predicts +1 or -1 for one raw (unstandardized) record of `len` features.
 *
 * # Safety
 * `x` must point to `len` doubles; `label` to writable storage.
 */
enum CbStatus cb_model_predict(const struct CbModel *model,
                               const double *x,
                               size_t len,
                               int8_t *label);

/**
 * Writes the model as JSON into a new string owned by the caller.
 *
 * # Safety
 * `json` must point to writable storage.
 */
enum CbStatus cb_model_to_json(const struct CbModel *model, char **json);

/**
 * Parses a model written by [`cb_model_to_json`] or the CLI.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must point to writable storage.
 */
enum CbStatus cb_model_from_json(const char *json, struct CbModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void cb_model_free(struct CbModel *model);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void cb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONFBOOST_H */

/* Public C API of the coper shared library.
 *
 * Multi-view clustering toolkit: linear CCA/LDA with within-cluster
 * permutation augmentation, multi-view pseudo-labeling, a small end-to-end
 * neural variant with a correlation objective, perturbation diagnostics, and
 * the experiment runners behind the CLI.
 *
 * Conventions:
 *   - every fallible function returns coper_status; COPER_OK == 0 means
 *     success, anything else is an error code. coper_last_error() returns a
 *     thread-local message for the most recent failure on this thread.
 *   - objects are opaque handles released with the matching *_free call.
 *   - experiment runners exchange JSON documents as UTF-8 strings; strings
 *     returned through char** are owned by the caller and released with
 *     coper_string_free.
 *   - matrices passed as raw buffers are dense row-major doubles.
 */

#ifndef COPER_COPER_H
#define COPER_COPER_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum coper_status {
  COPER_OK = 0,
  COPER_ERR_INVALID_SHAPE = 2,
  COPER_ERR_PARSE = 3,
  COPER_ERR_ALIGNMENT = 4,
  COPER_ERR_INVALID_SPEC = 5,
  COPER_ERR_INVALID_LABELS = 6,
  COPER_ERR_INVALID_PARAMETER = 7,
  COPER_ERR_SINGULAR_COVARIANCE = 8,
  COPER_ERR_NOT_SYMMETRIC = 9,
  COPER_ERR_EIGEN_FAILURE = 10,
  COPER_ERR_NOT_PSD = 11,
  COPER_ERR_SINGULAR_SCATTER = 12,
  COPER_ERR_INVALID_PLAN = 13,
  COPER_ERR_INVALID_STATE = 14,
  COPER_ERR_CONFIG = 15,
  COPER_ERR_TRAINING_DIVERGED = 16,
  COPER_ERR_IO = 17,
  COPER_ERR_UNKNOWN = 99
} coper_status;

const char* coper_status_name(coper_status status);

/* Thread-local message for the last failing call on this thread. */
const char* coper_last_error(void);

void coper_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

typedef struct coper_dataset coper_dataset;

coper_status coper_dataset_load(const char* manifest_path, coper_dataset** out);
coper_status coper_dataset_save(const coper_dataset* ds, const char* dir,
                                const char* name);
void coper_dataset_free(coper_dataset* ds);

size_t coper_dataset_n_samples(const coper_dataset* ds);
size_t coper_dataset_n_views(const coper_dataset* ds);
size_t coper_dataset_view_dim(const coper_dataset* ds, size_t view);
int coper_dataset_k(const coper_dataset* ds);
int coper_dataset_has_labels(const coper_dataset* ds);
/* labels buffer must hold n_samples ints */
coper_status coper_dataset_labels(const coper_dataset* ds, int* out);
/* view buffer must hold view_dim * n_samples doubles (row-major) */
coper_status coper_dataset_view(const coper_dataset* ds, size_t view, double* out);

/* ---- core operations on raw buffers ------------------------------------ */

typedef struct coper_cca_model coper_cca_model;

/* x1: d1 x n, x2: d2 x n, row-major, one column per sample */
coper_status coper_fit_cca(const double* x1, size_t d1, const double* x2, size_t d2,
                           size_t n, size_t dim, double ridge, coper_cca_model** out);
void coper_cca_model_free(coper_cca_model* model);
size_t coper_cca_dim(const coper_cca_model* model);
coper_status coper_cca_correlations(const coper_cca_model* model, double* out);
/* side: 0 = first view, 1 = second view; out is dim x n row-major */
coper_status coper_cca_transform(const coper_cca_model* model, int side,
                                 const double* x, size_t d, size_t n, double* out);

coper_status coper_correlation_loss(const double* hv, size_t dv, const double* hw,
                                    size_t dw, size_t n, double ridge, double* out);

/* x: n x d row-major samples; labels_out holds n ints */
coper_status coper_kmeans(const double* x, size_t n, size_t d, int k, int restarts,
                          int max_iter, double tol, uint64_t seed, int* labels_out,
                          double* inertia_out);

coper_status coper_accuracy(const int* pred, const int* truth, size_t n, double* out);
coper_status coper_adjusted_rand_index(const int* pred, const int* truth, size_t n,
                                       double* out);
coper_status coper_normalized_mutual_information(const int* pred, const int* truth,
                                                 size_t n, double* out);

/* ---- experiment runners ------------------------------------------------ */

/* Generates a dataset per options_json and writes it to disk; see the CLI
 * `gen` command for the option names. */
coper_status coper_run_gen(const char* options_json, char** result_json);

/* The remaining runners operate on a loaded dataset. options_json may be
 * "{}" for defaults. out_dir may be NULL to skip file output (train only
 * writes files when out_dir is given). */
coper_status coper_run_linear_bench(const coper_dataset* ds, const char* options_json,
                                    char** result_json);
coper_status coper_run_casestudy(const coper_dataset* ds, const char* options_json,
                                 char** result_json);
coper_status coper_run_perturb_sweep(const coper_dataset* ds, const char* options_json,
                                     char** result_json);
coper_status coper_run_train(const coper_dataset* ds, const char* options_json,
                             const char* out_dir, char** result_json);
coper_status coper_run_ablate(const coper_dataset* ds, const char* options_json,
                              char** result_json);
coper_status coper_run_tune(const coper_dataset* ds, const char* options_json,
                            char** result_json);

/* pred/truth are single-column integer CSV files; embedding_csv may be NULL */
coper_status coper_run_metrics(const char* pred_csv, const char* truth_csv,
                               const char* embedding_csv, char** result_json);

/* Writes <stem>.json and, when the result carries rows, <stem>.csv. */
coper_status coper_write_report(const char* result_json, const char* out_dir,
                                const char* stem);

#ifdef __cplusplus
}
#endif

#endif /* COPER_COPER_H */

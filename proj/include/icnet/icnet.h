#ifndef ICNET_H
#define ICNET_H

/* C interface to the icnet library. Objects are opaque handles released by
 * the matching *_free function. Functions return an icnet_status; on failure
 * icnet_last_error() describes the problem for the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define ICNET_API __declspec(dllexport)
#else
#  define ICNET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  ICNET_OK = 0,
  ICNET_ERR_USAGE = 2,     /* invalid argument or configuration */
  ICNET_ERR_DATA = 3,      /* unreadable or schema-violating input */
  ICNET_ERR_NUMERICAL = 4, /* optimisation or evaluation failure */
  ICNET_ERR_INTERNAL = 5
} icnet_status;

typedef struct icnet_dataset icnet_dataset;
typedef struct icnet_truth icnet_truth;
typedef struct icnet_model icnet_model;
typedef struct icnet_path icnet_path;
typedef struct icnet_benchmark icnet_benchmark;

ICNET_API const char* icnet_version(void);
ICNET_API const char* icnet_last_error(void);

/* ---- datasets ---- */

/* extra_columns: additional covariate names to accept (may be NULL). */
ICNET_API icnet_status icnet_dataset_read_csv(const char* path, const char* const* extra_columns, size_t n_extra,
                                              icnet_dataset** out);
ICNET_API icnet_status icnet_dataset_write_csv(const icnet_dataset* data, const char* path);
/* z is row-major n x d; delta1/delta2 are 0/1 indicators. */
ICNET_API icnet_status icnet_dataset_from_arrays(size_t n, size_t d, const double* z, const double* u, const double* v,
                                                 const int* delta1, const int* delta2, icnet_dataset** out);
ICNET_API size_t icnet_dataset_size(const icnet_dataset* data);
ICNET_API size_t icnet_dataset_dim(const icnet_dataset* data);
ICNET_API void icnet_dataset_free(icnet_dataset* data);

/* ---- simulation ---- */

typedef struct {
  size_t n;
  int d;
  int model; /* 1 or 2 */
  double gompertz_gamma;
  double gompertz_lam;
  int inspections;
  double tau; /* <= 0 selects the pilot 0.95 event-time quantile */
  uint64_t seed;
} icnet_sim_config;

ICNET_API void icnet_sim_config_default(icnet_sim_config* cfg);
ICNET_API icnet_status icnet_simulate(const icnet_sim_config* cfg, icnet_dataset** data, icnet_truth** truth);
ICNET_API icnet_status icnet_truth_write_json(const icnet_truth* truth, const char* path);
ICNET_API icnet_status icnet_truth_read_json(const char* path, icnet_truth** out);
ICNET_API size_t icnet_truth_size(const icnet_truth* truth);
/* Copies m(z_i) into out[0..size). */
ICNET_API icnet_status icnet_truth_risk(const icnet_truth* truth, double* out);
ICNET_API void icnet_truth_free(icnet_truth* truth);

/* ---- fitting ---- */

#define ICNET_MAX_HIDDEN 8

typedef struct {
  int epochs;
  int outer_iters;
  double learning_rate;
  double hierarchy_M;
  double penalty_lambda;
  int n_hidden;
  int hidden_widths[ICNET_MAX_HIDDEN];
  double init_scale;
  uint64_t seed;
  int standardize;
  double objective_tol;
  double icm_tol;
  int icm_max_iter;
} icnet_fit_config;

ICNET_API void icnet_fit_config_default(icnet_fit_config* cfg);
ICNET_API icnet_status icnet_fit(const icnet_dataset* data, const icnet_fit_config* cfg, icnet_model** out);

ICNET_API icnet_status icnet_model_save(const icnet_model* model, const char* path);
ICNET_API icnet_status icnet_model_load(const char* path, icnet_model** out);
ICNET_API size_t icnet_model_dim(const icnet_model* model);
ICNET_API size_t icnet_model_n_selected(const icnet_model* model);
/* Zero-based indices of the selected features into out[0..n_selected). */
ICNET_API icnet_status icnet_model_selected(const icnet_model* model, int* out);
ICNET_API double icnet_model_hierarchy_violation(const icnet_model* model);
/* z is row-major n x dim; out receives n risk scores. */
ICNET_API icnet_status icnet_model_predict_risk(const icnet_model* model, const double* z, size_t n, double* out);
/* out receives n x n_times survival probabilities, row-major. */
ICNET_API icnet_status icnet_model_predict_survival(const icnet_model* model, const double* z, size_t n,
                                                    const double* times, size_t n_times, double* out);
/* Survival curves (long format id,t,S) for every row of a covariate CSV whose
 * covariate columns must match the model's. */
ICNET_API icnet_status icnet_predict_csv(const icnet_model* model, const char* covariates_csv,
                                         const char* const* extra_columns, size_t n_extra, const double* times,
                                         size_t n_times, const char* out_path);
ICNET_API void icnet_model_free(icnet_model* model);

/* ---- regularisation path ---- */

typedef enum { ICNET_IBS_PAPER = 0, ICNET_IBS_UNIFORM = 1 } icnet_ibs_weighting;

typedef struct {
  double lambda_start; /* <= 0: chosen automatically */
  double lambda_start_factor;
  double multiplier;
  double val_fraction;
  int max_path_length;
  double dense_active_fraction;
  int bisection_steps;
  icnet_ibs_weighting weighting;
  int ibs_grid_n;
} icnet_path_config;

ICNET_API void icnet_path_config_default(icnet_path_config* cfg);
ICNET_API icnet_status icnet_fit_path(const icnet_dataset* data, const icnet_fit_config* fit,
                                      const icnet_path_config* path, icnet_path** out);
ICNET_API size_t icnet_path_length(const icnet_path* path);
ICNET_API size_t icnet_path_best_index(const icnet_path* path);
ICNET_API icnet_status icnet_path_entry(const icnet_path* path, size_t k, double* lambda, int* n_active,
                                        double* train_loglik, double* val_ibs);
ICNET_API icnet_status icnet_path_limits(const icnet_path* path, double* t1, double* t2);
/* Copy of the model at step k. */
ICNET_API icnet_status icnet_path_model(const icnet_path* path, size_t k, icnet_model** out);
ICNET_API icnet_status icnet_path_write_csv(const icnet_path* path, const char* file);
ICNET_API void icnet_path_free(icnet_path* path);

/* ---- evaluation ---- */

typedef struct {
  double t1, t2; /* t1 >= t2 selects the 0.05/0.95 quantiles of the data borders */
  icnet_ibs_weighting weighting;
  int grid_n;
  int l2_grid_n;
} icnet_eval_config;

typedef struct {
  double ibs;
  double t1, t2;
  size_t dropped;
  /* Filled only when a truth sidecar is supplied; NaN otherwise. */
  double r2;
  double l2;
  double tp;
  double tn;
} icnet_metrics;

ICNET_API void icnet_eval_config_default(icnet_eval_config* cfg);
/* censoring_data estimates the censoring survival; NULL uses data itself.
 * truth may be NULL. */
ICNET_API icnet_status icnet_evaluate(const icnet_model* model, const icnet_dataset* data,
                                      const icnet_dataset* censoring_data, const icnet_truth* truth,
                                      const icnet_eval_config* cfg, icnet_metrics* out);

/* ---- replicated simulation benchmark ---- */

typedef struct {
  size_t n;
  int replicate;
  uint64_t seed;
  double lambda;
  int n_active;
  double ibs, l2, r2, tp, tn;
  double seconds;
} icnet_replicate;

typedef void (*icnet_progress_fn)(const icnet_replicate* result, void* user);

typedef struct {
  int model; /* 1 or 2 */
  const size_t* n_values;
  size_t n_count;
  int replicates;
  uint64_t seed;
  int d;
  int threads; /* <= 0: ICNET_THREADS or the hardware concurrency */
  icnet_progress_fn progress;
  void* progress_user;
} icnet_benchmark_config;

ICNET_API void icnet_benchmark_config_default(icnet_benchmark_config* cfg);
ICNET_API icnet_status icnet_benchmark_run(const icnet_benchmark_config* cfg, const icnet_fit_config* fit,
                                           const icnet_path_config* path, icnet_benchmark** out);
ICNET_API size_t icnet_benchmark_count(const icnet_benchmark* b);
ICNET_API icnet_status icnet_benchmark_result(const icnet_benchmark* b, size_t k, icnet_replicate* out);
/* Mean and sample sd of a metric ("ibs", "l2", "r2", "tp", "tn", "n_active", "lambda") at sample size n. */
ICNET_API icnet_status icnet_benchmark_summary(const icnet_benchmark* b, size_t n, const char* metric, double* mean,
                                               double* sd);
ICNET_API icnet_status icnet_benchmark_write_csv(const icnet_benchmark* b, const char* path);
ICNET_API void icnet_benchmark_free(icnet_benchmark* b);

#ifdef __cplusplus
}
#endif

#endif

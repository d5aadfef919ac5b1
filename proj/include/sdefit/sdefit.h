/*
 * sdefit — parameter estimation for stochastic differential equations from
 * partial, noisy, discrete-time observations, using innovation estimators
 * driven by continuous-discrete Local Linearization filters.
 *
 * C interface of the shared library. All objects are opaque handles owned by
 * the library; every fallible call returns a status code (or NULL for
 * constructors) and leaves a human-readable message in sdefit_last_error(),
 * which is thread-local and valid until the next failing call on the same
 * thread.
 */

#ifndef SDEFIT_H
#define SDEFIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SDEFIT_BUILD)
#define SDEFIT_API __declspec(dllexport)
#else
#define SDEFIT_API __declspec(dllimport)
#endif
#else
#define SDEFIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. */
enum {
  SDEFIT_OK = 0,
  SDEFIT_ERR_INVALID_ARGUMENT = 1,
  SDEFIT_ERR_UNKNOWN_MODEL = 2,
  SDEFIT_ERR_CONFIG = 3,
  SDEFIT_ERR_NUMERIC = 4,
  SDEFIT_ERR_RUNTIME = 5
};

/* Estimator modes. */
enum {
  SDEFIT_MODE_EXACT = 0,
  SDEFIT_MODE_CONVENTIONAL = 1,
  SDEFIT_MODE_UNIFORM = 2,
  SDEFIT_MODE_ADAPTIVE = 3
};

/* Simulation schemes. */
enum { SDEFIT_SCHEME_EULER = 0, SDEFIT_SCHEME_LL = 1 };

typedef struct sdefit_model sdefit_model;
typedef struct sdefit_series sdefit_series;
typedef struct sdefit_experiment sdefit_experiment;

SDEFIT_API const char* sdefit_version(void);
SDEFIT_API const char* sdefit_last_error(void);

/* ---- model registry ----------------------------------------------------
 * Registered systems: "ex1", "ex2" (scalar, closed-form moments available),
 * "ex3", "ex4" (planar Van der Pol variants). theta == NULL or theta_len == 0
 * selects the reference parameter values.
 */
SDEFIT_API sdefit_model* sdefit_model_create(const char* id, const double* theta,
                                             size_t theta_len);
SDEFIT_API void sdefit_model_free(sdefit_model* model);
SDEFIT_API int sdefit_model_state_dim(const sdefit_model* model);
SDEFIT_API int sdefit_model_obs_dim(const sdefit_model* model);
SDEFIT_API int sdefit_model_param_dim(const sdefit_model* model);
SDEFIT_API int sdefit_model_default_theta(const sdefit_model* model, double* out,
                                          size_t len);
SDEFIT_API int sdefit_model_theta_box(const sdefit_model* model, double* lo, double* hi,
                                      size_t len);
/* Copies the parameter name into buf (NUL-terminated, truncating). */
SDEFIT_API int sdefit_model_param_name(const sdefit_model* model, int index, char* buf,
                                       size_t len);
/* 1 when the model has closed-form conditional moments (exact mode legal). */
SDEFIT_API int sdefit_model_has_exact(const sdefit_model* model);

/* ---- simulation ---------------------------------------------------------
 * Simulates one latent path on the fine grid {t0 + n·fine_dt} at the model's
 * reference parameters and subsamples it at {t0 + k·delta} with observation
 * noise. Deterministic in (seed, replication); the Wiener and noise streams
 * are independent substreams.
 */
SDEFIT_API sdefit_series* sdefit_simulate_series(const sdefit_model* model, double delta,
                                                 double horizon, double fine_dt, int scheme,
                                                 uint64_t seed, uint32_t replication);
SDEFIT_API void sdefit_series_free(sdefit_series* series);
SDEFIT_API size_t sdefit_series_count(const sdefit_series* series);
SDEFIT_API int sdefit_series_get(const sdefit_series* series, size_t k, double* t,
                                 double* z_out, size_t z_len);

/* ---- likelihood and estimation ------------------------------------------
 * mode: SDEFIT_MODE_*. h is the uniform fine-grid step (used by
 * SDEFIT_MODE_UNIFORM only). The innovation negative log-likelihood is
 * U = (M-1)ln 2π + Σ_{k>=1} [ln det Σ_k + ν_kᵀ Σ_k⁻¹ ν_k].
 */
SDEFIT_API int sdefit_innovation_nll(const sdefit_model* model, const sdefit_series* series,
                                     const double* theta, size_t theta_len, int mode,
                                     double h, double* nll_out);
SDEFIT_API int sdefit_estimate(const sdefit_model* model, const sdefit_series* series,
                               const double* theta_init, size_t theta_len, int mode,
                               double h, int max_evals, double* theta_out, double* nll_out,
                               int* converged_out);

/* ---- experiment driver --------------------------------------------------
 * config_text is the sectioned key=value format documented in the README.
 * After a successful run the handle owns a set of named tables
 * (estimates.csv, summary.csv, histogram_*.csv, steps.csv, manifest.txt);
 * table text pointers stay valid until the handle is freed.
 */
SDEFIT_API sdefit_experiment* sdefit_experiment_create(const char* config_text);
/* Convergence study on a fixed dataset; tables: convergence.csv, slopes.csv,
 * manifest.txt. */
SDEFIT_API sdefit_experiment* sdefit_convergence_create(const char* model_id,
                                                        const double* h_ladder,
                                                        size_t h_count, double delta,
                                                        double horizon, double fine_dt,
                                                        uint64_t seed);
SDEFIT_API void sdefit_experiment_free(sdefit_experiment* experiment);
SDEFIT_API int sdefit_experiment_run(sdefit_experiment* experiment, int threads);
SDEFIT_API int sdefit_experiment_table_count(const sdefit_experiment* experiment);
SDEFIT_API const char* sdefit_experiment_table_name(const sdefit_experiment* experiment,
                                                    int index);
SDEFIT_API const char* sdefit_experiment_table_text(const sdefit_experiment* experiment,
                                                    const char* name);
/* Output directory requested by the config ("" when unset). */
SDEFIT_API const char* sdefit_experiment_out_dir(const sdefit_experiment* experiment);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SDEFIT_H */

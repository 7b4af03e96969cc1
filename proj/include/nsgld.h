/* C interface to the nsgld shared library.
 *
 * Every function that can fail returns an nsgld_status; 0 means success.
 * On failure the output parameters are untouched and nsgld_last_error()
 * returns a message for the calling thread. Handles are opaque; free each
 * with its matching _free function (NULL is accepted and ignored).
 */
#ifndef NSGLD_H
#define NSGLD_H

#include <stdint.h>

#if defined(_WIN32)
#define NSGLD_API __declspec(dllexport)
#else
#define NSGLD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nsgld_status {
  NSGLD_OK = 0,
  NSGLD_ERR_INVALID_ARGUMENT = 1,
  NSGLD_ERR_CONFIG = 2,
  NSGLD_ERR_IO = 3,
  NSGLD_ERR_NUMERIC = 4,
  NSGLD_ERR_SADDLE_STRUCTURE = 5,
  NSGLD_ERR_ALL_DIVERGED = 6,
  NSGLD_ERR_INTERNAL = 7
} nsgld_status;

/* Message for the most recent failure on the calling thread ("" if none). */
NSGLD_API const char* nsgld_last_error(void);

/* Process exit-code convention: 0 ok; 2 bad config/arguments/file; 3 every
 * chain diverged; 4 numeric or saddle-structure trouble. */
NSGLD_API int nsgld_exit_code(nsgld_status status);

/* Frees strings returned through char** outputs. */
NSGLD_API void nsgld_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Objectives                                                          */
/* ------------------------------------------------------------------ */

typedef struct nsgld_objective nsgld_objective;

/* Double-well potential on R^2; alpha has 2 entries (pass NULL for the
 * default 0.2, 0.2). */
NSGLD_API nsgld_status nsgld_objective_double_well(const double* alpha,
                                                   int n_alpha,
                                                   nsgld_objective** out);

/* F(x) = ||x||^2 / 2 in the given dimension. */
NSGLD_API nsgld_status nsgld_objective_quadratic(int dim,
                                                 nsgld_objective** out);

/* Bayesian ICA negative mean log-likelihood over a CSV dataset (rows are
 * samples, columns are channels). */
NSGLD_API nsgld_status nsgld_objective_ica_csv(const char* path,
                                               int has_header,
                                               nsgld_objective** out);

/* Same objective over a synthetic logistic-source dataset. */
NSGLD_API nsgld_status nsgld_objective_ica_synthetic(int n, int p,
                                                     uint64_t seed,
                                                     nsgld_objective** out);

NSGLD_API void nsgld_objective_free(nsgld_objective* obj);

/* State dimension (p*p for ICA over p channels). */
NSGLD_API int nsgld_objective_dim(const nsgld_objective* obj);

NSGLD_API nsgld_status nsgld_objective_value(const nsgld_objective* obj,
                                             const double* x, int dim,
                                             double* out);

NSGLD_API nsgld_status nsgld_objective_gradient(const nsgld_objective* obj,
                                                const double* x, int dim,
                                                double* out);

/* ------------------------------------------------------------------ */
/* Drift matrices A_J = I + J, J antisymmetric                         */
/* ------------------------------------------------------------------ */

typedef struct nsgld_drift nsgld_drift;

/* J = 0 (the reversible special case). */
NSGLD_API nsgld_status nsgld_drift_zero(int dim, nsgld_drift** out);

/* J from its strict upper triangle, row-major, dim*(dim-1)/2 entries. */
NSGLD_API nsgld_status nsgld_drift_from_upper(int dim, const double* upper,
                                              int n_upper, nsgld_drift** out);

/* Strict upper triangle iid N(0, (tau/dim)^2), mirrored below. */
NSGLD_API nsgld_status nsgld_drift_random(int dim, double tau, uint64_t seed,
                                          nsgld_drift** out);

NSGLD_API void nsgld_drift_free(nsgld_drift* drift);

/* Operator norm ||I + J||. */
NSGLD_API double nsgld_drift_norm(const nsgld_drift* drift);

/* Strict upper triangle of J copied into `upper` (n_upper must equal
 * dim*(dim-1)/2). */
NSGLD_API nsgld_status nsgld_drift_upper(const nsgld_drift* drift,
                                         double* upper, int n_upper);

/* ------------------------------------------------------------------ */
/* Ensemble simulation                                                 */
/* ------------------------------------------------------------------ */

typedef struct nsgld_run nsgld_run;

typedef struct nsgld_run_params {
  int use_schedule;    /* 0: constant eta; 1: eta_k = a / (b + c k) */
  double eta;
  double schedule_a;
  double schedule_b;
  double schedule_c;
  double beta;
  int batch_size;      /* 0 = full gradient */
  double grad_noise;   /* stddev of extra isotropic gradient noise */
  double divergence_norm;
  int n_chains;
  long max_iters;
  long checkpoint_every;
  uint64_t seed;
  const double* x0;    /* NULL: uniform ball of init_radius around 0 */
  double init_radius;
  int threads;
} nsgld_run_params;

/* Runs n_chains independent chains; results are identical for any thread
 * count. Divergence of every chain is reported per run row and by
 * nsgld_run_all_diverged, not as an error. */
NSGLD_API nsgld_status nsgld_run_ensemble(const nsgld_objective* obj,
                                          const nsgld_drift* drift,
                                          const nsgld_run_params* params,
                                          nsgld_run** out);

NSGLD_API void nsgld_run_free(nsgld_run* run);

NSGLD_API long nsgld_run_rows(const nsgld_run* run);

/* Checkpoint row: iteration, mean/std of F over alive chains, mean ||x||,
 * number of alive chains. Any output pointer may be NULL. */
NSGLD_API nsgld_status nsgld_run_row(const nsgld_run* run, long index,
                                     long* iter, double* mean_f, double* std_f,
                                     double* mean_norm_x, long* alive);

NSGLD_API int nsgld_run_all_diverged(const nsgld_run* run);

NSGLD_API double nsgld_run_wall_seconds(const nsgld_run* run);

/* Writes the checkpoint table (header iter,mean_F,std_F,mean_norm_x,alive). */
NSGLD_API nsgld_status nsgld_run_write_csv(const nsgld_run* run,
                                           const char* path);

NSGLD_API int nsgld_run_chains(const nsgld_run* run);

/* Final state of one chain; dim must equal the objective dimension. alive
 * may be NULL. */
NSGLD_API nsgld_status nsgld_run_final_state(const nsgld_run* run, int chain,
                                             double* x, int dim, int* alive);

/* ------------------------------------------------------------------ */
/* Spectral machinery                                                  */
/* ------------------------------------------------------------------ */

/* Magnitude of the unique negative eigenvalue of a symmetric dim x dim
 * saddle Hessian (row-major). */
NSGLD_API nsgld_status nsgld_mu_star(const double* hessian, int dim,
                                     double* out);

/* Same for (I+J) H; J given by its strict upper triangle. */
NSGLD_API nsgld_status nsgld_mu_star_j(const double* hessian, int dim,
                                       const double* upper, int n_upper,
                                       double* out);

/* Leading-order barrier-crossing rate; out receives lambda < 0. Pass
 * upper = NULL for J = 0. */
NSGLD_API nsgld_status nsgld_eyring_kramers_rate(const double* hess_saddle,
                                                 const double* hess_min,
                                                 int dim, double barrier,
                                                 double beta,
                                                 const double* upper,
                                                 int n_upper, double* out);

/* (1 + ||J||^2)^4 (mu* / mu*_J)^5; below 1 favors the non-reversible drift. */
NSGLD_API nsgld_status nsgld_complexity_ratio(const double* hess_saddle,
                                              const double* hess_min, int dim,
                                              double barrier,
                                              const double* upper, int n_upper,
                                              double* out);

/* Minimal lambda1 in the diag(-1, lambda1) normal form with rotation
 * strength a1 for which the ratio drops below 1. */
NSGLD_API nsgld_status nsgld_outperform_threshold(double a1, double* out);

/* CSV table lambda1,a1,mu_star,mu_star_J,ratio,verdict over the cross
 * product of the two input lists. */
NSGLD_API nsgld_status nsgld_spectral_sweep_csv(const double* lambda1,
                                                int n_lambda1,
                                                const double* a1, int n_a1,
                                                char** out);

/* Dense finite-difference estimate of the generator spectral gap on
 * [lo, hi]^d with reflecting boundaries; d <= 2, 4 <= n <= 50 per axis.
 * upper describes J (NULL for J = 0). out receives lambda < 0. */
NSGLD_API nsgld_status nsgld_grid_generator_gap(const nsgld_objective* obj,
                                                const double* upper,
                                                int n_upper, double beta,
                                                double lo, double hi, int n,
                                                double* out);

/* ------------------------------------------------------------------ */
/* Theoretical constants and bounds                                    */
/* ------------------------------------------------------------------ */

typedef struct nsgld_problem_constants {
  double M;        /* gradient Lipschitz constant */
  double m;        /* dissipativity slope */
  double b;        /* dissipativity offset */
  double A;        /* value bound offset */
  double B;        /* gradient bound offset */
  double delta;    /* stochastic-gradient variance fraction, [0, 1) */
  double beta;     /* inverse temperature, needs beta > 3/m */
  int d;           /* state dimension */
  double lambda_J;   /* generator gap with drift J (negative) */
  double lambda_J0;  /* generator gap with J = 0 (negative) */
  double norm_AJ;    /* ||I + J|| >= 1 */
  double spectral_prefactor; /* heuristic scale for the derived C_hat */
  double universal_C;        /* heuristic universal constant in g_J */
} nsgld_problem_constants;

/* Bound report over the canonical constant set; CSV columns are
 * key,value,formula_label. Pass c_hat_zj = NULL to derive it from the
 * spectral prefactor and g_J. */
NSGLD_API nsgld_status nsgld_bound_report_csv(
    const nsgld_problem_constants* pc, double eps, long n,
    const double* c_hat_zj, char** out);

/* Same report rendered as aligned text with the input echo. */
NSGLD_API nsgld_status nsgld_bound_report_text(
    const nsgld_problem_constants* pc, double eps, long n,
    const double* c_hat_zj, char** out);

/* Single report entry by key (for example "I1" or "eta_max"). */
NSGLD_API nsgld_status nsgld_bound_value(const nsgld_problem_constants* pc,
                                         double eps, long n,
                                         const double* c_hat_zj,
                                         const char* key, double* out);

/* ------------------------------------------------------------------ */
/* Config-driven commands (the CLI surface)                            */
/* ------------------------------------------------------------------ */

/* Each command reads a key = value config file and writes its outputs under
 * the resolved output directory. out_dir, seed, and threads override the
 * config when non-NULL. NSGLD_ERR_ALL_DIVERGED still writes all outputs. */
NSGLD_API nsgld_status nsgld_cmd_run(const char* config_path,
                                     const char* out_dir, const uint64_t* seed,
                                     const int* threads);

NSGLD_API nsgld_status nsgld_cmd_sweep(const char* config_path,
                                       const char* out_dir,
                                       const uint64_t* seed,
                                       const int* threads);

NSGLD_API nsgld_status nsgld_cmd_ica(const char* config_path,
                                     const char* out_dir, const uint64_t* seed,
                                     const int* threads);

/* Bound report from a flat constants config; returns the text rendering and
 * additionally writes bounds.csv / bounds.txt when out_dir is non-NULL. */
NSGLD_API nsgld_status nsgld_cmd_constants(const char* config_path,
                                           const char* out_dir,
                                           char** text_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NSGLD_H */

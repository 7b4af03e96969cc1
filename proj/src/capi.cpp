// C ABI over the C++ core: opaque handles, status codes, thread-local error
// text. Every entry point traps exceptions; nothing C++ crosses the boundary.
#include "nsgld.h"

#include <cstring>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "../src/bounds.hpp"
#include "../src/config.hpp"
#include "../src/dynamics.hpp"
#include "../src/errors.hpp"
#include "../src/harness.hpp"
#include "../src/linalg.hpp"
#include "../src/objectives.hpp"
#include "../src/spectral.hpp"

struct nsgld_objective {
  std::unique_ptr<nsgld::Objective> obj;
};

struct nsgld_drift {
  nsgld::DriftMatrix drift;
};

struct nsgld_run {
  nsgld::RunRecord record;
  std::vector<nsgld::ChainState> finals;
  bool all_diverged = false;
  int dim = 0;
};

namespace {

thread_local std::string g_last_error;

nsgld_status to_status(nsgld::ErrorCode code) {
  using nsgld::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument:
      return NSGLD_ERR_INVALID_ARGUMENT;
    case ErrorCode::config:
      return NSGLD_ERR_CONFIG;
    case ErrorCode::io:
      return NSGLD_ERR_IO;
    case ErrorCode::numeric:
      return NSGLD_ERR_NUMERIC;
    case ErrorCode::saddle_structure:
      return NSGLD_ERR_SADDLE_STRUCTURE;
    case ErrorCode::all_diverged:
      return NSGLD_ERR_ALL_DIVERGED;
  }
  return NSGLD_ERR_INTERNAL;
}

template <typename F>
nsgld_status wrap(F&& body) {
  try {
    body();
    g_last_error.clear();
    return NSGLD_OK;
  } catch (const nsgld::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NSGLD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return NSGLD_ERR_INTERNAL;
  }
}

void require(bool ok, const char* message) {
  if (!ok) nsgld::fail(nsgld::ErrorCode::invalid_argument, message);
}

nsgld::Matrix matrix_from_row_major(const double* data, int dim,
                                    const char* what) {
  require(data != nullptr, "matrix pointer is null");
  require(dim >= 1, "matrix dimension must be >= 1");
  nsgld::Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = data[i * dim + j];
  nsgld::require_finite(m, what);
  return m;
}

nsgld::AntisymmetricMatrix j_from_upper(int dim, const double* upper,
                                        int n_upper) {
  require(dim >= 1, "dimension must be >= 1");
  const int expect = dim * (dim - 1) / 2;
  if (upper == nullptr) {
    require(n_upper == 0, "upper is null but n_upper is nonzero");
    return nsgld::AntisymmetricMatrix(dim);
  }
  require(n_upper == expect,
          "upper triangle length must be dim*(dim-1)/2");
  nsgld::AntisymmetricMatrix j(dim);
  int at = 0;
  for (int i = 0; i < dim; ++i)
    for (int k = i + 1; k < dim; ++k) j.set(i, k, upper[at++]);
  return j;
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nsgld::ProblemConstants convert(const nsgld_problem_constants* pc) {
  require(pc != nullptr, "problem constants pointer is null");
  nsgld::ProblemConstants out;
  out.M = pc->M;
  out.m = pc->m;
  out.b = pc->b;
  out.A = pc->A;
  out.B = pc->B;
  out.delta = pc->delta;
  out.beta = pc->beta;
  out.d = pc->d;
  out.lambda_J = pc->lambda_J;
  out.lambda_J0 = pc->lambda_J0;
  out.norm_AJ = pc->norm_AJ;
  out.spectral_prefactor = pc->spectral_prefactor;
  out.universal_C = pc->universal_C;
  return out;
}

std::optional<double> optional_double(const double* p) {
  return p ? std::optional<double>(*p) : std::nullopt;
}

nsgld::RunOverrides convert_overrides(const char* out_dir,
                                      const uint64_t* seed,
                                      const int* threads) {
  nsgld::RunOverrides ov;
  if (out_dir) ov.out_dir = std::string(out_dir);
  if (seed) ov.seed = *seed;
  if (threads) ov.threads = *threads;
  return ov;
}

nsgld_status command_status(const nsgld::RunOutcome& outcome) {
  if (outcome.status == nsgld::RunStatus::all_diverged) {
    g_last_error = "every chain diverged; outputs were still written to " +
                   outcome.out_dir;
    return NSGLD_ERR_ALL_DIVERGED;
  }
  g_last_error.clear();
  return NSGLD_OK;
}

}  // namespace

extern "C" {

const char* nsgld_last_error(void) { return g_last_error.c_str(); }

int nsgld_exit_code(nsgld_status status) {
  switch (status) {
    case NSGLD_OK:
      return 0;
    case NSGLD_ERR_INVALID_ARGUMENT:
    case NSGLD_ERR_CONFIG:
    case NSGLD_ERR_IO:
      return 2;
    case NSGLD_ERR_ALL_DIVERGED:
      return 3;
    case NSGLD_ERR_NUMERIC:
    case NSGLD_ERR_SADDLE_STRUCTURE:
    case NSGLD_ERR_INTERNAL:
      return 4;
  }
  return 4;
}

void nsgld_string_free(char* s) { delete[] s; }

/* Objectives */

nsgld_status nsgld_objective_double_well(const double* alpha, int n_alpha,
                                         nsgld_objective** out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    std::vector<double> a{0.2, 0.2};
    if (alpha != nullptr) {
      require(n_alpha >= 0, "n_alpha must be >= 0");
      a.assign(alpha, alpha + n_alpha);
    } else {
      require(n_alpha == 0, "alpha is null but n_alpha is nonzero");
    }
    *out = new nsgld_objective{nsgld::double_well(a)};
  });
}

nsgld_status nsgld_objective_quadratic(int dim, nsgld_objective** out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    *out = new nsgld_objective{nsgld::isotropic_quadratic(dim)};
  });
}

nsgld_status nsgld_objective_ica_csv(const char* path, int has_header,
                                     nsgld_objective** out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    require(path != nullptr, "path is null");
    *out = new nsgld_objective{
        nsgld::ica_objective(nsgld::load_csv(path, has_header != 0))};
  });
}

nsgld_status nsgld_objective_ica_synthetic(int n, int p, uint64_t seed,
                                           nsgld_objective** out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    nsgld::SyntheticIca syn = nsgld::synthetic_ica_dataset(n, p, seed);
    *out = new nsgld_objective{nsgld::ica_objective(std::move(syn.data))};
  });
}

void nsgld_objective_free(nsgld_objective* obj) { delete obj; }

int nsgld_objective_dim(const nsgld_objective* obj) {
  return obj ? obj->obj->dim() : 0;
}

nsgld_status nsgld_objective_value(const nsgld_objective* obj, const double* x,
                                   int dim, double* out) {
  return wrap([&] {
    require(obj != nullptr, "objective handle is null");
    require(x != nullptr && out != nullptr, "pointer argument is null");
    require(dim == obj->obj->dim(), "dimension mismatch");
    nsgld::Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = x[i];
    *out = obj->obj->value(v);
  });
}

nsgld_status nsgld_objective_gradient(const nsgld_objective* obj,
                                      const double* x, int dim, double* out) {
  return wrap([&] {
    require(obj != nullptr, "objective handle is null");
    require(x != nullptr && out != nullptr, "pointer argument is null");
    require(dim == obj->obj->dim(), "dimension mismatch");
    nsgld::Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = x[i];
    const nsgld::Vector g = obj->obj->gradient(v);
    for (int i = 0; i < dim; ++i) out[i] = g[i];
  });
}

/* Drift matrices */

nsgld_status nsgld_drift_zero(int dim, nsgld_drift** out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    require(dim >= 1, "dimension must be >= 1");
    *out = new nsgld_drift{nsgld::DriftMatrix(nsgld::AntisymmetricMatrix(dim))};
  });
}

nsgld_status nsgld_drift_from_upper(int dim, const double* upper, int n_upper,
                                    nsgld_drift** out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    *out = new nsgld_drift{nsgld::DriftMatrix(j_from_upper(dim, upper, n_upper))};
  });
}

nsgld_status nsgld_drift_random(int dim, double tau, uint64_t seed,
                                nsgld_drift** out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    *out = new nsgld_drift{
        nsgld::DriftMatrix(nsgld::random_gaussian_j(dim, tau, seed))};
  });
}

void nsgld_drift_free(nsgld_drift* drift) { delete drift; }

double nsgld_drift_norm(const nsgld_drift* drift) {
  return drift ? drift->drift.norm() : 0.0;
}

nsgld_status nsgld_drift_upper(const nsgld_drift* drift, double* upper,
                               int n_upper) {
  return wrap([&] {
    require(drift != nullptr, "drift handle is null");
    require(upper != nullptr, "output pointer is null");
    const std::vector<double>& u = drift->drift.j().upper();
    require(n_upper == static_cast<int>(u.size()),
            "upper triangle length must be dim*(dim-1)/2");
    for (int i = 0; i < n_upper; ++i) upper[i] = u[i];
  });
}

/* Ensemble simulation */

nsgld_status nsgld_run_ensemble(const nsgld_objective* obj,
                                const nsgld_drift* drift,
                                const nsgld_run_params* params,
                                nsgld_run** out) {
  return wrap([&] {
    require(obj != nullptr, "objective handle is null");
    require(drift != nullptr, "drift handle is null");
    require(params != nullptr && out != nullptr, "pointer argument is null");

    nsgld::ChainConfig cfg;
    if (params->use_schedule) {
      cfg.schedule = nsgld::StepSchedule{params->schedule_a, params->schedule_b,
                                         params->schedule_c};
    } else {
      cfg.eta = params->eta;
    }
    cfg.beta = params->beta;
    cfg.batch_size = params->batch_size;
    cfg.grad_noise = params->grad_noise;
    cfg.divergence_norm = params->divergence_norm;

    nsgld::EnsembleParams ens;
    ens.n_chains = params->n_chains;
    ens.max_iters = params->max_iters;
    ens.checkpoint_every = params->checkpoint_every;
    ens.seed = params->seed;
    ens.init_radius = params->init_radius;
    ens.threads = params->threads;
    if (params->x0 != nullptr) {
      const int dim = obj->obj->dim();
      nsgld::Vector x0(dim);
      for (int i = 0; i < dim; ++i) x0[i] = params->x0[i];
      ens.x0 = std::move(x0);
    }

    nsgld::EnsembleResult res =
        nsgld::run_ensemble(*obj->obj, drift->drift, cfg, ens);
    auto* run = new nsgld_run;
    run->record = std::move(res.record);
    run->finals = std::move(res.final_states);
    run->all_diverged = res.all_diverged;
    run->dim = obj->obj->dim();
    *out = run;
  });
}

void nsgld_run_free(nsgld_run* run) { delete run; }

long nsgld_run_rows(const nsgld_run* run) {
  return run ? static_cast<long>(run->record.rows.size()) : 0;
}

nsgld_status nsgld_run_row(const nsgld_run* run, long index, long* iter,
                           double* mean_f, double* std_f, double* mean_norm_x,
                           long* alive) {
  return wrap([&] {
    require(run != nullptr, "run handle is null");
    require(index >= 0 && index < static_cast<long>(run->record.rows.size()),
            "row index out of range");
    const nsgld::RunRow& row = run->record.rows[static_cast<std::size_t>(index)];
    if (iter) *iter = row.iter;
    if (mean_f) *mean_f = row.mean_f;
    if (std_f) *std_f = row.std_f;
    if (mean_norm_x) *mean_norm_x = row.mean_norm_x;
    if (alive) *alive = row.alive;
  });
}

int nsgld_run_all_diverged(const nsgld_run* run) {
  return run && run->all_diverged ? 1 : 0;
}

double nsgld_run_wall_seconds(const nsgld_run* run) {
  return run ? run->record.wall_time_seconds : 0.0;
}

nsgld_status nsgld_run_write_csv(const nsgld_run* run, const char* path) {
  return wrap([&] {
    require(run != nullptr, "run handle is null");
    require(path != nullptr, "path is null");
    nsgld::write_text_file(path, run->record.to_csv());
  });
}

int nsgld_run_chains(const nsgld_run* run) {
  return run ? static_cast<int>(run->finals.size()) : 0;
}

nsgld_status nsgld_run_final_state(const nsgld_run* run, int chain, double* x,
                                   int dim, int* alive) {
  return wrap([&] {
    require(run != nullptr, "run handle is null");
    require(x != nullptr, "output pointer is null");
    require(chain >= 0 && chain < static_cast<int>(run->finals.size()),
            "chain index out of range");
    require(dim == run->dim, "dimension mismatch");
    const nsgld::ChainState& s = run->finals[static_cast<std::size_t>(chain)];
    for (int i = 0; i < dim; ++i) x[i] = s.x[i];
    if (alive) *alive = s.alive ? 1 : 0;
  });
}

/* Spectral machinery */

nsgld_status nsgld_mu_star(const double* hessian, int dim, double* out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    *out = nsgld::mu_star(matrix_from_row_major(hessian, dim, "mu_star"));
  });
}

nsgld_status nsgld_mu_star_j(const double* hessian, int dim,
                             const double* upper, int n_upper, double* out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    *out = nsgld::mu_star_J(matrix_from_row_major(hessian, dim, "mu_star_J"),
                            j_from_upper(dim, upper, n_upper));
  });
}

nsgld_status nsgld_eyring_kramers_rate(const double* hess_saddle,
                                       const double* hess_min, int dim,
                                       double barrier, double beta,
                                       const double* upper, int n_upper,
                                       double* out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    const nsgld::SaddleData data{
        matrix_from_row_major(hess_saddle, dim, "eyring_kramers_rate"),
        matrix_from_row_major(hess_min, dim, "eyring_kramers_rate"), barrier};
    if (upper == nullptr) {
      require(n_upper == 0, "upper is null but n_upper is nonzero");
      *out = nsgld::eyring_kramers_rate(data, beta).lambda;
    } else {
      const nsgld::AntisymmetricMatrix j = j_from_upper(dim, upper, n_upper);
      *out = nsgld::eyring_kramers_rate(data, beta, &j).lambda;
    }
  });
}

nsgld_status nsgld_complexity_ratio(const double* hess_saddle,
                                    const double* hess_min, int dim,
                                    double barrier, const double* upper,
                                    int n_upper, double* out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    const nsgld::SaddleData data{
        matrix_from_row_major(hess_saddle, dim, "complexity_ratio"),
        matrix_from_row_major(hess_min, dim, "complexity_ratio"), barrier};
    *out = nsgld::complexity_ratio(data, j_from_upper(dim, upper, n_upper));
  });
}

nsgld_status nsgld_outperform_threshold(double a1, double* out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    *out = nsgld::outperform_threshold(a1);
  });
}

nsgld_status nsgld_spectral_sweep_csv(const double* lambda1, int n_lambda1,
                                      const double* a1, int n_a1, char** out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    require(lambda1 != nullptr && a1 != nullptr, "input list is null");
    require(n_lambda1 >= 1 && n_a1 >= 1, "input lists must be non-empty");
    const std::vector<double> l1(lambda1, lambda1 + n_lambda1);
    const std::vector<double> a(a1, a1 + n_a1);
    *out = copy_string(nsgld::spectral_sweep_csv(l1, a));
  });
}

nsgld_status nsgld_grid_generator_gap(const nsgld_objective* obj,
                                      const double* upper, int n_upper,
                                      double beta, double lo, double hi, int n,
                                      double* out) {
  return wrap([&] {
    require(obj != nullptr, "objective handle is null");
    require(out != nullptr, "output pointer is null");
    const nsgld::AntisymmetricMatrix j =
        j_from_upper(obj->obj->dim(), upper, n_upper);
    const nsgld::GridSpec grid{lo, hi, n};
    *out = nsgld::grid_generator_gap(*obj->obj, j, beta, grid).lambda;
  });
}

/* Theoretical constants */

nsgld_status nsgld_bound_report_csv(const nsgld_problem_constants* pc,
                                    double eps, long n, const double* c_hat_zj,
                                    char** out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    *out = copy_string(
        nsgld::emit_bound_report(convert(pc), eps, n, optional_double(c_hat_zj))
            .to_csv());
  });
}

nsgld_status nsgld_bound_report_text(const nsgld_problem_constants* pc,
                                     double eps, long n,
                                     const double* c_hat_zj, char** out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    *out = copy_string(
        nsgld::emit_bound_report(convert(pc), eps, n, optional_double(c_hat_zj))
            .to_text());
  });
}

nsgld_status nsgld_bound_value(const nsgld_problem_constants* pc, double eps,
                               long n, const double* c_hat_zj, const char* key,
                               double* out) {
  return wrap([&] {
    require(out != nullptr, "output pointer is null");
    require(key != nullptr, "key is null");
    *out = nsgld::emit_bound_report(convert(pc), eps, n,
                                    optional_double(c_hat_zj))
               .value(key);
  });
}

/* Config-driven commands */

nsgld_status nsgld_cmd_run(const char* config_path, const char* out_dir,
                           const uint64_t* seed, const int* threads) {
  nsgld::RunOutcome outcome;
  const nsgld_status st = wrap([&] {
    require(config_path != nullptr, "config path is null");
    outcome = nsgld::cmd_run(config_path,
                             convert_overrides(out_dir, seed, threads));
  });
  return st == NSGLD_OK ? command_status(outcome) : st;
}

nsgld_status nsgld_cmd_sweep(const char* config_path, const char* out_dir,
                             const uint64_t* seed, const int* threads) {
  nsgld::RunOutcome outcome;
  const nsgld_status st = wrap([&] {
    require(config_path != nullptr, "config path is null");
    outcome = nsgld::cmd_sweep(config_path,
                               convert_overrides(out_dir, seed, threads));
  });
  return st == NSGLD_OK ? command_status(outcome) : st;
}

nsgld_status nsgld_cmd_ica(const char* config_path, const char* out_dir,
                           const uint64_t* seed, const int* threads) {
  nsgld::RunOutcome outcome;
  const nsgld_status st = wrap([&] {
    require(config_path != nullptr, "config path is null");
    outcome = nsgld::cmd_ica(config_path,
                             convert_overrides(out_dir, seed, threads));
  });
  return st == NSGLD_OK ? command_status(outcome) : st;
}

nsgld_status nsgld_cmd_constants(const char* config_path, const char* out_dir,
                                 char** text_out) {
  return wrap([&] {
    require(config_path != nullptr, "config path is null");
    nsgld::RunOverrides ov;
    if (out_dir) ov.out_dir = std::string(out_dir);
    const std::string text = nsgld::cmd_constants(config_path, ov);
    if (text_out) *text_out = copy_string(text);
  });
}

} /* extern "C" */

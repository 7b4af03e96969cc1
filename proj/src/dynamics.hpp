#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "objectives.hpp"
#include "rng.hpp"

namespace nsgld {

// Per-iteration step size a / (b + c k).
struct StepSchedule {
  double a = 0.0;
  double b = 1.0;
  double c = 0.0;
};

struct ChainConfig {
  double eta = 0.1;                       // ignored when schedule is set
  std::optional<StepSchedule> schedule;
  double beta = 1.0;
  int batch_size = 0;                     // 0 = full gradient
  double grad_noise = 0.0;                // additive N(0, grad_noise^2) per axis
  double divergence_norm = 1e6;

  double eta_at(long k) const;
  void validate() const;
};

struct ChainState {
  Vector x;
  long iter = 0;
  bool alive = true;
};

// One NSGLD update
//   x <- x - eta_k (I + J) g + sqrt(2 eta_k / beta) xi
// consuming exactly one stochastic-gradient draw and one d-dimensional
// Gaussian draw from the stream, in that order. A non-finite or
// out-of-bounds state, or a degenerate-state error from the objective,
// marks the chain diverged.
void nsgld_step(const Objective& obj, const DriftMatrix& drift,
                const ChainConfig& cfg, ChainState& state, Rng& rng);

// The J = 0 special case (no drift application).
void sgld_step(const Objective& obj, const ChainConfig& cfg, ChainState& state,
               Rng& rng);

// Euler-Maruyama reference for the underlying SDE at step eta/substeps with
// full gradients; returns the state after each coarse step (n_steps + 1
// entries including the start). With substeps = 1 this reproduces the
// full-batch NSGLD iteration exactly.
std::vector<Vector> em_reference_path(const Objective& obj,
                                      const DriftMatrix& drift, double beta,
                                      double eta, const Vector& x0,
                                      long n_steps, int substeps, Rng& rng);

struct RunRow {
  long iter = 0;
  double mean_f = 0.0;
  double std_f = 0.0;
  double mean_norm_x = 0.0;
  long alive = 0;
};

struct RunRecord {
  std::vector<RunRow> rows;
  double wall_time_seconds = 0.0;
  std::string config_echo;  // filled by the harness

  std::string to_csv() const;  // header iter,mean_F,std_F,mean_norm_x,alive
};

struct EnsembleParams {
  int n_chains = 1;
  long max_iters = 0;
  long checkpoint_every = 1;
  std::uint64_t seed = 0;
  std::optional<Vector> x0;   // fixed start; otherwise ball init
  double init_radius = 0.0;   // uniform in the ball of this radius
  int threads = 1;
};

struct EnsembleResult {
  RunRecord record;
  std::vector<ChainState> final_states;  // one per chain, diverged included
  bool all_diverged = false;
};

// Runs n_chains independent chains with per-chain streams derived from
// (seed, chain index). Checkpoint statistics cover alive chains only;
// if every chain diverges the record stops at that checkpoint with NaN
// statistics and all_diverged is set. Results are byte-identical for a
// given (config, seed) regardless of thread count: chains are reduced in
// index order after all have finished.
EnsembleResult run_ensemble(const Objective& obj, const DriftMatrix& drift,
                            const ChainConfig& cfg,
                            const EnsembleParams& params);

// W2 distance between two equal-size empirical measures on the line:
// sqrt of the mean squared difference of the sorted samples.
double wasserstein2_1d(std::vector<double> a, std::vector<double> b);

}  // namespace nsgld

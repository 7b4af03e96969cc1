// Experiment front door: config resolution, single runs, parameter sweeps,
// the ICA recipe with source-recovery scoring, the spectral comparison
// sweep, and the constants report. Every run writes run.csv plus a fully
// resolved config.echo that reproduces run.csv byte for byte when rerun.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "objectives.hpp"

namespace nsgld {

// Flag-level overrides layered over the config file. Threads fall back to
// the NSGLD_LAB_THREADS environment variable, then to the hardware count.
struct RunOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

enum class RunStatus { ok, all_diverged };

struct RunOutcome {
  RunStatus status = RunStatus::ok;
  std::string out_dir;
  RunRecord record;
  double diverged_fraction = 0.0;
  // Objective value at each chain's final state (NaN when the chain died or
  // the state is degenerate), and for synthetic ICA the per-chain source
  // recovery score.
  std::vector<double> final_values;
  std::vector<double> recovery_scores;
};

// Process exit code for a failure class: config/io/invalid input = 2,
// every chain diverged = 3, numeric/structure failures = 4.
int exit_code(ErrorCode code);

// Single experiment: writes <out>/run.csv, <out>/config.echo, and
// <out>/curve.svg when output.svg is set.
RunOutcome run_experiment(const Config& cfg, const RunOverrides& ov);

// One run per sweep.values entry with the shared base seed; per-value
// subdirectories value_<v>/, a combined sweep.csv with a leading
// sweep_value column, and sweep_summary.csv with per-value status and
// divergence fraction. Per-value failures are recorded, not propagated.
RunOutcome run_sweep(const std::string& config_text, const std::string& origin,
                     const RunOverrides& ov);

// ICA recipe: a standard run on the negative mean log-likelihood plus
// <out>/ica_report.txt with per-chain final values and, for synthetic data,
// source-recovery scores.
RunOutcome run_ica(const Config& cfg, const RunOverrides& ov);

// Best-permutation minimum |Pearson correlation| between the sources
// recovered by the unmixing matrix and the true sources implied by the
// mixing matrix; sign- and permutation-invariant, needs p <= 8.
double ica_recovery_score(const Matrix& unmixing, const Dataset& data,
                          const Matrix& mixing);

// Cross product of the saddle normal form diag(-1, lambda1) with a single
// rotation block of strength a1: columns
// lambda1,a1,mu_star,mu_star_J,ratio,verdict. Requires lambda1 > 0.
std::string spectral_sweep_csv(const std::vector<double>& lambda1,
                               const std::vector<double>& a1);

// Reads the flat constants config (M, m, b, A, B, delta, beta, d, lambda_J,
// lambda_J0, norm_AJ, spectral_prefactor, universal_C, eps, n, optional
// C_hat_zJ) into a bound report.
BoundReport constants_from_config(const Config& cfg);

// File-based entry points used by the CLI; thin wrappers over the above.
RunOutcome cmd_run(const std::string& config_path, const RunOverrides& ov);
RunOutcome cmd_sweep(const std::string& config_path, const RunOverrides& ov);
RunOutcome cmd_ica(const std::string& config_path, const RunOverrides& ov);
// Writes bounds.csv and bounds.txt under ov.out_dir when set; returns the
// text block for stdout either way.
std::string cmd_constants(const std::string& config_path,
                          const RunOverrides& ov);

// Shared file helpers (created directories, io errors on failure).
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace nsgld

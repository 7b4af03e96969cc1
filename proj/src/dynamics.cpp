#include "dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "format.hpp"

namespace nsgld {

double ChainConfig::eta_at(long k) const {
  if (schedule) return schedule->a / (schedule->b + schedule->c * k);
  return eta;
}

void ChainConfig::validate() const {
  if (schedule) {
    if (!(schedule->a > 0.0) || !(schedule->b > 0.0) || !(schedule->c >= 0.0))
      fail(ErrorCode::invalid_argument,
           "chain config: schedule needs a > 0, b > 0, c >= 0");
  } else if (!(eta > 0.0) || !std::isfinite(eta)) {
    fail(ErrorCode::invalid_argument, "chain config: eta must be > 0");
  }
  if (!(beta > 0.0) || !std::isfinite(beta))
    fail(ErrorCode::invalid_argument, "chain config: beta must be > 0");
  if (batch_size < 0)
    fail(ErrorCode::invalid_argument, "chain config: batch_size must be >= 0");
  if (!(grad_noise >= 0.0))
    fail(ErrorCode::invalid_argument, "chain config: grad_noise must be >= 0");
  if (!(divergence_norm > 0.0))
    fail(ErrorCode::invalid_argument,
         "chain config: divergence_norm must be > 0");
}

namespace {

// Shared update body; drift == nullptr is the SGLD path.
void step_impl(const Objective& obj, const DriftMatrix* drift,
               const ChainConfig& cfg, ChainState& state, Rng& rng) {
  if (!state.alive) return;
  const int d = obj.dim();
  Vector g;
  try {
    g = obj.stochastic_gradient(state.x, cfg.batch_size, rng);
    if (cfg.grad_noise > 0.0)
      for (int i = 0; i < d; ++i) g[i] += cfg.grad_noise * rng.gaussian();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::numeric) {  // degenerate state: chain dies
      state.alive = false;
      state.iter += 1;
      return;
    }
    throw;
  }
  Vector xi(d);
  for (int i = 0; i < d; ++i) xi[i] = rng.gaussian();
  const double eta_k = cfg.eta_at(state.iter);
  const Vector descent = drift ? drift->apply(g) : g;
  state.x -= eta_k * descent;
  state.x += std::sqrt(2.0 * eta_k / cfg.beta) * xi;
  state.iter += 1;
  if (!state.x.allFinite() || state.x.norm() > cfg.divergence_norm)
    state.alive = false;
}

}  // namespace

void nsgld_step(const Objective& obj, const DriftMatrix& drift,
                const ChainConfig& cfg, ChainState& state, Rng& rng) {
  step_impl(obj, &drift, cfg, state, rng);
}

void sgld_step(const Objective& obj, const ChainConfig& cfg, ChainState& state,
               Rng& rng) {
  step_impl(obj, nullptr, cfg, state, rng);
}

std::vector<Vector> em_reference_path(const Objective& obj,
                                      const DriftMatrix& drift, double beta,
                                      double eta, const Vector& x0,
                                      long n_steps, int substeps, Rng& rng) {
  if (substeps < 1)
    fail(ErrorCode::invalid_argument, "em_reference_path: substeps must be >= 1");
  if (!(eta > 0.0) || !(beta > 0.0))
    fail(ErrorCode::invalid_argument,
         "em_reference_path: eta and beta must be > 0");
  const int d = obj.dim();
  if (x0.size() != d)
    fail(ErrorCode::invalid_argument, "em_reference_path: x0 size mismatch");
  const double h = eta / substeps;
  const double noise = std::sqrt(2.0 * h / beta);
  std::vector<Vector> path;
  path.reserve(n_steps + 1);
  Vector x = x0;
  path.push_back(x);
  for (long k = 0; k < n_steps; ++k) {
    for (int s = 0; s < substeps; ++s) {
      Vector g = obj.gradient(x);
      Vector xi(d);
      for (int i = 0; i < d; ++i) xi[i] = rng.gaussian();
      x -= h * drift.apply(g);
      x += noise * xi;
      if (!x.allFinite())
        fail(ErrorCode::numeric, "em_reference_path: diverged at step " +
                                     std::to_string(k) + " (non-finite state)");
    }
    path.push_back(x);
  }
  return path;
}

std::string RunRecord::to_csv() const {
  std::string out = "iter,mean_F,std_F,mean_norm_x,alive\n";
  for (const RunRow& r : rows) {
    out += std::to_string(r.iter);
    out += ',';
    out += format_double(r.mean_f);
    out += ',';
    out += format_double(r.std_f);
    out += ',';
    out += format_double(r.mean_norm_x);
    out += ',';
    out += std::to_string(r.alive);
    out += '\n';
  }
  return out;
}

namespace {

struct ChainSample {
  double f = 0.0;
  double norm = 0.0;
  bool alive = false;
};

RunRow reduce_checkpoint(long iter, const std::vector<ChainSample>& samples) {
  RunRow row;
  row.iter = iter;
  long n = 0;
  double sum_f = 0.0, sum_norm = 0.0;
  for (const ChainSample& s : samples)
    if (s.alive) {
      ++n;
      sum_f += s.f;
      sum_norm += s.norm;
    }
  row.alive = n;
  if (n == 0) {
    row.mean_f = row.std_f = row.mean_norm_x =
        std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  row.mean_f = sum_f / n;
  row.mean_norm_x = sum_norm / n;
  double ss = 0.0;
  for (const ChainSample& s : samples)
    if (s.alive) ss += (s.f - row.mean_f) * (s.f - row.mean_f);
  row.std_f = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return row;
}

}  // namespace

EnsembleResult run_ensemble(const Objective& obj, const DriftMatrix& drift,
                            const ChainConfig& cfg,
                            const EnsembleParams& params) {
  cfg.validate();
  if (params.n_chains < 1)
    fail(ErrorCode::invalid_argument, "run_ensemble: n_chains must be >= 1");
  if (params.max_iters < 0)
    fail(ErrorCode::invalid_argument, "run_ensemble: max_iters must be >= 0");
  if (params.checkpoint_every < 1)
    fail(ErrorCode::invalid_argument,
         "run_ensemble: checkpoint_every must be >= 1");
  const int d = obj.dim();
  if (drift.dim() != d)
    fail(ErrorCode::invalid_argument, "run_ensemble: drift dim mismatch");
  if (params.x0) {
    if (params.x0->size() != d)
      fail(ErrorCode::invalid_argument, "run_ensemble: x0 size mismatch");
    require_finite(*params.x0, "run_ensemble x0");
  } else if (!(params.init_radius > 0.0)) {
    fail(ErrorCode::invalid_argument,
         "run_ensemble: need x0 or a positive init_radius");
  }
  if (params.x0 && params.x0->norm() >= cfg.divergence_norm)
    fail(ErrorCode::invalid_argument,
         "run_ensemble: x0 lies outside the divergence bound");
  if (!params.x0 && params.init_radius >= cfg.divergence_norm)
    fail(ErrorCode::invalid_argument,
         "run_ensemble: init_radius must be below divergence_norm");

  // Checkpoint iterations: 0, every checkpoint_every, and the last iter.
  std::vector<long> checkpoints;
  for (long k = 0; k <= params.max_iters; k += params.checkpoint_every)
    checkpoints.push_back(k);
  if (checkpoints.back() != params.max_iters)
    checkpoints.push_back(params.max_iters);

  const auto t0 = std::chrono::steady_clock::now();
  const int n_chains = params.n_chains;
  // samples[c][k]: chain c at checkpoint k. Filled in parallel, reduced in
  // chain order so results do not depend on the thread count.
  std::vector<std::vector<ChainSample>> samples(
      n_chains, std::vector<ChainSample>(checkpoints.size()));
  std::vector<ChainState> finals(n_chains);
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run_chain = [&](int c) {
    Rng rng(params.seed, StreamPurpose::chain, static_cast<std::uint64_t>(c));
    ChainState state;
    if (params.x0) {
      state.x = *params.x0;
    } else {
      Vector x(d);
      for (int i = 0; i < d; ++i) x[i] = rng.gaussian();
      double nrm = x.norm();
      if (nrm == 0.0) nrm = 1.0;
      state.x = x * (params.init_radius *
                     std::pow(rng.uniform(), 1.0 / d) / nrm);
    }
    std::size_t next_cp = 0;
    auto record = [&](long k) {
      ChainSample& s = samples[c][next_cp];
      s.alive = state.alive;
      if (state.alive) {
        s.f = obj.value(state.x);
        s.norm = state.x.norm();
        if (!std::isfinite(s.f)) s.alive = false;
      }
      (void)k;
      ++next_cp;
    };
    record(0);
    for (long k = 0; k < params.max_iters; ++k) {
      nsgld_step(obj, drift, cfg, state, rng);
      if (next_cp < checkpoints.size() && checkpoints[next_cp] == k + 1)
        record(k + 1);
      if (!state.alive) break;
    }
    // A dead chain stays excluded at the remaining checkpoints.
    for (; next_cp < checkpoints.size(); ++next_cp)
      samples[c][next_cp].alive = false;
    finals[c] = std::move(state);
  };

  int threads = std::max(1, params.threads);
  threads = std::min<int>(threads, n_chains);
  if (threads == 1) {
    for (int c = 0; c < n_chains; ++c) run_chain(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int c = next.fetch_add(1); c < n_chains; c = next.fetch_add(1)) {
          try {
            run_chain(c);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  EnsembleResult result;
  result.final_states = std::move(finals);
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    std::vector<ChainSample> column(n_chains);
    for (int c = 0; c < n_chains; ++c) column[c] = samples[c][k];
    RunRow row = reduce_checkpoint(checkpoints[k], column);
    result.record.rows.push_back(row);
    if (row.alive == 0) {  // every chain diverged: stop with partial record
      result.all_diverged = true;
      break;
    }
  }
  result.record.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

double wasserstein2_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    fail(ErrorCode::invalid_argument, "wasserstein2_1d: empty sample set");
  if (a.size() != b.size())
    fail(ErrorCode::invalid_argument,
         "wasserstein2_1d: sample counts must match");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double dlt = a[i] - b[i];
    acc += dlt * dlt;
  }
  return std::sqrt(acc / a.size());
}

}  // namespace nsgld

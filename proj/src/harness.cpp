#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>
#include <utility>

#include "format.hpp"
#include "spectral.hpp"

namespace nsgld {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

int resolve_threads(const std::optional<int>& flag) {
  if (flag) {
    if (*flag < 1)
      fail(ErrorCode::invalid_argument, "--threads must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("NSGLD_LAB_THREADS")) {
    int out = 0;
    const std::string v(env);
    try {
      std::size_t pos = 0;
      out = std::stoi(v, &pos);
      if (pos != v.size()) out = 0;
    } catch (...) {
      out = 0;
    }
    if (out < 1)
      fail(ErrorCode::config,
           "NSGLD_LAB_THREADS must be a positive integer, got '" + v + "'");
    return out;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Everything a run needs after config resolution, plus the ordered resolved
// key list that becomes config.echo.
struct ResolvedExperiment {
  std::string objective_name;
  std::unique_ptr<Objective> objective;
  std::optional<SyntheticIca> synthetic;
  std::optional<Dataset> dataset;  // ica only
  AntisymmetricMatrix j{1};
  ChainConfig chain;
  EnsembleParams ensemble;
  std::string out_dir;
  bool emit_svg = false;
  std::vector<std::pair<std::string, std::string>> echo;
};

std::vector<double> parse_loose_doubles(const std::string& text,
                                        const std::string& origin) {
  std::vector<double> out;
  std::string piece;
  std::istringstream in(text);
  // Commas and whitespace both separate entries.
  std::string token;
  while (in >> token) {
    std::size_t start = 0;
    while (start <= token.size()) {
      const std::size_t comma = token.find(',', start);
      piece = token.substr(start, comma == std::string::npos
                                      ? std::string::npos
                                      : comma - start);
      if (!piece.empty()) {
        try {
          std::size_t pos = 0;
          out.push_back(std::stod(piece, &pos));
          if (pos != piece.size())
            fail(ErrorCode::config, origin + ": bad number '" + piece + "'");
        } catch (const Error&) {
          throw;
        } catch (...) {
          fail(ErrorCode::config, origin + ": bad number '" + piece + "'");
        }
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

AntisymmetricMatrix j_from_upper(int dim, const std::vector<double>& upper,
                                 const std::string& origin) {
  const std::size_t expect =
      static_cast<std::size_t>(dim) * (dim - 1) / 2;
  if (upper.size() != expect)
    fail(ErrorCode::config,
         origin + ": J upper triangle needs " + std::to_string(expect) +
             " entries for dimension " + std::to_string(dim) + ", got " +
             std::to_string(upper.size()));
  AntisymmetricMatrix j(dim);
  std::size_t at = 0;
  for (int i = 0; i < dim; ++i)
    for (int k = i + 1; k < dim; ++k) j.set(i, k, upper[at++]);
  return j;
}

ResolvedExperiment resolve_experiment(const Config& cfg,
                                      const RunOverrides& ov) {
  ResolvedExperiment rx;
  auto echo = [&rx](const std::string& key, const std::string& value) {
    rx.echo.emplace_back(key, value);
  };

  // Objective.
  rx.objective_name = cfg.get_string("objective.name");
  echo("objective.name", rx.objective_name);
  if (rx.objective_name == "double_well") {
    std::vector<double> alpha{0.2, 0.2};
    if (cfg.has("objective.alpha")) alpha = cfg.get_double_list("objective.alpha");
    rx.objective = double_well(alpha);
    echo("objective.alpha", join_doubles(alpha));
  } else if (rx.objective_name == "quadratic") {
    const long dim = cfg.get_long("objective.dim", 2);
    if (dim < 1 || dim > 4096)
      fail(ErrorCode::config, cfg.origin() + ": objective.dim out of range");
    rx.objective = isotropic_quadratic(static_cast<int>(dim));
    echo("objective.dim", std::to_string(dim));
  } else if (rx.objective_name == "ica") {
    const bool has_csv = cfg.has("objective.csv");
    const bool has_syn = cfg.has("objective.synthetic_n") ||
                         cfg.has("objective.synthetic_p");
    if (has_csv && has_syn)
      fail(ErrorCode::config,
           cfg.origin() +
               ": objective.csv and objective.synthetic_* are mutually "
               "exclusive");
    if (!has_csv && !has_syn)
      fail(ErrorCode::config,
           cfg.origin() +
               ": ica needs objective.csv or objective.synthetic_n/"
               "objective.synthetic_p");
    if (has_csv) {
      const std::string path = cfg.get_string("objective.csv");
      const bool header = cfg.get_bool("objective.csv_header", false);
      rx.dataset = load_csv(path, header);
      echo("objective.csv", path);
      echo("objective.csv_header", header ? "true" : "false");
    } else {
      const long n = cfg.get_long("objective.synthetic_n");
      const long p = cfg.get_long("objective.synthetic_p");
      const std::uint64_t dseed = cfg.get_seed("objective.dataset_seed", 0);
      if (n < 2 || n > 1000000 || p < 2 || p > 64)
        fail(ErrorCode::config,
             cfg.origin() + ": synthetic ica needs 2 <= n <= 1e6, 2 <= p <= 64");
      rx.synthetic = synthetic_ica_dataset(static_cast<int>(n),
                                           static_cast<int>(p), dseed);
      rx.dataset = rx.synthetic->data;
      echo("objective.synthetic_n", std::to_string(n));
      echo("objective.synthetic_p", std::to_string(p));
      echo("objective.dataset_seed", std::to_string(dseed));
    }
    rx.objective = ica_objective(*rx.dataset);
  } else {
    fail(ErrorCode::config,
         cfg.origin() + ": unknown objective.name '" + rx.objective_name +
             "' (expected double_well, quadratic, or ica)");
  }
  const int dim = rx.objective->dim();

  // Solver.
  const std::string method = cfg.get_string("solver.method");
  if (method != "nsgld" && method != "sgld")
    fail(ErrorCode::config, cfg.origin() + ": solver.method must be nsgld or sgld");
  echo("solver.method", method);

  const bool has_eta = cfg.has("solver.eta");
  const bool has_sched = cfg.has("solver.schedule.a") ||
                         cfg.has("solver.schedule.b") ||
                         cfg.has("solver.schedule.c");
  if (has_eta && has_sched)
    fail(ErrorCode::config,
         cfg.origin() + ": solver.eta and solver.schedule.* are mutually "
                        "exclusive");
  if (!has_eta && !has_sched)
    fail(ErrorCode::config,
         cfg.origin() + ": need solver.eta or solver.schedule.a");
  if (has_eta) {
    rx.chain.eta = cfg.get_double("solver.eta");
    echo("solver.eta", format_double(rx.chain.eta));
  } else {
    StepSchedule s;
    s.a = cfg.get_double("solver.schedule.a");
    s.b = cfg.get_double("solver.schedule.b", 1.0);
    s.c = cfg.get_double("solver.schedule.c", 0.0);
    rx.chain.schedule = s;
    echo("solver.schedule.a", format_double(s.a));
    echo("solver.schedule.b", format_double(s.b));
    echo("solver.schedule.c", format_double(s.c));
  }
  rx.chain.beta = cfg.get_double("solver.beta");
  echo("solver.beta", format_double(rx.chain.beta));
  const long batch = cfg.get_long("solver.batch", 0);
  if (batch < 0 || batch > 1000000000L)
    fail(ErrorCode::config, cfg.origin() + ": solver.batch out of range");
  rx.chain.batch_size = static_cast<int>(batch);
  echo("solver.batch", std::to_string(batch));
  rx.chain.grad_noise = cfg.get_double("solver.grad_noise", 0.0);
  echo("solver.grad_noise", format_double(rx.chain.grad_noise));
  rx.chain.divergence_norm = cfg.get_double("solver.divergence_norm", 1e6);
  echo("solver.divergence_norm", format_double(rx.chain.divergence_norm));

  // Ensemble (seed resolves before J, which may be seeded from it).
  const long chains = cfg.get_long("ensemble.chains", 1);
  if (chains < 1 || chains > 100000)
    fail(ErrorCode::config, cfg.origin() + ": ensemble.chains out of range");
  rx.ensemble.n_chains = static_cast<int>(chains);
  rx.ensemble.max_iters = cfg.get_long("ensemble.iters");
  const long default_every = std::max(1L, rx.ensemble.max_iters / 100);
  rx.ensemble.checkpoint_every =
      cfg.get_long("ensemble.checkpoint_every", default_every);
  const std::uint64_t cfg_seed = cfg.get_seed("ensemble.seed", 0);
  rx.ensemble.seed = ov.seed ? *ov.seed : cfg_seed;
  rx.ensemble.threads = resolve_threads(ov.threads);

  const bool has_x0 = cfg.has("ensemble.x0");
  const bool has_radius = cfg.has("ensemble.init_radius");
  if (has_x0 && has_radius)
    fail(ErrorCode::config,
         cfg.origin() + ": ensemble.x0 and ensemble.init_radius are mutually "
                        "exclusive");
  if (has_x0) {
    const std::vector<double> raw = cfg.get_double_list("ensemble.x0");
    if (static_cast<int>(raw.size()) != dim)
      fail(ErrorCode::config,
           cfg.origin() + ": ensemble.x0 needs " + std::to_string(dim) +
               " entries, got " + std::to_string(raw.size()));
    Vector x0(dim);
    for (int i = 0; i < dim; ++i) x0[i] = raw[i];
    rx.ensemble.x0 = x0;
  } else if (has_radius) {
    rx.ensemble.init_radius = cfg.get_double("ensemble.init_radius");
  } else if (rx.objective_name == "ica") {
    // Identity unmixing start: the origin is a singular W, so the usual
    // ball-at-zero default would kill every chain at step one.
    const int p = rx.dataset->p();
    Vector x0 = Vector::Zero(dim);
    for (int r = 0; r < p; ++r) x0[r * p + r] = 1.0;
    rx.ensemble.x0 = x0;
  }

  // Drift matrix.
  const bool has_tau = cfg.has("solver.tau");
  const bool has_upper = cfg.has("solver.J.upper");
  const bool has_jfile = cfg.has("solver.J_file");
  if (method == "sgld") {
    if (has_tau || has_upper || has_jfile)
      fail(ErrorCode::config,
           cfg.origin() + ": solver.tau / solver.J.upper / solver.J_file "
                          "require solver.method = nsgld");
    rx.j = AntisymmetricMatrix(dim);
  } else {
    const int sources = (has_tau ? 1 : 0) + (has_upper ? 1 : 0) +
                        (has_jfile ? 1 : 0);
    if (sources == 0)
      fail(ErrorCode::config,
           cfg.origin() + ": nsgld needs solver.tau or an explicit J "
                          "(solver.J.upper or solver.J_file)");
    if (sources > 1)
      fail(ErrorCode::config,
           cfg.origin() + ": solver.tau, solver.J.upper and solver.J_file "
                          "are mutually exclusive");
    if (has_tau) {
      const double tau = cfg.get_double("solver.tau");
      rx.j = random_gaussian_j(dim, tau, rx.ensemble.seed);
    } else if (has_upper) {
      const std::string raw = cfg.get_string("solver.J.upper");
      rx.j = j_from_upper(
          dim, raw.empty() ? std::vector<double>{} : parse_loose_doubles(raw, cfg.origin()),
          cfg.origin());
    } else {
      const std::string path = cfg.get_string("solver.J_file");
      rx.j = j_from_upper(dim, parse_loose_doubles(read_text_file(path), path),
                          cfg.origin());
    }
    // The echo always carries the resolved upper triangle so a rerun takes
    // the explicit-J path; chain streams are unaffected by how J was made.
    echo("solver.J.upper", join_doubles(rx.j.upper()));
  }

  // Ensemble echo after the solver block so related keys stay grouped.
  echo("ensemble.chains", std::to_string(chains));
  echo("ensemble.iters", std::to_string(rx.ensemble.max_iters));
  echo("ensemble.checkpoint_every",
       std::to_string(rx.ensemble.checkpoint_every));
  echo("ensemble.seed", std::to_string(rx.ensemble.seed));
  if (rx.ensemble.x0) {
    std::vector<double> raw(rx.ensemble.x0->data(),
                            rx.ensemble.x0->data() + rx.ensemble.x0->size());
    echo("ensemble.x0", join_doubles(raw));
  } else {
    echo("ensemble.init_radius", format_double(rx.ensemble.init_radius));
  }

  // Output.
  const std::string cfg_dir = cfg.get_string("output.dir", "");
  rx.out_dir = ov.out_dir ? *ov.out_dir : cfg_dir;
  if (rx.out_dir.empty())
    fail(ErrorCode::config,
         cfg.origin() + ": output.dir is required (or pass --out)");
  rx.emit_svg = cfg.get_bool("output.svg", false);
  echo("output.dir", rx.out_dir);
  echo("output.svg", rx.emit_svg ? "true" : "false");

  rx.chain.validate();
  return rx;
}

std::string render_echo(
    const std::vector<std::pair<std::string, std::string>>& echo,
    double wall_seconds) {
  std::string out =
      "# resolved configuration; rerunning from this file reproduces "
      "run.csv byte for byte\n";
  for (const auto& [key, value] : echo) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  }
  out += "# wall_time_seconds = " + format_double(wall_seconds) + "\n";
  return out;
}

std::string curve_svg(const std::vector<RunRow>& rows) {
  const double width = 640.0;
  const double height = 400.0;
  const double left = 70.0;
  const double right = 620.0;
  const double top = 20.0;
  const double bottom = 350.0;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool first = true;
  for (const RunRow& r : rows) {
    if (!std::isfinite(r.mean_f)) continue;
    const double x = static_cast<double>(r.iter);
    if (first) {
      xmin = xmax = x;
      ymin = ymax = r.mean_f;
      first = false;
    } else {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, r.mean_f);
      ymax = std::max(ymax, r.mean_f);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  std::string points;
  for (const RunRow& r : rows) {
    if (!std::isfinite(r.mean_f)) continue;
    const double px =
        left + (static_cast<double>(r.iter) - xmin) / (xmax - xmin) *
                   (right - left);
    const double py =
        bottom - (r.mean_f - ymin) / (ymax - ymin) * (bottom - top);
    if (!points.empty()) points += ' ';
    points += format_double(px) + "," + format_double(py);
  }
  std::string svg =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
      format_double(width) + " " + format_double(height) + "\">\n";
  svg += "  <line x1=\"" + format_double(left) + "\" y1=\"" +
         format_double(bottom) + "\" x2=\"" + format_double(right) +
         "\" y2=\"" + format_double(bottom) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "  <line x1=\"" + format_double(left) + "\" y1=\"" +
         format_double(top) + "\" x2=\"" + format_double(left) + "\" y2=\"" +
         format_double(bottom) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "  <text x=\"" + format_double((left + right) / 2) + "\" y=\"" +
         format_double(height - 12.0) +
         "\" text-anchor=\"middle\" font-size=\"14\">iteration</text>\n";
  svg += "  <text x=\"16\" y=\"" + format_double((top + bottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 "
         "16 " +
         format_double((top + bottom) / 2) + ")\">mean_F</text>\n";
  svg += "  <text x=\"" + format_double(left) + "\" y=\"" +
         format_double(bottom + 18.0) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + format_double(xmin) +
         "</text>\n";
  svg += "  <text x=\"" + format_double(right) + "\" y=\"" +
         format_double(bottom + 18.0) +
         "\" text-anchor=\"middle\" font-size=\"11\">" + format_double(xmax) +
         "</text>\n";
  svg += "  <text x=\"" + format_double(left - 6.0) + "\" y=\"" +
         format_double(bottom + 4.0) +
         "\" text-anchor=\"end\" font-size=\"11\">" + format_double(ymin) +
         "</text>\n";
  svg += "  <text x=\"" + format_double(left - 6.0) + "\" y=\"" +
         format_double(top + 4.0) +
         "\" text-anchor=\"end\" font-size=\"11\">" + format_double(ymax) +
         "</text>\n";
  svg += "  <polyline fill=\"none\" stroke=\"#1f6feb\" stroke-width=\"1.5\" "
         "points=\"" +
         points + "\"/>\n";
  svg += "</svg>\n";
  return svg;
}

double safe_value(const Objective& obj, const ChainState& state) {
  if (!state.alive) return kNaN;
  try {
    return obj.value(state.x);
  } catch (const Error&) {
    return kNaN;
  }
}

RunOutcome execute(ResolvedExperiment& rx,
                   std::vector<ChainState>* states_out = nullptr) {
  const DriftMatrix drift{rx.j};
  EnsembleResult res =
      run_ensemble(*rx.objective, drift, rx.chain, rx.ensemble);

  write_text_file(rx.out_dir + "/run.csv", res.record.to_csv());
  write_text_file(rx.out_dir + "/config.echo",
                  render_echo(rx.echo, res.record.wall_time_seconds));
  if (rx.emit_svg)
    write_text_file(rx.out_dir + "/curve.svg", curve_svg(res.record.rows));

  RunOutcome out;
  out.status =
      res.all_diverged ? RunStatus::all_diverged : RunStatus::ok;
  out.out_dir = rx.out_dir;
  long dead = 0;
  for (const ChainState& s : res.final_states) {
    if (!s.alive) ++dead;
    out.final_values.push_back(safe_value(*rx.objective, s));
  }
  out.diverged_fraction =
      res.final_states.empty()
          ? 0.0
          : static_cast<double>(dead) /
                static_cast<double>(res.final_states.size());
  if (states_out) *states_out = std::move(res.final_states);
  out.record = std::move(res.record);
  return out;
}

std::string sanitize_csv_field(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

// Line-level rewrite of a config text: keys in `replace` get their value
// swapped in place (appended at the end when absent), keys starting with a
// prefix in `remove_prefixes` are dropped, everything else is untouched.
std::string override_config_text(
    const std::string& text,
    const std::map<std::string, std::string>& replace,
    const std::vector<std::string>& remove_prefixes) {
  std::map<std::string, bool> applied;
  for (const auto& [k, v] : replace) applied[k] = false;
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = line;
    const std::size_t hash = stripped.find('#');
    if (hash != std::string::npos) stripped.erase(hash);
    const std::size_t eq = stripped.find('=');
    std::string key;
    if (eq != std::string::npos) {
      key = stripped.substr(0, eq);
      while (!key.empty() && std::isspace(static_cast<unsigned char>(key.front())))
        key.erase(key.begin());
      while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back())))
        key.pop_back();
    }
    bool removed = false;
    for (const std::string& prefix : remove_prefixes) {
      if (key.rfind(prefix, 0) == 0) {
        removed = true;
        break;
      }
    }
    if (removed) continue;
    const auto it = replace.find(key);
    if (it != replace.end()) {
      out += it->first + " = " + it->second + "\n";
      applied[key] = true;
      continue;
    }
    out += line + "\n";
  }
  for (const auto& [k, v] : replace)
    if (!applied[k]) out += k + " = " + v + "\n";
  return out;
}

}  // namespace

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::config:
    case ErrorCode::io:
    case ErrorCode::invalid_argument:
      return 2;
    case ErrorCode::all_diverged:
      return 3;
    case ErrorCode::numeric:
    case ErrorCode::saddle_structure:
      return 4;
  }
  return 4;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path())
    std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::io, "short write to '" + path + "'");
}

RunOutcome run_experiment(const Config& cfg, const RunOverrides& ov) {
  ResolvedExperiment rx = resolve_experiment(cfg, ov);
  cfg.reject_untouched();
  return execute(rx);
}

double ica_recovery_score(const Matrix& unmixing, const Dataset& data,
                          const Matrix& mixing) {
  const int p = data.p();
  const int n = data.n();
  if (p < 2 || p > 8)
    fail(ErrorCode::invalid_argument,
         "ica_recovery_score: needs 2 <= channels <= 8");
  if (n < 2)
    fail(ErrorCode::invalid_argument, "ica_recovery_score: needs >= 2 rows");
  if (unmixing.rows() != p || unmixing.cols() != p || mixing.rows() != p ||
      mixing.cols() != p)
    fail(ErrorCode::invalid_argument,
         "ica_recovery_score: matrix dimensions must match the dataset");
  require_finite(unmixing, "ica_recovery_score");
  const double det = mixing.determinant();
  if (!(std::abs(det) > 1e-12))
    fail(ErrorCode::invalid_argument,
         "ica_recovery_score: mixing matrix is singular");
  const Matrix inv_mix = mixing.inverse();

  // Column j of rec/tru holds component j across all samples.
  Matrix rec(n, p), tru(n, p);
  Vector x(p);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < p; ++c) x[c] = data.rows[i][c];
    rec.row(i) = (unmixing * x).transpose();
    tru.row(i) = (inv_mix * x).transpose();
  }
  Matrix corr(p, p);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      const Vector u = rec.col(a).array() - rec.col(a).mean();
      const Vector v = tru.col(b).array() - tru.col(b).mean();
      const double den = u.norm() * v.norm();
      corr(a, b) = den > 0.0 ? std::abs(u.dot(v)) / den : 0.0;
    }
  }
  std::vector<int> perm(p);
  for (int i = 0; i < p; ++i) perm[i] = i;
  double best = 0.0;
  do {
    double low = 1.0;
    for (int i = 0; i < p; ++i) low = std::min(low, corr(i, perm[i]));
    best = std::max(best, low);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

RunOutcome run_ica(const Config& cfg, const RunOverrides& ov) {
  ResolvedExperiment rx = resolve_experiment(cfg, ov);
  if (rx.objective_name != "ica")
    fail(ErrorCode::config,
         cfg.origin() + ": the ica command needs objective.name = ica");
  cfg.reject_untouched();
  std::vector<ChainState> states;
  RunOutcome out = execute(rx, &states);

  const int p = rx.dataset->p();
  if (rx.synthetic) {
    for (const ChainState& s : states) {
      if (!s.alive) {
        out.recovery_scores.push_back(kNaN);
        continue;
      }
      Matrix w(p, p);
      for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c) w(r, c) = s.x[r * p + c];
      out.recovery_scores.push_back(
          ica_recovery_score(w, *rx.dataset, rx.synthetic->mixing));
    }
  }

  std::string report = "ica report\n";
  report += "samples = " + std::to_string(rx.dataset->n()) +
            "\nchannels = " + std::to_string(p) +
            "\nchains = " + std::to_string(rx.ensemble.n_chains) +
            "\niters = " + std::to_string(rx.ensemble.max_iters) + "\n";
  report +=
      "objective = negative mean log-likelihood; log-likelihood per sample "
      "= -final_value\n";
  report += "chain,alive,final_value,recovery\n";
  long alive = 0;
  double value_sum = 0.0;
  long recovered = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const bool a = states[i].alive;
    if (a) {
      ++alive;
      if (std::isfinite(out.final_values[i])) value_sum += out.final_values[i];
    }
    report += std::to_string(i) + "," + (a ? "1" : "0") + "," +
              format_double(out.final_values[i]) + ",";
    if (rx.synthetic) {
      report += format_double(out.recovery_scores[i]);
      if (a && out.recovery_scores[i] > 0.95) ++recovered;
    } else {
      report += "-";
    }
    report += "\n";
  }
  report += "alive = " + std::to_string(alive) + "/" +
            std::to_string(states.size()) + "\n";
  if (alive > 0)
    report += "mean final_value over alive chains = " +
              format_double(value_sum / static_cast<double>(alive)) + "\n";
  if (rx.synthetic)
    report += "recovery > 0.95 in " + std::to_string(recovered) + "/" +
              std::to_string(states.size()) + " chains\n";
  write_text_file(out.out_dir + "/ica_report.txt", report);
  return out;
}

RunOutcome run_sweep(const std::string& config_text, const std::string& origin,
                     const RunOverrides& ov) {
  const Config base = Config::parse_string(config_text, origin);
  const std::string param = base.get_string("sweep.parameter");
  const std::vector<double> values = base.get_double_list("sweep.values");
  if (values.size() < 2)
    fail(ErrorCode::config, origin + ": sweep.values needs at least 2 values");
  if (!base.has(param))
    fail(ErrorCode::config, origin + ": swept parameter '" + param +
                                "' is not present in the config");
  const std::string base_dir =
      ov.out_dir ? *ov.out_dir : base.get_string("output.dir");

  std::string combined = "sweep_value,iter,mean_F,std_F,mean_norm_x,alive\n";
  std::string summary = "sweep_value,status,diverged_fraction,error\n";
  for (const double v : values) {
    const std::string vstr = format_double(v);
    const std::string eff =
        override_config_text(config_text, {{param, vstr}}, {"sweep."});
    RunOverrides sub = ov;
    sub.out_dir = base_dir + "/value_" + vstr;
    try {
      const Config c = Config::parse_string(
          eff, origin + "[" + param + "=" + vstr + "]");
      const RunOutcome r = run_experiment(c, sub);
      std::istringstream rows(r.record.to_csv());
      std::string line;
      std::getline(rows, line);  // header
      while (std::getline(rows, line)) combined += vstr + "," + line + "\n";
      summary += vstr;
      summary += r.status == RunStatus::all_diverged ? ",all_diverged," : ",ok,";
      summary += format_double(r.diverged_fraction) + ",\n";
    } catch (const Error& e) {
      summary += vstr + ",error,nan," + sanitize_csv_field(e.what()) + "\n";
    }
  }
  write_text_file(base_dir + "/sweep.csv", combined);
  write_text_file(base_dir + "/sweep_summary.csv", summary);

  RunOutcome out;
  out.out_dir = base_dir;
  return out;
}

std::string spectral_sweep_csv(const std::vector<double>& lambda1,
                               const std::vector<double>& a1) {
  if (lambda1.empty() || a1.empty())
    fail(ErrorCode::invalid_argument,
         "spectral sweep: need at least one lambda1 and one a1 value");
  std::string out = "lambda1,a1,mu_star,mu_star_J,ratio,verdict\n";
  for (const double l1 : lambda1) {
    if (!std::isfinite(l1) || !(l1 > 0.0))
      fail(ErrorCode::invalid_argument,
           "spectral sweep: lambda1 must be > 0 so diag(-1, lambda1) is a "
           "saddle normal form");
    Matrix saddle(2, 2);
    saddle << -1.0, 0.0, 0.0, l1;
    const SaddleData data{saddle, Matrix::Identity(2, 2), 1.0};
    for (const double a : a1) {
      if (!std::isfinite(a) || a < 0.0)
        fail(ErrorCode::invalid_argument,
             "spectral sweep: a1 must be >= 0");
      const AntisymmetricMatrix j = block_diagonal_j(2, {a});
      const double mu = mu_star(saddle);
      const double mu_j = mu_star_J(saddle, j);
      const double ratio = complexity_ratio(data, j);
      out += format_double(l1) + "," + format_double(a) + "," +
             format_double(mu) + "," + format_double(mu_j) + "," +
             format_double(ratio) + "," + ratio_verdict(ratio) + "\n";
    }
  }
  return out;
}

BoundReport constants_from_config(const Config& cfg) {
  ProblemConstants pc;
  pc.M = cfg.get_double("M");
  pc.m = cfg.get_double("m");
  pc.b = cfg.get_double("b");
  pc.A = cfg.get_double("A");
  pc.B = cfg.get_double("B");
  pc.delta = cfg.get_double("delta");
  pc.beta = cfg.get_double("beta");
  const long d = cfg.get_long("d");
  if (d < 1 || d > 1000000)
    fail(ErrorCode::config, cfg.origin() + ": d out of range");
  pc.d = static_cast<int>(d);
  pc.lambda_J = cfg.get_double("lambda_J");
  pc.lambda_J0 = cfg.get_double("lambda_J0");
  pc.norm_AJ = cfg.get_double("norm_AJ", 1.0);
  pc.spectral_prefactor = cfg.get_double("spectral_prefactor", 1.0);
  pc.universal_C = cfg.get_double("universal_C", 1.0);
  const double eps = cfg.get_double("eps");
  const long n = cfg.get_long("n");
  std::optional<double> c_hat;
  if (cfg.has("C_hat_zJ")) c_hat = cfg.get_double("C_hat_zJ");
  cfg.reject_untouched();
  return emit_bound_report(pc, eps, n, c_hat);
}

RunOutcome cmd_run(const std::string& config_path, const RunOverrides& ov) {
  return run_experiment(Config::parse_file(config_path), ov);
}

RunOutcome cmd_sweep(const std::string& config_path, const RunOverrides& ov) {
  return run_sweep(read_text_file(config_path), config_path, ov);
}

RunOutcome cmd_ica(const std::string& config_path, const RunOverrides& ov) {
  return run_ica(Config::parse_file(config_path), ov);
}

std::string cmd_constants(const std::string& config_path,
                          const RunOverrides& ov) {
  const BoundReport rep = constants_from_config(Config::parse_file(config_path));
  if (ov.out_dir) {
    write_text_file(*ov.out_dir + "/bounds.csv", rep.to_csv());
    write_text_file(*ov.out_dir + "/bounds.txt", rep.to_text());
  }
  return rep.to_text();
}

}  // namespace nsgld

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "harness.hpp"
#include "objectives.hpp"

namespace fs = std::filesystem;
using namespace nsgld;

namespace {

template <class Fn>
void expect_error(Fn&& fn, ErrorCode code, const std::string& needle) {
  try {
    fn();
    FAIL_CHECK("expected an Error containing '" << needle << "'");
  } catch (const Error& e) {
    CHECK(e.code() == code);
    CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos,
                  e.what());
  }
}

std::string fresh_dir(const std::string& name) {
  const fs::path dir =
      fs::temp_directory_path() / "nsgld_harness_tests" / name;
  fs::remove_all(dir);
  return dir.string();
}

std::string base_run_config(const std::string& out_dir) {
  return "objective.name = double_well\n"
         "solver.method = nsgld\n"
         "solver.eta = 1\n"
         "solver.beta = 200\n"
         "solver.tau = 0.5\n"
         "ensemble.chains = 4\n"
         "ensemble.iters = 30\n"
         "ensemble.checkpoint_every = 10\n"
         "ensemble.seed = 7\n"
         "ensemble.x0 = 1, 1\n"
         "output.dir = " +
         out_dir + "\n";
}

RunOutcome run_text(const std::string& text, const RunOverrides& ov = {}) {
  return run_experiment(Config::parse_string(text, "test.conf"), ov);
}

// Echo lines minus the fields a rerun under a new directory may not share.
std::string stable_echo_lines(const std::string& echo) {
  std::istringstream in(echo);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("output.dir", 0) == 0) continue;
    if (line.rfind("# wall_time_seconds", 0) == 0) continue;
    out += line + "\n";
  }
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

TEST_CASE("run writes outputs and anchors the first checkpoint") {
  const std::string dir = fresh_dir("basic_run");
  const RunOutcome out = run_text(base_run_config(dir));
  CHECK(out.status == RunStatus::ok);
  CHECK(out.diverged_fraction == 0.0);
  CHECK(out.out_dir == dir);
  REQUIRE(out.record.rows.size() == 4);  // iters 0, 10, 20, 30
  // Every chain starts at x0, so the first checkpoint is the exact value.
  CHECK(out.record.rows[0].mean_f == 0.48578643762690499);
  CHECK(out.record.rows[0].std_f == 0.0);
  CHECK(out.record.rows[0].alive == 4);
  REQUIRE(out.final_values.size() == 4);
  for (double v : out.final_values) CHECK(std::isfinite(v));
  CHECK(out.recovery_scores.empty());

  CHECK(fs::exists(dir + "/run.csv"));
  CHECK(fs::exists(dir + "/config.echo"));
  CHECK_FALSE(fs::exists(dir + "/curve.svg"));
  CHECK(read_text_file(dir + "/run.csv") == out.record.to_csv());
}

TEST_CASE("config echo reproduces the run byte for byte") {
  const std::string dir1 = fresh_dir("echo_first");
  const std::string dir2 = fresh_dir("echo_second");
  run_text(base_run_config(dir1));

  const std::string echo = read_text_file(dir1 + "/config.echo");
  // The echo pins the materialized drift, not the seed recipe for it.
  CHECK(echo.find("solver.J.upper = ") != std::string::npos);
  CHECK(echo.find("solver.tau") == std::string::npos);

  RunOverrides ov;
  ov.out_dir = dir2;
  run_text(echo, ov);
  CHECK(read_text_file(dir1 + "/run.csv") ==
        read_text_file(dir2 + "/run.csv"));
  CHECK(stable_echo_lines(echo) ==
        stable_echo_lines(read_text_file(dir2 + "/config.echo")));
}

TEST_CASE("unknown config keys are rejected") {
  const std::string text =
      base_run_config(fresh_dir("unknown_key")) + "bogus.key = 1\n";
  expect_error([&] { run_text(text); }, ErrorCode::config,
               "unknown keys: bogus.key");
}

TEST_CASE("conflicting or missing run settings fail loudly") {
  const std::string dir = fresh_dir("bad_configs");
  struct Case {
    std::string text;
    std::string needle;
  };
  const std::string common =
      "ensemble.chains = 2\nensemble.iters = 5\noutput.dir = " + dir + "\n";
  const std::vector<Case> cases = {
      {"objective.name = double_well\nsolver.method = sgld\n"
       "solver.eta = 1\nsolver.beta = 200\nsolver.tau = 0.5\n" +
           common,
       "require solver.method = nsgld"},
      {"objective.name = double_well\nsolver.method = nsgld\n"
       "solver.eta = 1\nsolver.beta = 200\n" +
           common,
       "nsgld needs solver.tau or an explicit J"},
      {"objective.name = double_well\nsolver.method = nsgld\n"
       "solver.eta = 1\nsolver.beta = 200\nsolver.tau = 0.5\n"
       "solver.J.upper = 0.5\n" +
           common,
       "mutually exclusive"},
      {"objective.name = double_well\nsolver.method = sgld\n"
       "solver.eta = 1\nsolver.schedule.a = 0.5\nsolver.beta = 200\n" +
           common,
       "solver.eta and solver.schedule.* are mutually exclusive"},
      {"objective.name = double_well\nsolver.method = sgld\n"
       "solver.beta = 200\n" +
           common,
       "need solver.eta or solver.schedule.a"},
      {"objective.name = double_well\nsolver.method = sgld\n"
       "solver.eta = 1\nsolver.beta = 200\nensemble.x0 = 1, 1\n"
       "ensemble.init_radius = 0.5\n" +
           common,
       "ensemble.x0 and ensemble.init_radius are mutually exclusive"},
      {"objective.name = double_well\nsolver.method = sgld\n"
       "solver.eta = 1\nsolver.beta = 200\nensemble.x0 = 1, 1, 1\n" +
           common,
       "ensemble.x0 needs 2 entries, got 3"},
      {"objective.name = double_well\nsolver.method = sgld\n"
       "solver.eta = 1\nsolver.beta = 200\n"
       "ensemble.chains = 2\nensemble.iters = 5\n",
       "output.dir is required"},
      {"objective.name = banana\nsolver.method = sgld\n"
       "solver.eta = 1\nsolver.beta = 200\n" +
           common,
       "unknown objective.name 'banana'"},
      {"objective.name = double_well\nsolver.method = langevin\n"
       "solver.eta = 1\nsolver.beta = 200\n" +
           common,
       "solver.method must be nsgld or sgld"},
      {"objective.name = double_well\nsolver.method = nsgld\n"
       "solver.eta = 1\nsolver.beta = 200\nsolver.J.upper = 1, x\n" +
           common,
       "bad number 'x'"},
      {"objective.name = quadratic\nobjective.dim = 3\n"
       "solver.method = nsgld\nsolver.eta = 1\nsolver.beta = 200\n"
       "solver.J.upper = 0.5\n" +
           common,
       "J upper triangle needs 3 entries for dimension 3, got 1"},
  };
  for (const Case& c : cases) {
    CAPTURE(c.needle);
    expect_error([&] { run_text(c.text); }, ErrorCode::config, c.needle);
  }
}

TEST_CASE("ica data source resolution") {
  const std::string dir = fresh_dir("ica_sources");
  const std::string tail =
      "solver.method = sgld\nsolver.eta = 0.001\nsolver.beta = 1000\n"
      "ensemble.chains = 2\nensemble.iters = 3\noutput.dir = " +
      dir + "\n";
  expect_error(
      [&] {
        run_text("objective.name = ica\nobjective.csv = x.csv\n"
                 "objective.synthetic_n = 100\nobjective.synthetic_p = 2\n" +
                 tail);
      },
      ErrorCode::config, "mutually exclusive");
  expect_error([&] { run_text("objective.name = ica\n" + tail); },
               ErrorCode::config, "ica needs objective.csv or");
  expect_error(
      [&] {
        run_text("objective.name = ica\nobjective.synthetic_n = 100\n"
                 "objective.synthetic_p = 1\n" +
                 tail);
      },
      ErrorCode::config, "2 <= p <= 64");
  expect_error(
      [&] {
        run_ica(Config::parse_string(
                    base_run_config(fresh_dir("ica_wrong_objective")),
                    "test.conf"),
                {});
      },
      ErrorCode::config, "the ica command needs objective.name = ica");
}

TEST_CASE("svg curve is emitted on request") {
  const std::string dir = fresh_dir("svg_run");
  run_text(base_run_config(dir) + "output.svg = true\n");
  const std::string svg = read_text_file(dir + "/curve.svg");
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t at = svg.find("<polyline"); at != std::string::npos;
       at = svg.find("<polyline", at + 1))
    ++polylines;
  CHECK(polylines == 1);
  CHECK(svg.find("iteration") != std::string::npos);
  CHECK(svg.find("mean_F") != std::string::npos);
}

TEST_CASE("worker thread resolution") {
  unsetenv("NSGLD_LAB_THREADS");

  setenv("NSGLD_LAB_THREADS", "garbage", 1);
  expect_error([&] { run_text(base_run_config(fresh_dir("threads_a"))); },
               ErrorCode::config,
               "NSGLD_LAB_THREADS must be a positive integer, got 'garbage'");
  setenv("NSGLD_LAB_THREADS", "-3", 1);
  expect_error([&] { run_text(base_run_config(fresh_dir("threads_b"))); },
               ErrorCode::config, "NSGLD_LAB_THREADS must be a positive");

  // An explicit thread count short-circuits the environment entirely.
  RunOverrides ov;
  ov.threads = 2;
  const std::string dir = fresh_dir("threads_c");
  CHECK(run_text(base_run_config(dir), ov).status == RunStatus::ok);
  unsetenv("NSGLD_LAB_THREADS");

  ov.threads = 0;
  expect_error([&] { run_text(base_run_config(fresh_dir("threads_d")), ov); },
               ErrorCode::invalid_argument, "--threads must be >= 1");
}

TEST_CASE("seed override changes the run and is echoed") {
  const std::string dir1 = fresh_dir("seed_base");
  const std::string dir2 = fresh_dir("seed_override");
  run_text(base_run_config(dir1));
  RunOverrides ov;
  ov.seed = 8;
  run_text(base_run_config(dir2), ov);
  CHECK(read_text_file(dir1 + "/run.csv") !=
        read_text_file(dir2 + "/run.csv"));
  CHECK(read_text_file(dir2 + "/config.echo").find("ensemble.seed = 8") !=
        std::string::npos);
}

TEST_CASE("sweep isolates per-value failures") {
  const std::string dir = fresh_dir("sweep_errors");
  const std::string text =
      "objective.name = double_well\n"
      "solver.method = sgld\n"
      "solver.eta = 0.5\n"
      "solver.beta = 200\n"
      "ensemble.chains = 3\n"
      "ensemble.iters = 20\n"
      "ensemble.checkpoint_every = 10\n"
      "ensemble.seed = 7\n"
      "ensemble.x0 = 1, 1\n"
      "output.dir = " +
      dir +
      "\n"
      "sweep.parameter = solver.eta\n"
      "sweep.values = 0.5, -1, 0.25\n";
  const RunOutcome out = run_sweep(text, "test.conf", {});
  CHECK(out.out_dir == dir);
  CHECK(fs::exists(dir + "/value_0.5/run.csv"));
  CHECK(fs::exists(dir + "/value_0.25/run.csv"));
  CHECK_FALSE(fs::exists(dir + "/value_-1/run.csv"));

  const auto summary = split_lines(read_text_file(dir + "/sweep_summary.csv"));
  REQUIRE(summary.size() == 4);
  CHECK(summary[0] == "sweep_value,status,diverged_fraction,error");
  CHECK(summary[1].rfind("0.5,ok,0,", 0) == 0);
  CHECK(summary[2].rfind("-1,error,nan,", 0) == 0);
  CHECK(summary[2].find("eta") != std::string::npos);
  CHECK(summary[3].rfind("0.25,ok,0,", 0) == 0);

  const auto combined = split_lines(read_text_file(dir + "/sweep.csv"));
  REQUIRE(combined.size() >= 7);  // header + 3 checkpoints per alive value
  CHECK(combined[0] == "sweep_value,iter,mean_F,std_F,mean_norm_x,alive");
  for (std::size_t i = 1; i < combined.size(); ++i) {
    const bool tagged = combined[i].rfind("0.5,", 0) == 0 ||
                        combined[i].rfind("0.25,", 0) == 0;
    CHECK(tagged);
  }
}

TEST_CASE("sweeping tau through zero matches a plain reversible run") {
  const std::string sweep_dir = fresh_dir("sweep_tau_zero");
  const std::string plain_dir = fresh_dir("sweep_tau_plain");
  const std::string stem =
      "objective.name = double_well\n"
      "solver.eta = 1\n"
      "solver.beta = 200\n"
      "ensemble.chains = 5\n"
      "ensemble.iters = 40\n"
      "ensemble.checkpoint_every = 10\n"
      "ensemble.seed = 7\n"
      "ensemble.x0 = 1, 1\n";
  run_sweep(stem + "solver.method = nsgld\nsolver.tau = 0, 1\n"
                   "sweep.parameter = solver.tau\nsweep.values = 0, 1\n"
                   "output.dir = " +
                sweep_dir + "\n",
            "test.conf", {});
  run_text(stem + "solver.method = sgld\noutput.dir = " + plain_dir + "\n");
  CHECK(read_text_file(sweep_dir + "/value_0/run.csv") ==
        read_text_file(plain_dir + "/run.csv"));
}

TEST_CASE("sweep validation") {
  const std::string dir = fresh_dir("sweep_bad");
  const std::string base = base_run_config(dir);
  expect_error(
      [&] {
        run_sweep(base + "sweep.parameter = solver.eta\nsweep.values = 1\n",
                  "test.conf", {});
      },
      ErrorCode::config, "sweep.values needs at least 2 values");
  expect_error(
      [&] {
        run_sweep(base +
                      "sweep.parameter = solver.gamma\nsweep.values = 1, 2\n",
                  "test.conf", {});
      },
      ErrorCode::config, "swept parameter 'solver.gamma' is not present");
}

TEST_CASE("divergence fraction grows with rotation strength") {
  const std::string dir = fresh_dir("sweep_divergence");
  const std::string text =
      "objective.name = double_well\n"
      "solver.method = nsgld\n"
      "solver.eta = 1\n"
      "solver.beta = 200\n"
      "solver.tau = 0\n"
      "ensemble.chains = 20\n"
      "ensemble.iters = 300\n"
      "ensemble.checkpoint_every = 100\n"
      "ensemble.seed = 3\n"
      "ensemble.init_radius = 0.1\n"
      "output.dir = " +
      dir +
      "\n"
      "sweep.parameter = solver.tau\n"
      "sweep.values = 0, 0.5, 1, 1.5, 2, 2.5, 3\n";
  run_sweep(text, "test.conf", {});
  const auto lines = split_lines(read_text_file(dir + "/sweep_summary.csv"));
  REQUIRE(lines.size() == 8);
  double prev = 0.0;
  bool past_cliff = false;
  std::vector<double> fractions;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    REQUIRE(fields.size() == 4);
    CHECK((fields[1] == "ok" || fields[1] == "all_diverged"));
    const double frac = std::stod(fields[2]);
    fractions.push_back(frac);
    if (past_cliff) CHECK(frac >= 0.9);
    if (frac >= 0.9) past_cliff = true;
    prev = frac;
  }
  (void)prev;
  // Frozen fixture: seed 3 tips 2 of 20 chains at tau = 2 and all at 2.5+.
  CHECK(fractions.front() == 0.0);
  CHECK(fractions[4] == doctest::Approx(0.1));
  CHECK(fractions[5] == 1.0);
  CHECK(fractions[6] == 1.0);
  const auto last = split_fields(lines[7]);
  CHECK(last[1] == "all_diverged");
}

TEST_CASE("spectral sweep table") {
  const std::string csv = spectral_sweep_csv({1.0, 6.0}, {0.0, 1.0});
  const auto lines = split_lines(csv);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "lambda1,a1,mu_star,mu_star_J,ratio,verdict");
  // a1 = 0 collapses to the reversible chain: ratio is exactly 1.
  auto fields = split_fields(lines[1]);
  CHECK(fields[0] == "1");
  CHECK(fields[1] == "0");
  CHECK(std::stod(fields[2]) == 1.0);
  CHECK(std::stod(fields[3]) == 1.0);
  CHECK(fields[5] == "boundary");
  fields = split_fields(lines[2]);
  CHECK(std::abs(std::stod(fields[3]) - std::sqrt(2.0)) <= 1e-12);
  CHECK(std::abs(std::stod(fields[4]) - 2.8284271247461903) <= 1e-12);
  CHECK(fields[5] == "sgld_favorable");
  fields = split_fields(lines[3]);
  CHECK(fields[5] == "boundary");
  fields = split_fields(lines[4]);
  // lambda1 = 6 sits past threshold(1) = 4.98: the rotation wins.
  CHECK(std::stod(fields[4]) < 1.0);
  CHECK(fields[5] == "nsgld_favorable");

  expect_error([] { spectral_sweep_csv({}, {1.0}); },
               ErrorCode::invalid_argument, "at least one");
  expect_error([] { spectral_sweep_csv({0.0}, {1.0}); },
               ErrorCode::invalid_argument, "saddle normal form");
  expect_error([] { spectral_sweep_csv({1.0}, {-0.5}); },
               ErrorCode::invalid_argument, "a1 must be >= 0");
}

TEST_CASE("constants config round trip") {
  const std::string tuple =
      "M = 1\nm = 1\nb = 1\nA = 1\nB = 1\ndelta = 0\nbeta = 6\nd = 2\n"
      "lambda_J = -1.5\nlambda_J0 = -1\nnorm_AJ = 1.5\neps = 0.1\n"
      "n = 10000\n";
  const BoundReport rep =
      constants_from_config(Config::parse_string(tuple, "c.conf"));
  CHECK(std::abs(rep.value("I2") - 0.397715726853315) <= 1e-14);
  CHECK(rep.value("U") == 299.5);

  const BoundReport pinned = constants_from_config(
      Config::parse_string(tuple + "C_hat_zJ = 2.5\n", "c.conf"));
  CHECK(pinned.value("C_hat_zJ") == 2.5);

  expect_error(
      [&] {
        constants_from_config(
            Config::parse_string(tuple + "extra = 1\n", "c.conf"));
      },
      ErrorCode::config, "unknown keys: extra");
  expect_error(
      [&] {
        constants_from_config(Config::parse_string(
            "M = 1\nm = 1\nb = 1\nA = 1\nB = 1\ndelta = 0\nd = 2\n"
            "lambda_J = -1.5\nlambda_J0 = -1\neps = 0.1\nn = 100\n",
            "c.conf"));
      },
      ErrorCode::config, "missing required key 'beta'");
  expect_error(
      [&] {
        constants_from_config(Config::parse_string(
            "M = 1\nm = 1\nb = 1\nA = 1\nB = 1\ndelta = 0\nbeta = 6\nd = 0\n"
            "lambda_J = -1.5\nlambda_J0 = -1\neps = 0.1\nn = 100\n",
            "c.conf"));
      },
      ErrorCode::config, "d out of range");
}

TEST_CASE("recovery score identifies the inverse mixing") {
  const SyntheticIca syn = synthetic_ica_dataset(400, 3, 5);
  const Matrix w = syn.mixing.inverse();
  CHECK(ica_recovery_score(w, syn.data, syn.mixing) >= 0.999);

  // Row permutation and negative rescaling leave the score unchanged.
  Matrix scrambled(3, 3);
  scrambled.row(0) = -2.0 * w.row(2);
  scrambled.row(1) = 0.5 * w.row(0);
  scrambled.row(2) = w.row(1);
  CHECK(ica_recovery_score(scrambled, syn.data, syn.mixing) >= 0.999);
}

TEST_CASE("recovery score input validation") {
  const SyntheticIca syn = synthetic_ica_dataset(50, 2, 1);
  expect_error(
      [&] {
        const SyntheticIca big = synthetic_ica_dataset(50, 9, 1);
        ica_recovery_score(Matrix::Identity(9, 9), big.data, big.mixing);
      },
      ErrorCode::invalid_argument, "2 <= channels <= 8");
  expect_error(
      [&] {
        ica_recovery_score(Matrix::Identity(3, 3), syn.data, syn.mixing);
      },
      ErrorCode::invalid_argument, "must match the dataset");
  expect_error(
      [&] {
        Matrix singular(2, 2);
        singular << 1.0, 1.0, 1.0, 1.0;
        ica_recovery_score(Matrix::Identity(2, 2), syn.data, singular);
      },
      ErrorCode::invalid_argument, "mixing matrix is singular");
  expect_error(
      [&] {
        Matrix w = Matrix::Identity(2, 2);
        w(0, 0) = std::nan("");
        ica_recovery_score(w, syn.data, syn.mixing);
      },
      ErrorCode::invalid_argument, "ica_recovery_score");
  expect_error(
      [&] {
        Dataset tiny;
        tiny.rows = {{1.0, 2.0}};
        ica_recovery_score(Matrix::Identity(2, 2), tiny, syn.mixing);
      },
      ErrorCode::invalid_argument, "needs >= 2 rows");
}

TEST_CASE("ica run reports per-chain recovery for synthetic data") {
  const std::string dir = fresh_dir("ica_synth");
  const std::string text =
      "objective.name = ica\n"
      "objective.synthetic_n = 300\n"
      "objective.synthetic_p = 2\n"
      "objective.dataset_seed = 2\n"
      "solver.method = nsgld\n"
      "solver.tau = 1\n"
      "solver.schedule.a = 0.5\n"
      "solver.schedule.c = 0.05\n"
      "solver.beta = 1000\n"
      "solver.batch = 16\n"
      "ensemble.chains = 3\n"
      "ensemble.iters = 150\n"
      "ensemble.seed = 11\n"
      "output.dir = " +
      dir + "\n";
  const RunOutcome out =
      run_ica(Config::parse_string(text, "test.conf"), {});
  CHECK(out.recovery_scores.size() == 3);
  const std::string report = read_text_file(dir + "/ica_report.txt");
  CHECK(report.rfind("ica report\n", 0) == 0);
  CHECK(report.find("samples = 300") != std::string::npos);
  CHECK(report.find("channels = 2") != std::string::npos);
  CHECK(report.find("chain,alive,final_value,recovery") !=
        std::string::npos);
  CHECK(report.find("alive = 3/3") != std::string::npos);
  CHECK(report.find("recovery > 0.95 in ") != std::string::npos);
}

TEST_CASE("ica run on file data skips recovery scoring") {
  const std::string dir = fresh_dir("ica_csv");
  const std::string csv_path = dir + "/data.csv";
  write_text_file(csv_path,
                  "0.5,0.2\n-0.3,0.4\n0.9,-0.8\n-1.2,0.3\n0.1,1.1\n"
                  "0.7,-0.5\n");
  const std::string text =
      "objective.name = ica\n"
      "objective.csv = " +
      csv_path +
      "\n"
      "solver.method = sgld\n"
      "solver.eta = 0.001\n"
      "solver.beta = 1000\n"
      "ensemble.chains = 2\n"
      "ensemble.iters = 10\n"
      "ensemble.seed = 4\n"
      "output.dir = " +
      dir + "\n";
  const RunOutcome out =
      run_ica(Config::parse_string(text, "test.conf"), {});
  CHECK(out.recovery_scores.empty());
  const std::string report = read_text_file(dir + "/ica_report.txt");
  CHECK(report.find(",-\n") != std::string::npos);
  CHECK(report.find("recovery > 0.95") == std::string::npos);
}

TEST_CASE("a fully diverged ensemble is reported, not thrown") {
  const std::string dir = fresh_dir("all_diverged");
  const std::string text =
      "objective.name = quadratic\n"
      "objective.dim = 2\n"
      "solver.method = sgld\n"
      "solver.eta = 3\n"
      "solver.beta = 1e6\n"
      "solver.divergence_norm = 1e4\n"
      "ensemble.chains = 3\n"
      "ensemble.iters = 50\n"
      "ensemble.seed = 1\n"
      "ensemble.x0 = 1, 1\n"
      "output.dir = " +
      dir + "\n";
  const RunOutcome out = run_text(text);
  CHECK(out.status == RunStatus::all_diverged);
  CHECK(out.diverged_fraction == 1.0);
  for (double v : out.final_values) CHECK(std::isnan(v));
  CHECK(fs::exists(dir + "/run.csv"));
  CHECK(out.record.rows.back().alive == 0);
}

TEST_CASE("exit codes map failure classes") {
  CHECK(exit_code(ErrorCode::config) == 2);
  CHECK(exit_code(ErrorCode::io) == 2);
  CHECK(exit_code(ErrorCode::invalid_argument) == 2);
  CHECK(exit_code(ErrorCode::all_diverged) == 3);
  CHECK(exit_code(ErrorCode::numeric) == 4);
  CHECK(exit_code(ErrorCode::saddle_structure) == 4);
}

TEST_CASE("text file helpers round trip and report io errors") {
  const std::string dir = fresh_dir("text_files");
  const std::string path = dir + "/nested/deeper/file.txt";
  const std::string content = "alpha\nbeta\r\ngamma";
  write_text_file(path, content);
  CHECK(read_text_file(path) == content);

  expect_error([&] { read_text_file(dir + "/absent.txt"); }, ErrorCode::io,
               "cannot open");
  // A file where a directory is needed makes the target unwritable.
  expect_error([&] { write_text_file(path + "/child.txt", "x"); },
               ErrorCode::io, "cannot write");
}

TEST_CASE("file-based commands") {
  const std::string dir = fresh_dir("cmd_run");
  const std::string cfg_path = dir + "/run.conf";
  write_text_file(cfg_path, base_run_config(dir + "/out"));
  const RunOutcome out = cmd_run(cfg_path, {});
  CHECK(out.status == RunStatus::ok);
  CHECK(fs::exists(dir + "/out/run.csv"));

  expect_error([&] { cmd_run(dir + "/missing.conf", {}); }, ErrorCode::io,
               "missing.conf");

  const std::string const_path = dir + "/constants.conf";
  write_text_file(const_path,
                  "M = 1\nm = 1\nb = 1\nA = 1\nB = 1\ndelta = 0\nbeta = 6\n"
                  "d = 2\nlambda_J = -1.5\nlambda_J0 = -1\nnorm_AJ = 1.5\n"
                  "eps = 0.1\nn = 10000\n");
  RunOverrides ov;
  ov.out_dir = dir + "/bounds";
  const std::string text = cmd_constants(const_path, ov);
  CHECK(text.rfind("bound report\n", 0) == 0);
  CHECK(fs::exists(dir + "/bounds/bounds.csv"));
  CHECK(fs::exists(dir + "/bounds/bounds.txt"));
  CHECK(read_text_file(dir + "/bounds/bounds.txt") == text);
}

// Command-line front end. Talks to the core exclusively through the C API in
// nsgld.h; config semantics, output layout, and exit codes live behind it.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nsgld.h"

namespace {

struct CommandOpts {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0;
  CLI::Option* out_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

void add_common(CLI::App* cmd, CommandOpts& opts) {
  cmd->add_option("-c,--config", opts.config, "experiment config file")
      ->required();
  opts.out_opt = cmd->add_option("-o,--out", opts.out,
                                 "output directory (overrides output.dir)");
  opts.seed_opt = cmd->add_option("-s,--seed", opts.seed,
                                  "base seed (overrides ensemble.seed)");
  opts.threads_opt =
      cmd->add_option("-t,--threads", opts.threads,
                      "worker threads (default: NSGLD_LAB_THREADS, then "
                      "hardware count)");
}

int finish(const char* what, nsgld_status status) {
  if (status != NSGLD_OK)
    std::fprintf(stderr, "nsgld %s: %s\n", what, nsgld_last_error());
  return nsgld_exit_code(status);
}

int run_command(const char* what,
                nsgld_status (*fn)(const char*, const char*, const uint64_t*,
                                   const int*),
                const CommandOpts& opts) {
  const char* out = opts.out_opt->count() ? opts.out.c_str() : nullptr;
  const std::uint64_t* seed = opts.seed_opt->count() ? &opts.seed : nullptr;
  const int* threads = opts.threads_opt->count() ? &opts.threads : nullptr;
  return finish(what, fn(opts.config.c_str(), out, seed, threads));
}

bool write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path())
    std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Langevin sampling lab: reversible and non-reversible overdamped "
      "dynamics, spectral-gap comparisons, and explicit bound constants"};
  app.require_subcommand(1);

  CommandOpts run_opts, sweep_opts, ica_opts;
  CLI::App* run_cmd = app.add_subcommand(
      "run", "simulate one chain ensemble from a config file");
  add_common(run_cmd, run_opts);
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "rerun a config across sweep.values of one parameter");
  add_common(sweep_cmd, sweep_opts);
  CLI::App* ica_cmd = app.add_subcommand(
      "ica", "blind source separation run with a recovery report");
  add_common(ica_cmd, ica_opts);

  std::vector<double> lambda1, a1;
  std::string spectral_out;
  CLI::App* spectral_cmd = app.add_subcommand(
      "spectral",
      "saddle normal-form sweep: rate gains and gradient-complexity "
      "verdicts over lambda1 x a1");
  spectral_cmd
      ->add_option("--lambda1", lambda1,
                   "stable saddle curvatures (comma separated, > 0)")
      ->required()
      ->delimiter(',');
  spectral_cmd
      ->add_option("--a1", a1, "rotation strengths (comma separated, >= 0)")
      ->required()
      ->delimiter(',');
  CLI::Option* spectral_out_opt = spectral_cmd->add_option(
      "-o,--out", spectral_out, "directory for spectral.csv (default: stdout)");

  std::string constants_config, constants_out;
  CLI::App* constants_cmd = app.add_subcommand(
      "constants", "evaluate the bound constants for one problem instance");
  constants_cmd
      ->add_option("-c,--config", constants_config, "flat constants config")
      ->required();
  CLI::Option* constants_out_opt = constants_cmd->add_option(
      "-o,--out", constants_out, "directory for bounds.csv and bounds.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Normalize CLI11's parse-error codes onto the config exit code; --help
    // and --version still exit 0.
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (run_cmd->parsed()) return run_command("run", nsgld_cmd_run, run_opts);
  if (sweep_cmd->parsed())
    return run_command("sweep", nsgld_cmd_sweep, sweep_opts);
  if (ica_cmd->parsed()) return run_command("ica", nsgld_cmd_ica, ica_opts);

  if (spectral_cmd->parsed()) {
    char* csv = nullptr;
    const nsgld_status st = nsgld_spectral_sweep_csv(
        lambda1.data(), static_cast<int>(lambda1.size()), a1.data(),
        static_cast<int>(a1.size()), &csv);
    if (st != NSGLD_OK) return finish("spectral", st);
    int code = 0;
    if (spectral_out_opt->count()) {
      const std::string path = spectral_out + "/spectral.csv";
      if (!write_file(path, csv)) {
        std::fprintf(stderr, "nsgld spectral: cannot write '%s'\n",
                     path.c_str());
        code = 2;
      }
    } else {
      std::fputs(csv, stdout);
    }
    nsgld_string_free(csv);
    return code;
  }

  if (constants_cmd->parsed()) {
    char* text = nullptr;
    const char* out_dir =
        constants_out_opt->count() ? constants_out.c_str() : nullptr;
    const nsgld_status st =
        nsgld_cmd_constants(constants_config.c_str(), out_dir, &text);
    if (st != NSGLD_OK) return finish("constants", st);
    std::fputs(text, stdout);
    nsgld_string_free(text);
    return 0;
  }

  return 2;
}

#include "sketchloop/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "sketchloop/bench.hpp"
#include "sketchloop/config.hpp"
#include "sketchloop/replay.hpp"

namespace sketchloop {

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  bool quiet = false;
  std::optional<uint64_t> seed;
};

void add_seed_option(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option_function<uint64_t>(
      "--seed", [&args](uint64_t v) { args.seed = v; },
      "Master seed (overrides the config's run.seed)");
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

// simulate and oracle share everything but the replay function and the
// trace file name. Partial outputs are removed if the run throws.
int run_trace_command(const CommonArgs& args, bool oracle) {
  RunConfig cfg = load_config_file(args.config_path);
  if (args.seed) {
    cfg.seed = *args.seed;
    cfg.resolve();
  }
  fs::create_directories(args.out_dir);
  const fs::path trace_path =
      fs::path(args.out_dir) / (oracle ? "oracle.csv" : "trace.csv");
  const fs::path manifest_path = fs::path(args.out_dir) / "manifest.json";
  const char* command = oracle ? "oracle" : "simulate";
  try {
    {
      std::ofstream trace = open_out(trace_path);
      if (oracle)
        run_oracle(cfg, trace);
      else
        run_simulate(cfg, trace);
      if (!trace) throw std::runtime_error("write failed: " + trace_path.string());
    }
    std::ofstream mf = open_out(manifest_path);
    mf << manifest_json(cfg, command);
    if (!mf) throw std::runtime_error("write failed: " + manifest_path.string());
  } catch (...) {
    std::error_code ec;
    fs::remove(trace_path, ec);
    fs::remove(manifest_path, ec);
    throw;
  }
  if (!args.quiet)
    std::cout << command << ": wrote " << trace_path.string() << " and "
              << manifest_path.string() << "\n";
  return 0;
}

int run_bench_command(const CommonArgs& args) {
  BenchReport report = run_sketch_bench(args.seed.value_or(1));
  fs::create_directories(args.out_dir);
  const fs::path report_path = fs::path(args.out_dir) / "bench.txt";
  try {
    std::ofstream f = open_out(report_path);
    write_bench_report(report, f);
    if (!f) throw std::runtime_error("write failed: " + report_path.string());
  } catch (...) {
    std::error_code ec;
    fs::remove(report_path, ec);
    throw;
  }
  if (!args.quiet) write_bench_report(report, std::cout);
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Telemetry sketch loop: simulation, exact oracle, microbench"};
  app.require_subcommand(1);

  CommonArgs sim_args, oracle_args, bench_args;

  CLI::App* sim = app.add_subcommand(
      "simulate", "Run the closed loop on a config; write trace.csv + manifest.json");
  sim->add_option("--config", sim_args.config_path, "Run configuration file")
      ->required();
  add_seed_option(sim, sim_args);
  sim->add_option("--out", sim_args.out_dir, "Output directory (default .)");
  sim->add_flag("--quiet", sim_args.quiet, "Suppress progress output");

  CLI::App* orc = app.add_subcommand(
      "oracle", "Replay the same stream with exact counting; write oracle.csv");
  orc->add_option("--config", oracle_args.config_path, "Run configuration file")
      ->required();
  add_seed_option(orc, oracle_args);
  orc->add_option("--out", oracle_args.out_dir, "Output directory (default .)");
  orc->add_flag("--quiet", oracle_args.quiet, "Suppress progress output");

  CLI::App* bench = app.add_subcommand(
      "sketch-bench", "Sampling/merging microbenchmarks on built-in streams");
  add_seed_option(bench, bench_args);
  bench->add_option("--out", bench_args.out_dir, "Output directory (default .)");
  bench->add_flag("--quiet", bench_args.quiet, "Print only the report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) return run_trace_command(sim_args, false);
    if (orc->parsed()) return run_trace_command(oracle_args, true);
    return run_bench_command(bench_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sketchloop

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "stripbem/cli.hpp"
#include "suite.hpp"

using namespace stripbem;

namespace {

void apply_thread_cap() {
  const char* env = std::getenv("STRIPBEM_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError(std::string("STRIPBEM_THREADS must be a positive integer, got '") + env + "'");
#ifdef _OPENMP
  omp_set_num_threads(static_cast<int>(n));
#endif
}

int cmd_run(const std::string& path, bool quiet) {
  const RunConfig cfg = load_config(path);
  const RunOutcome out = run(cfg, quiet ? nullptr : &std::cerr);
  if (out.exit_code != 0) {
    std::cerr << "stripbem: numerical failure after " << out.result.steps.size() << " steps: " << out.message << "\n";
    return out.exit_code;
  }
  std::cerr << "wrote " << (cfg.output / "steps.csv").string() << " (" << out.result.steps.size() << " steps"
            << (out.result.converged ? ", indicators vanished" : "") << ")\n";
  return 0;
}

int cmd_verify() {
  const auto results = oracle::run_suite();
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s  %-44s %.3e (limit %.1e)\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.value, r.limit);
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}

int cmd_mesh_dump(const std::string& path, std::size_t step, const std::string& out_path) {
  const RunConfig cfg = load_config(path);
  if (out_path.empty() || out_path == "-") {
    dump_mesh(cfg, step, std::cout);
    return 0;
  }
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot write '" + out_path + "'");
  dump_mesh(cfg, step, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive BEM for the 2D Laplace single-layer equation with strip-based error bounds"};
  app.require_subcommand(1);

  std::string run_config;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "run the adaptive loop; writes steps.csv, plot.gp, meshes");
  run_cmd->add_option("config", run_config, "key = value config file")->required();
  run_cmd->add_flag("-q,--quiet", quiet, "no per-step progress on stderr");

  auto* verify_cmd = app.add_subcommand("verify", "oracle and invariant checks");

  std::string dump_config, dump_out;
  std::size_t dump_step = 0;
  auto* dump_cmd = app.add_subcommand("mesh-dump", "print mesh, strip and marking of one step");
  dump_cmd->add_option("config", dump_config, "key = value config file")->required();
  dump_cmd->add_option("--step", dump_step, "step index")->required();
  dump_cmd->add_option("-o,--out", dump_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    apply_thread_cap();
    if (*run_cmd) return cmd_run(run_config, quiet);
    if (*verify_cmd) return cmd_verify();
    if (*dump_cmd) return cmd_mesh_dump(dump_config, dump_step, dump_out);
  } catch (const ConfigError& e) {
    std::cerr << "stripbem: config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "stripbem: i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "stripbem: numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

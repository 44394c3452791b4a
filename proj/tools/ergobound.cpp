// ergobound bound|orbit|region|trace|verify --config <file> [--out <dir>]
//           [--degree N]... [--jobs K]
// Exit codes: 0 success, 1 mathematical failure, 2 usage or I/O error.

#include <iostream>

#include "CLI11.hpp"
#include "ergobound/cli.hpp"

namespace cli = ergobound::cli;

int main(int argc, char** argv) {
  CLI::App app{"Upper bounds on time averages in polynomial ODEs"};
  app.require_subcommand(1);

  std::string config_path;
  cli::RunOptions run;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config (YAML)")->required();
    sub->add_option("--out", run.out_dir, "Output directory (overrides the config)");
    sub->add_option("--degree", run.degrees, "Auxiliary degree; may be repeated");
    sub->add_option("--jobs", run.jobs, "Concurrent workers")->check(CLI::PositiveNumber);
  };
  auto* bound = app.add_subcommand("bound", "Compute SOS bounds and certificates");
  auto* orbit = app.add_subcommand("orbit", "Find periodic orbits and their averages");
  auto* region = app.add_subcommand("region", "Sample the S_M regions of stored certificates");
  auto* trace = app.add_subcommand("trace", "Residual traces and gap reports along orbits");
  for (auto* sub : {bound, orbit, region, trace}) add_common(sub);

  auto* verify = app.add_subcommand("verify", "Re-check a certificate file");
  std::string certificate_path;
  ergobound::ValidationTolerances tolerances;
  verify->add_option("--certificate", certificate_path, "Certificate JSON")->required();
  verify->add_option("--tol-psd", tolerances.tol_psd, "Gram eigenvalue tolerance");
  verify->add_option("--tol-fit", tolerances.tol_fit, "Coefficient residual tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  try {
    if (verify->parsed()) return cli::CmdVerify(certificate_path, tolerances, std::cout);
    for (int d : run.degrees) {
      if (d < 2 || d % 2 != 0) throw cli::UsageError("--degree must be even and >= 2");
    }
    const cli::ExperimentConfig config = cli::LoadConfig(config_path);
    if (bound->parsed()) return cli::CmdBound(config, run, std::cout);
    if (orbit->parsed()) return cli::CmdOrbit(config, run, std::cout);
    if (region->parsed()) return cli::CmdRegion(config, run, std::cout);
    if (trace->parsed()) return cli::CmdTrace(config, run, std::cout);
  } catch (const cli::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitMathFailure;
  }
  return cli::kExitUsage;
}

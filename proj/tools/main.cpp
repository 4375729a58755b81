#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string scenario;
  std::vector<std::string> controllers;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> repetitions;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "Config file with [scenario], [controller], [output]");
  cmd->add_option("--scenario", f.scenario, "geofencing | navigation (default navigation)");
  cmd->add_option("--controller", f.controllers, "fits | cbf | lqr; compare takes several")
      ->delimiter(',');
  cmd->add_option("--seed", f.seed, "Navigation layout seed (default 7)");
  cmd->add_option("--out", f.out, "Output directory (default out)");
  cmd->add_option("--repetitions", f.repetitions, "Episodes with seeds seed..seed+n-1 (default 1)");
}

fits::cli::RunConfig resolve(const Flags& f) {
  fits::cli::RunConfig cfg;
  if (!f.config_path.empty()) fits::cli::load_config_file(f.config_path, cfg);
  if (!f.scenario.empty()) cfg.scenario = f.scenario;
  if (!f.controllers.empty()) cfg.controllers = f.controllers;
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.repetitions) cfg.repetitions = *f.repetitions;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory-space safety controller: simulation, comparison and self-checks"};
  app.footer(fits::cli::config_reference() +
             "\nExit codes: 0 ok, 1 config error, 2 infeasible start, 3 aborted episode, "
             "4 failed checks.\nFITS_LOG=debug|info|warn|error|off sets log verbosity.");
  app.require_subcommand(1);

  Flags run_flags;
  Flags compare_flags;
  Flags check_flags;
  bool inject_fault = false;
  auto* run = app.add_subcommand("run", "Run one controller and write trajectory.csv, metrics.csv");
  add_common(run, run_flags);
  auto* compare = app.add_subcommand("compare", "Run several controllers on the same scenario");
  add_common(compare, compare_flags);
  auto* check = app.add_subcommand("check", "Kappa rate, Jacobian and QP self-checks");
  add_common(check, check_flags);
  check->add_flag("--inject-jacobian-fault", inject_fault, "Corrupt model Jacobians (test hook)")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fits::cli::kExitConfig;
  }

  try {
    if (*run) return fits::cli::cmd_run(resolve(run_flags), std::cout, std::cerr);
    if (*compare) return fits::cli::cmd_compare(resolve(compare_flags), std::cout, std::cerr);
    fits::cli::CheckOptions opts;
    opts.inject_jacobian_fault = inject_fault;
    return fits::cli::cmd_check(resolve(check_flags), opts, std::cout);
  } catch (const fits::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return fits::cli::kExitConfig;
  }
}

#include <CLI11.hpp>
#include <iostream>

#include "semidisc/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace semidisc::cli;

  CLI::App app{"Semi-discrete Lagrangian field chains: simulation and structural diagnostics"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config;
  std::string output_dir;

  auto add_run = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--output-dir", output_dir, "Overrides output.directory");
    return sub;
  };
  CLI::App* simulate = add_run("simulate", "Integrate the chain and write trajectory.csv, summary.json");
  CLI::App* diagnose = add_run("diagnose", "Kernel and constraint analysis at the initial state");
  CLI::App* converge = add_run("converge", "Refinement study against the exact solution in 'refinement'");

  double newton_tol = 0.0;
  CLI::App* check = app.add_subcommand("check", "Run the acceptance suite");
  CLI::Option* tol_opt =
      check->add_option("--newton-tol", newton_tol, "Newton tolerance used by the suite")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  CommandOptions opts;
  if (!output_dir.empty()) opts.output_dir = output_dir;

  if (*simulate) return cmd_simulate(config, opts);
  if (*diagnose) return cmd_diagnose(config, opts);
  if (*converge) return cmd_converge(config, opts);
  if (*check) {
    CheckOptions c;
    if (*tol_opt) c.newton_tol = newton_tol;
    return cmd_check(c);
  }
  return kExitFailure;
}

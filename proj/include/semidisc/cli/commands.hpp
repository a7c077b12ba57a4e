#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "semidisc/cli/config.hpp"

namespace semidisc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< acceptance failure, I/O problems
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

inline constexpr const char* kVersion = "semidisc 0.1.0";

struct CommandOptions {
  std::optional<std::filesystem::path> output_dir;  ///< overrides output.directory
  std::ostream* out = nullptr;                      ///< defaults to std::cout
  std::ostream* err = nullptr;                      ///< defaults to std::cerr
};

/// Writes trajectory.csv, summary.json and manifest.json.
int cmd_simulate(const std::filesystem::path& config, const CommandOptions& opts = {});
/// Writes constraints.json and manifest.json.
int cmd_diagnose(const std::filesystem::path& config, const CommandOptions& opts = {});
/// Writes convergence.csv and manifest.json; needs a "refinement" block.
int cmd_converge(const std::filesystem::path& config, const CommandOptions& opts = {});

struct CheckOptions {
  std::optional<double> newton_tol;  ///< overrides the tolerance used by the suite
  std::ostream* out = nullptr;
};
/// Runs the acceptance suite; exit 0 iff every criterion passes.
int cmd_check(const CheckOptions& opts = {});

/// Shortest decimal text that reads back to the same double.
std::string format_number(double x);

}  // namespace semidisc::cli

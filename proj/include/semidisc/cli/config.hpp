#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semidisc/diagnostics.hpp"

namespace semidisc::cli {

/// Invalid configuration; key() is the dotted path of the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& detail)
      : Error("invalid config key '" + key + "': " + detail), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct ModelConfig {
  bool generic = false;
  std::string sigma = "v^2/2";
  std::string f = "0";
  std::string lagrangian;  ///< generic pair Lagrangian over y0_i, v0_i, y1_i, v1_i
  int m = 1;
  double h = 0.0;
  int N = 0;
};

struct BoundaryConfig {
  bool fixed = true;
  std::vector<std::string> left, right;  ///< one expression in t per component
};

struct InitialConfig {
  std::vector<std::string> u, v;  ///< one expression in x per component
};

struct IntegratorConfig {
  Scheme scheme = Scheme::VariationalMidpoint;
  double dt = 0.0;
  double T = 0.0;
  double newton_tol = 1e-12;
  int max_newton_iters = 50;
};

struct AnalysesConfig {
  bool energy = true;
  std::optional<std::vector<double>> noether_generator;
  bool symplectic_probe = false;
  bool constraint_chain = false;
  int max_depth = 4;
  double admissibility_tol = 1e-8;
};

struct OutputConfig {
  std::string directory = "out";
  int trajectory_stride = 1;
};

struct RefinementConfig {
  std::string exact;
  std::vector<int> levels{4, 8, 16, 32};
  double T = 0.5;
  double length = 1.0;
  double dt_factor = 0.25;
};

struct RunConfig {
  ModelConfig model;
  BoundaryConfig boundary;
  InitialConfig initial;
  IntegratorConfig integrator;
  AnalysesConfig analyses;
  OutputConfig output;
  std::optional<RefinementConfig> refinement;
  nlohmann::json source;  ///< the document as read
};

/// Validates every field, including that all expressions parse and use only
/// their allowed variables. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

ChainSystem build_system(const RunConfig& cfg);
ChainState build_initial_state(const RunConfig& cfg, const ChainSystem& sys);
StepperConfig build_stepper(const RunConfig& cfg);
Generator build_generator(const RunConfig& cfg);

}  // namespace semidisc::cli

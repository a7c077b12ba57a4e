#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "semidisc/cli/acceptance.hpp"
#include "semidisc/cli/commands.hpp"

using namespace semidisc;
using namespace semidisc::cli;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"js({"model": {"sigma": "v^2/2", "h": 0.25, "N": 4}, "initial": {"u": "sin(pi*x)"},
                             "integrator": {"dt": 0.05, "T": 0.5}})js";

std::string key_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<accepted>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("semidisc-test-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream(dir / name) << text;
  return dir / name;
}

}  // namespace

TEST_CASE("defaults of a minimal document") {
  const RunConfig cfg = parse_config_text(kMinimal);
  CHECK(cfg.model.sigma == "v^2/2");
  CHECK(cfg.model.f == "0");
  CHECK(cfg.boundary.fixed);
  CHECK(cfg.integrator.scheme == Scheme::VariationalMidpoint);
  CHECK(cfg.integrator.newton_tol == 1e-12);
  CHECK(cfg.output.trajectory_stride == 1);
  CHECK_FALSE(cfg.refinement.has_value());

  const ChainSystem sys = build_system(cfg);
  CHECK(sys.cells() == 4);
  const ChainState s = build_initial_state(cfg, sys);
  CHECK(s.y(2, 0) == doctest::Approx(1.0));
  CHECK(s.y(0, 0) == 0.0);
  CHECK(build_stepper(cfg).dt == 0.05);
}

TEST_CASE("malformed documents name the offending key") {
  CHECK(key_of(R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 1}, "initial": {}, "integrator": {"dt": 0.1, "T": 1}})js") == "model.N");
  CHECK(key_of(R"js({"model": {"sigma": "v^2/2", "h": -0.1, "N": 4}, "initial": {}, "integrator": {"dt": 0.1, "T": 1}})js") == "model.h");
  CHECK(key_of(R"js({"model": {"h": 0.1, "N": 4, "sigma": "u^2"}, "initial": {}, "integrator": {"dt": 0.1, "T": 1}})js") ==
        "model.sigma");
  CHECK(key_of(R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 4, "f": "(u"}, "initial": {}, "integrator": {"dt": 0.1, "T": 1}})js") ==
        "model.f");
  CHECK(key_of(R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 4}, "initial": {}, "integrator": {"dt": 0, "T": 1}})js") == "integrator.dt");
  CHECK(key_of(R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 4}, "initial": {}, "integrator": {"dt": 0.1, "T": 1, "scheme": "leapfrog"}})js") ==
        "integrator.scheme");
  CHECK(key_of(R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 4}, "initial": {}, "integrator": {"dt": 0.1, "T": 1}, "extra": 1})js") ==
        "extra");
  CHECK(key_of(R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 4}, "boundary": {"mode": "open"}, "initial": {}, "integrator": {"dt": 0.1, "T": 1}})js") ==
        "boundary.mode");
  CHECK(key_of(R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 4}, "initial": {}, "integrator": {"dt": 0.1, "T": 1, "scheme": "rk4"},
                  "analyses": {"symplectic_probe": true}})js") == "analyses.symplectic_probe");
  CHECK(key_of(R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": "four"}, "initial": {}, "integrator": {"dt": 0.1, "T": 1}})js") == "model.N");
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
}

TEST_CASE("generic Lagrangian models") {
  const RunConfig cfg = parse_config_text(R"js({
    "model": {"lagrangian": "0.5*(v0_1^2 + v1_1^2) - (y1_1 - y0_1)^2", "m": 1, "h": 0.5, "N": 3},
    "initial": {"u": "x"}, "integrator": {"dt": 0.1, "T": 0.2}})js");
  CHECK(cfg.model.generic);
  const ChainSystem sys = build_system(cfg);
  CHECK(sys.pair().source() == parse_expression("0.5*(v0_1^2 + v1_1^2) - (y1_1 - y0_1)^2"));
  CHECK(key_of(R"js({"model": {"lagrangian": "y2_1", "h": 0.5, "N": 3}, "initial": {}, "integrator": {"dt": 0.1, "T": 1}})js") ==
        "model.lagrangian");
}

TEST_CASE("shipped configs match the built-in references") {
  for (const auto& [name, text] : reference_configs()) {
    CAPTURE(name);
    CHECK(slurp(fs::path(SEMIDISC_SOURCE_DIR) / "configs" / name) == text);
    CHECK_NOTHROW(parse_config_text(text));
  }
}

TEST_CASE("simulate writes trajectory, summary and manifest") {
  TempDir tmp;
  const fs::path cfg = write(tmp.path, "run.json", kMinimal);
  std::ostringstream out, err;
  CommandOptions opts;
  opts.output_dir = tmp.path / "out";
  opts.out = &out;
  opts.err = &err;
  REQUIRE(cmd_simulate(cfg, opts) == kExitOk);

  std::istringstream csv(slurp(tmp.path / "out" / "trajectory.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header.rfind("t,y_0,", 0) == 0);
  CHECK(header.find("energy") != std::string::npos);
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 11);

  const auto summary = nlohmann::json::parse(slurp(tmp.path / "out" / "summary.json"));
  CHECK(summary["steps"] == 10);
  CHECK(summary["scheme"] == "variational_midpoint");
  const auto manifest = nlohmann::json::parse(slurp(tmp.path / "out" / "manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["command"] == "simulate");
}

TEST_CASE("exit codes") {
  TempDir tmp;
  std::ostringstream sink;
  CommandOptions opts;
  opts.out = &sink;
  opts.err = &sink;
  opts.output_dir = tmp.path / "a";
  CHECK(cmd_simulate(tmp.path / "missing.json", opts) == kExitConfig);
  const fs::path bad = write(tmp.path, "bad.json", R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 1}})js");
  CHECK(cmd_simulate(bad, opts) == kExitConfig);
  const fs::path incons = write(tmp.path, "incons.json", R"js({"model": {"sigma": "v^2/2", "h": 1, "N": 2},
      "boundary": {"mode": "free"}, "initial": {"u": "x*(2-x)"}, "integrator": {"dt": 0.1, "T": 1}})js");
  opts.output_dir = tmp.path / "b";
  CHECK(cmd_simulate(incons, opts) == kExitSolver);
  const auto manifest = nlohmann::json::parse(slurp(tmp.path / "b" / "manifest.json"));
  CHECK(manifest["status"] == "solver_failure");
  CHECK(cmd_converge(write(tmp.path, "noref.json", kMinimal), opts) == kExitConfig);
}

TEST_CASE("diagnose reports the constraint chain") {
  TempDir tmp;
  const fs::path cfg = write(tmp.path, "d.json", R"js({"model": {"sigma": "v^2/2", "h": 1, "N": 2}, "boundary": {"mode": "free"},
      "initial": {"u": "x"}, "integrator": {"dt": 0.1, "T": 1}, "analyses": {"constraint_chain": true}})js");
  std::ostringstream sink;
  CommandOptions opts;
  opts.output_dir = tmp.path / "out";
  opts.out = &sink;
  opts.err = &sink;
  REQUIRE(cmd_diagnose(cfg, opts) == kExitOk);
  const auto doc = nlohmann::json::parse(slurp(tmp.path / "out" / "constraints.json"));
  CHECK(doc["kernel_dimension"] == 1);
  CHECK(doc["depth"] == 2);
  CHECK(doc["stabilized"] == true);
  CHECK(doc["admissible"] == true);
}

TEST_CASE("converge writes one row per level") {
  TempDir tmp;
  const fs::path cfg = write(tmp.path, "c.json", reference_configs().back().second);
  std::ostringstream sink;
  CommandOptions opts;
  opts.output_dir = tmp.path / "out";
  opts.out = &sink;
  opts.err = &sink;
  REQUIRE(cmd_converge(cfg, opts) == kExitOk);
  std::istringstream csv(slurp(tmp.path / "out" / "convergence.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "h,error,observed_order");
  std::getline(csv, line);
  CHECK(line.back() == ',');
  int rows = 1;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("numbers round trip through their text") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) CHECK(std::stod(format_number(x)) == x);
  CHECK(format_number(0.5) == "0.5");
}

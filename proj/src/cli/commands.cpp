#include "semidisc/cli/commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>

#include "semidisc/cli/acceptance.hpp"
#include "semidisc/constraint.hpp"

namespace semidisc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
  if (!out) throw std::runtime_error("error while writing " + file.string());
}

void write_json(const fs::path& file, const json& doc) { write_text(file, doc.dump(2) + "\n"); }

json numeric_constants(const RunConfig& cfg) {
  return {
      {"rank_tolerance", kRankTolerance},
      {"consistency_tolerance", kConsistencyTolerance},
      {"newton_tol", cfg.integrator.newton_tol},
      {"max_newton_iters", cfg.integrator.max_newton_iters},
      {"newton_inconsistency_limit", kNewtonInconsistencyLimit},
      {"two_form_probe_step", kTwoFormProbeStep},
      {"tangent_step_relative", kTangentStep},
      {"constraint_fd_step_relative", 1e-5},
      {"constraint_rank_tolerance", 1e-6},
      {"admissibility_tol", cfg.analyses.admissibility_tol},
  };
}

// manifest.json: written when the run starts, rewritten when it ends.
class Manifest {
 public:
  Manifest(fs::path dir, const std::string& command, const RunConfig& cfg)
      : file_(std::move(dir) / "manifest.json"), start_(std::chrono::steady_clock::now()) {
    doc_ = {{"command", command},
            {"version", kVersion},
            {"config", cfg.source},
            {"constants", numeric_constants(cfg)},
            {"started_at", utc_timestamp()},
            {"finished_at", nullptr},
            {"status", "running"}};
    write_json(file_, doc_);
  }

  void finish(const std::string& status, const std::string& message = {}) {
    doc_["finished_at"] = utc_timestamp();
    doc_["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    doc_["status"] = status;
    if (!message.empty()) doc_["message"] = message;
    write_json(file_, doc_);
  }

 private:
  fs::path file_;
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

json to_json(const DriftReport& r) {
  return {{"max_abs_drift", r.max_abs_drift},
          {"max_rel_drift", r.max_rel_drift},
          {"secular_slope", r.secular_slope},
          {"amplitude", r.amplitude},
          {"sign_stable", r.sign_stable}};
}

json to_json(const NodeArray& a) {
  json rows = json::array();
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    json row = json::array();
    for (Eigen::Index i = 0; i < a.cols(); ++i) row.push_back(a(k, i));
    rows.push_back(row);
  }
  return rows;
}

json constraint_report(const ChainSystem& sys, const ChainState& s, const AnalysesConfig& a) {
  const Eigen::MatrixXd kernel = kernel_matrix(mass_matrix(sys, s));
  json basis = json::array();
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    json v = json::array();
    for (Eigen::Index i = 0; i < kernel.rows(); ++i) v.push_back(kernel(i, c));
    basis.push_back(v);
  }
  const ConstraintChain chain = constraint_chain(sys, s, a.max_depth);
  json levels = json::array();
  const auto values = chain.values(s);
  for (std::size_t i = 0; i < values.size(); ++i)
    levels.push_back({{"level", i + 1}, {"values", values[i]}});
  const AccelerationSolve acc = solve_accelerations(sys, s, std::numeric_limits<double>::infinity());
  return {{"kernel_dimension", kernel.cols()},
          {"kernel_basis", basis},
          {"force_consistency", acc.consistency},
          {"levels", levels},
          {"depth", chain.depth},
          {"stabilized", chain.stabilized},
          {"max_depth", a.max_depth},
          {"admissibility_tol", a.admissibility_tol},
          {"admissible", is_admissible(sys, s, chain, a.admissibility_tol)}};
}

std::string trajectory_csv(const Trajectory& traj, int stride) {
  const Eigen::Index nodes = traj.states.front().y.rows();
  const Eigen::Index m = traj.states.front().y.cols();
  auto name = [&](const char* prefix, Eigen::Index k, Eigen::Index i) {
    std::string s = std::string(prefix) + "_" + std::to_string(k);
    if (m > 1) s += "_" + std::to_string(i + 1);
    return s;
  };
  std::string out = "t";
  for (const char* prefix : {"y", "v"})
    for (Eigen::Index k = 0; k < nodes; ++k)
      for (Eigen::Index i = 0; i < m; ++i) out += "," + name(prefix, k, i);
  out += ",energy,noether,newton_iters,inconsistency\n";
  for (std::size_t n = 0; n < traj.size(); n += static_cast<std::size_t>(stride)) {
    const ChainState& s = traj.states[n];
    out += format_number(traj.times[n]);
    for (const NodeArray* a : {&s.y, &s.ydot})
      for (Eigen::Index k = 0; k < nodes; ++k)
        for (Eigen::Index i = 0; i < m; ++i) out += "," + format_number((*a)(k, i));
    out += "," + format_number(traj.energy[n]) + "," + format_number(traj.noether[n]) + "," +
           std::to_string(traj.newton_iters[n]) + "," + format_number(traj.inconsistency[n]) + "\n";
  }
  return out;
}

json probe_report(const ChainSystem& sys, const Trajectory& traj, const StepperConfig& cfg) {
  const int k = (sys.first_dynamic() + sys.last_dynamic()) / 2;
  const int k2 = std::min(k + 1, sys.last_dynamic());
  Tangent a{sys.zeros(), sys.zeros()}, b{sys.zeros(), sys.zeros()};
  a.d_cur(k, 0) = 1.0;
  b.d_prev(k, 0) = 1.0;
  b.d_cur(k2, 0) = 0.5;
  const std::vector<double> w = symplectic_drift(sys, traj, cfg, a, b);
  double dev = 0.0;
  for (double x : w) dev = std::max(dev, std::abs(x - w.front()));
  return {{"initial", w.front()},
          {"max_abs_deviation", dev},
          {"max_rel_deviation", w.front() != 0.0 ? dev / std::abs(w.front()) : dev},
          {"samples", w.size()}};
}

using Body = std::function<void(const RunConfig&, const fs::path&, std::ostream&)>;

int run_command(const std::string& command, const fs::path& config_path,
                const CommandOptions& opts, const Body& body) {
  std::ostream& out = opts.out ? *opts.out : std::cout;
  std::ostream& err = opts.err ? *opts.err : std::cerr;
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const fs::path dir = opts.output_dir ? *opts.output_dir : fs::path(cfg.output.directory);
  std::optional<Manifest> manifest;
  try {
    fs::create_directories(dir);
    manifest.emplace(dir, command, cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  try {
    body(cfg, dir, out);
    manifest->finish("ok");
    return kExitOk;
  } catch (const ConfigError& e) {
    manifest->finish("config_error", e.what());
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    const std::string msg = dynamic_cast<const StepFailure*>(&e)
                                ? std::string(e.what())
                                : std::string("solver failure at step 0: ") + e.what();
    manifest->finish("solver_failure", msg);
    err << "error: " << msg << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    manifest->finish("failed", e.what());
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int cmd_simulate(const fs::path& config, const CommandOptions& opts) {
  return run_command("simulate", config, opts, [](const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    const ChainSystem sys = build_system(cfg);
    const ChainState s0 = build_initial_state(cfg, sys);
    const StepperConfig step = build_stepper(cfg);
    const Generator xi = build_generator(cfg);
    const Trajectory traj = run_simulation(sys, s0, step, cfg.integrator.T, xi);

    write_text(dir / "trajectory.csv", trajectory_csv(traj, cfg.output.trajectory_stride));

    json summary;
    summary["scheme"] = std::string(scheme_name(traj.scheme));
    summary["dt"] = traj.dt;
    summary["steps"] = traj.size() - 1;
    summary["t_final"] = traj.times.back();
    summary["seed_fallback"] = traj.seed_fallback;
    summary["max_newton_iters"] = *std::max_element(traj.newton_iters.begin(), traj.newton_iters.end());
    summary["max_inconsistency"] = *std::max_element(traj.inconsistency.begin(), traj.inconsistency.end());
    if (cfg.analyses.energy) {
      summary["energy_initial"] = traj.energy.front();
      summary["energy_drift"] = to_json(energy_drift(traj));
    }
    summary["noether_initial"] = traj.noether.front();
    summary["noether_drift"] = to_json(noether_drift(traj));
    if (cfg.analyses.symplectic_probe) summary["symplectic_probe"] = probe_report(sys, traj, step);
    if (cfg.analyses.constraint_chain) summary["constraints"] = constraint_report(sys, s0, cfg.analyses);
    summary["final_state"] = {{"t", traj.states.back().t},
                              {"y", to_json(traj.states.back().y)},
                              {"ydot", to_json(traj.states.back().ydot)}};
    write_json(dir / "summary.json", summary);
    out << "simulate: " << traj.size() - 1 << " steps of " << scheme_name(traj.scheme)
        << ", energy drift " << format_number(energy_drift(traj).max_abs_drift) << ", output in "
        << dir.string() << "\n";
  });
}

int cmd_diagnose(const fs::path& config, const CommandOptions& opts) {
  return run_command("diagnose", config, opts, [](const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    const ChainSystem sys = build_system(cfg);
    const ChainState s0 = build_initial_state(cfg, sys);
    const json report = constraint_report(sys, s0, cfg.analyses);
    write_json(dir / "constraints.json", report);
    out << "diagnose: kernel dimension " << report["kernel_dimension"].get<long>() << ", depth "
        << report["depth"].get<int>() << (report["stabilized"].get<bool>() ? " (stabilized)" : " (not stabilized)")
        << ", " << (report["admissible"].get<bool>() ? "admissible" : "inadmissible") << "\n";
  });
}

int cmd_converge(const fs::path& config, const CommandOptions& opts) {
  return run_command("converge", config, opts, [](const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    if (!cfg.refinement) throw ConfigError("refinement", "the converge command needs a refinement block");
    if (cfg.model.generic) throw ConfigError("model.lagrangian", "convergence studies need the wave model (sigma, f)");
    ConvergenceSetup setup;
    setup.spec = make_wave_spec(cfg.model.sigma, cfg.model.f, cfg.model.h);
    setup.exact = parse_expression(cfg.refinement->exact);
    setup.length = cfg.refinement->length;
    setup.T = cfg.refinement->T;
    setup.levels = cfg.refinement->levels;
    setup.dt_factor = cfg.refinement->dt_factor;
    setup.scheme = cfg.integrator.scheme;
    setup.newton_tol = cfg.integrator.newton_tol;
    const auto rows = convergence_study(setup);
    std::string csv = "h,error,observed_order\n";
    for (const auto& r : rows) {
      csv += format_number(r.h) + "," + format_number(r.error) + ",";
      if (!std::isnan(r.observed_order)) csv += format_number(r.observed_order);
      csv += "\n";
    }
    write_text(dir / "convergence.csv", csv);
    out << csv;
  });
}

int cmd_check(const CheckOptions& opts) {
  std::ostream& out = opts.out ? *opts.out : std::cout;
  AcceptanceOptions a;
  if (opts.newton_tol) a.newton_tol = *opts.newton_tol;
  bool all = true;
  for (const auto& r : run_acceptance(a)) {
    out << format_result(r) << "\n" << std::flush;
    all = all && r.passed;
  }
  out << (all ? "all acceptance criteria passed" : "acceptance FAILED") << "\n";
  return all ? kExitOk : kExitFailure;
}

}  // namespace semidisc::cli

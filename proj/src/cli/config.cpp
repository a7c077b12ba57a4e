#include "semidisc/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace semidisc::cli {

using nlohmann::json;

namespace {

// One JSON object of the config; remembers which keys were read so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& doc, std::string path) : path_(std::move(path)) {
    if (!doc.is_object()) throw ConfigError(path_.empty() ? "<document>" : path_, "expected an object");
    doc_ = &doc;
  }

  std::string key(std::string_view name) const {
    return path_.empty() ? std::string(name) : path_ + "." + std::string(name);
  }

  bool has(const std::string& name) {
    seen_.insert(name);
    return doc_->contains(name);
  }

  const json& at(const std::string& name) {
    seen_.insert(name);
    if (!doc_->contains(name)) throw ConfigError(key(name), "missing required key");
    return (*doc_)[name];
  }

  double number(const std::string& name, std::optional<double> fallback = std::nullopt) {
    if (!has(name)) {
      if (fallback) return *fallback;
      throw ConfigError(key(name), "missing required key");
    }
    const json& v = (*doc_)[name];
    if (!v.is_number()) throw ConfigError(key(name), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(key(name), "expected a finite number");
    return x;
  }

  int integer(const std::string& name, std::optional<int> fallback = std::nullopt) {
    if (!has(name)) {
      if (fallback) return *fallback;
      throw ConfigError(key(name), "missing required key");
    }
    const json& v = (*doc_)[name];
    if (!v.is_number_integer()) throw ConfigError(key(name), "expected an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& name, bool fallback) {
    if (!has(name)) return fallback;
    const json& v = (*doc_)[name];
    if (!v.is_boolean()) throw ConfigError(key(name), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& name, std::optional<std::string> fallback = std::nullopt) {
    if (!has(name)) {
      if (fallback) return *fallback;
      throw ConfigError(key(name), "missing required key");
    }
    const json& v = (*doc_)[name];
    if (!v.is_string()) throw ConfigError(key(name), "expected a string");
    return v.get<std::string>();
  }

  /// A string or an array of strings.
  std::vector<std::string> strings(const std::string& name, std::vector<std::string> fallback) {
    if (!has(name)) return fallback;
    const json& v = (*doc_)[name];
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array() || v.empty()) throw ConfigError(key(name), "expected a string or an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ConfigError(key(name), "expected a string or an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  void finish() const {
    for (auto it = doc_->begin(); it != doc_->end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

 private:
  const json* doc_ = nullptr;
  std::string path_;
  std::set<std::string> seen_;
};

Expr checked_expression(const std::string& text, const std::string& key,
                        const std::set<std::string>& allowed) {
  Expr e;
  try {
    e = parse_expression(text);
  } catch (const SyntaxError& err) {
    throw ConfigError(key, err.what());
  }
  for (const auto& v : free_variables(e))
    if (!allowed.count(v)) throw ConfigError(key, "unknown variable '" + v + "'");
  return e;
}

void check_components(const std::vector<std::string>& v, int m, const std::string& key) {
  if (static_cast<int>(v.size()) != m)
    throw ConfigError(key, "expected " + std::to_string(m) + " expression(s), got " +
                               std::to_string(v.size()));
}

}  // namespace

RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  cfg.source = doc;
  Section root(doc, "");

  {
    Section s(root.at("model"), "model");
    ModelConfig& m = cfg.model;
    m.generic = s.has("lagrangian");
    if (m.generic) {
      m.lagrangian = s.string("lagrangian");
      m.m = s.integer("m", 1);
      if (m.m < 1) throw ConfigError("model.m", "must be >= 1");
      try {
        make_generic_pair_lagrangian(checked_expression(m.lagrangian, "model.lagrangian",
                                                        [&] {
                                                          std::set<std::string> names;
                                                          for (Slot sl : {Slot::Y0, Slot::V0, Slot::Y1, Slot::V1})
                                                            for (int i = 1; i <= m.m; ++i)
                                                              names.insert(pair_variable_name(sl, i));
                                                          return names;
                                                        }()),
                                     m.m);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError("model.lagrangian", e.what());
      }
      if (s.has("sigma")) throw ConfigError("model.sigma", "not allowed together with model.lagrangian");
      if (s.has("f")) throw ConfigError("model.f", "not allowed together with model.lagrangian");
    } else {
      m.sigma = s.string("sigma");
      m.f = s.string("f", "0");
      checked_expression(m.sigma, "model.sigma", {"v"});
      checked_expression(m.f, "model.f", {"u"});
      if (s.has("m") && s.integer("m") != 1) throw ConfigError("model.m", "the wave model has m = 1");
    }
    m.h = s.number("h");
    if (!(m.h > 0.0)) throw ConfigError("model.h", "must be > 0");
    m.N = s.integer("N");
    if (m.N < 2) throw ConfigError("model.N", "must be >= 2 (got " + std::to_string(m.N) + ")");
    s.finish();
  }
  const int mdim = cfg.model.m;

  {
    const json empty = json::object();
    Section s(root.has("boundary") ? root.at("boundary") : empty, "boundary");
    const std::string mode = s.string("mode", "fixed");
    if (mode != "fixed" && mode != "free") throw ConfigError("boundary.mode", "expected \"fixed\" or \"free\"");
    cfg.boundary.fixed = mode == "fixed";
    const std::vector<std::string> zeros(static_cast<std::size_t>(mdim), "0");
    cfg.boundary.left = s.strings("left", zeros);
    cfg.boundary.right = s.strings("right", zeros);
    if (cfg.boundary.fixed) {
      check_components(cfg.boundary.left, mdim, "boundary.left");
      check_components(cfg.boundary.right, mdim, "boundary.right");
      for (const auto& e : cfg.boundary.left) checked_expression(e, "boundary.left", {"t"});
      for (const auto& e : cfg.boundary.right) checked_expression(e, "boundary.right", {"t"});
    }
    s.finish();
  }

  {
    Section s(root.at("initial"), "initial");
    const std::vector<std::string> zeros(static_cast<std::size_t>(mdim), "0");
    cfg.initial.u = s.strings("u", zeros);
    cfg.initial.v = s.strings("v", zeros);
    check_components(cfg.initial.u, mdim, "initial.u");
    check_components(cfg.initial.v, mdim, "initial.v");
    for (const auto& e : cfg.initial.u) checked_expression(e, "initial.u", {"x"});
    for (const auto& e : cfg.initial.v) checked_expression(e, "initial.v", {"x"});
    s.finish();
  }

  {
    Section s(root.at("integrator"), "integrator");
    IntegratorConfig& ic = cfg.integrator;
    try {
      ic.scheme = parse_scheme(s.string("scheme", "variational_midpoint"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("integrator.scheme", e.what());
    }
    ic.dt = s.number("dt");
    if (!(ic.dt > 0.0)) throw ConfigError("integrator.dt", "must be > 0");
    ic.T = s.number("T");
    if (!(ic.T > 0.0)) throw ConfigError("integrator.T", "must be > 0");
    if (step_count(ic.T, ic.dt) < 1) throw ConfigError("integrator.T", "must allow at least one step");
    ic.newton_tol = s.number("newton_tol", 1e-12);
    if (!(ic.newton_tol > 0.0)) throw ConfigError("integrator.newton_tol", "must be > 0");
    ic.max_newton_iters = s.integer("max_newton_iters", 50);
    if (ic.max_newton_iters < 1) throw ConfigError("integrator.max_newton_iters", "must be >= 1");
    s.finish();
  }

  {
    const json empty = json::object();
    Section s(root.has("analyses") ? root.at("analyses") : empty, "analyses");
    AnalysesConfig& a = cfg.analyses;
    a.energy = s.boolean("energy", true);
    if (s.has("noether_generator")) {
      const json& g = s.at("noether_generator");
      if (!g.is_array() || static_cast<int>(g.size()) != mdim)
        throw ConfigError("analyses.noether_generator",
                          "expected an array of " + std::to_string(mdim) + " number(s)");
      std::vector<double> v;
      for (const auto& e : g) {
        if (!e.is_number()) throw ConfigError("analyses.noether_generator", "expected numbers");
        v.push_back(e.get<double>());
      }
      a.noether_generator = v;
    }
    a.symplectic_probe = s.boolean("symplectic_probe", false);
    if (a.symplectic_probe && cfg.integrator.scheme != Scheme::VariationalMidpoint)
      throw ConfigError("analyses.symplectic_probe", "requires integrator.scheme = variational_midpoint");
    a.constraint_chain = s.boolean("constraint_chain", false);
    a.max_depth = s.integer("max_depth", 4);
    if (a.max_depth < 1) throw ConfigError("analyses.max_depth", "must be >= 1");
    a.admissibility_tol = s.number("admissibility_tol", 1e-8);
    if (!(a.admissibility_tol > 0.0)) throw ConfigError("analyses.admissibility_tol", "must be > 0");
    s.finish();
  }

  {
    const json empty = json::object();
    Section s(root.has("output") ? root.at("output") : empty, "output");
    cfg.output.directory = s.string("directory", "out");
    if (cfg.output.directory.empty()) throw ConfigError("output.directory", "must not be empty");
    cfg.output.trajectory_stride = s.integer("trajectory_stride", 1);
    if (cfg.output.trajectory_stride < 1) throw ConfigError("output.trajectory_stride", "must be >= 1");
    s.finish();
  }

  if (root.has("refinement")) {
    Section s(root.at("refinement"), "refinement");
    RefinementConfig r;
    r.exact = s.string("exact");
    checked_expression(r.exact, "refinement.exact", {"t", "x"});
    if (s.has("levels")) {
      const json& l = s.at("levels");
      if (!l.is_array() || l.size() < 2) throw ConfigError("refinement.levels", "expected at least two cell counts");
      r.levels.clear();
      for (const auto& e : l) {
        if (!e.is_number_integer() || e.get<int>() < 2)
          throw ConfigError("refinement.levels", "expected integers >= 2");
        r.levels.push_back(e.get<int>());
      }
    }
    r.T = s.number("T", 0.5);
    if (!(r.T > 0.0)) throw ConfigError("refinement.T", "must be > 0");
    r.length = s.number("length", 1.0);
    if (!(r.length > 0.0)) throw ConfigError("refinement.length", "must be > 0");
    r.dt_factor = s.number("dt_factor", 0.25);
    if (!(r.dt_factor > 0.0)) throw ConfigError("refinement.dt_factor", "must be > 0");
    s.finish();
    cfg.refinement = r;
  }

  root.finish();
  return cfg;
}

RunConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ChainSystem build_system(const RunConfig& cfg) {
  const ModelConfig& m = cfg.model;
  PairLagrangian pair = m.generic
                            ? make_generic_pair_lagrangian(parse_expression(m.lagrangian), m.m)
                            : make_wave_pair_lagrangian(make_wave_spec(m.sigma, m.f, m.h));
  BoundaryMode mode = BoundaryMode::free_ends();
  if (cfg.boundary.fixed) {
    std::vector<TimeCurve> left, right;
    for (const auto& e : cfg.boundary.left) left.push_back(TimeCurve::parse(e));
    for (const auto& e : cfg.boundary.right) right.push_back(TimeCurve::parse(e));
    mode = BoundaryMode::fixed_ends(std::move(left), std::move(right));
  }
  return ChainSystem(std::move(pair), m.N, std::move(mode));
}

ChainState build_initial_state(const RunConfig& cfg, const ChainSystem& sys) {
  const std::vector<std::string> slots{"x"};
  NodeArray y(sys.nodes(), sys.dim()), v(sys.nodes(), sys.dim());
  for (int i = 0; i < sys.dim(); ++i) {
    const auto c = static_cast<std::size_t>(i);
    const CompiledExpr u(parse_expression(cfg.initial.u[c]), slots);
    const CompiledExpr ud(parse_expression(cfg.initial.v[c]), slots);
    for (int k = 0; k < sys.nodes(); ++k) {
      const double x = k * cfg.model.h;
      y(k, i) = u(std::span<const double>(&x, 1));
      v(k, i) = ud(std::span<const double>(&x, 1));
    }
  }
  return sys.make_state(0.0, std::move(y), std::move(v));
}

StepperConfig build_stepper(const RunConfig& cfg) {
  StepperConfig s;
  s.dt = cfg.integrator.dt;
  s.scheme = cfg.integrator.scheme;
  s.newton_tol = cfg.integrator.newton_tol;
  s.max_newton_iters = cfg.integrator.max_newton_iters;
  return s;
}

Generator build_generator(const RunConfig& cfg) {
  Eigen::VectorXd dir = Eigen::VectorXd::Ones(cfg.model.m);
  if (cfg.analyses.noether_generator)
    dir = Eigen::Map<const Eigen::VectorXd>(cfg.analyses.noether_generator->data(),
                                            static_cast<Eigen::Index>(cfg.analyses.noether_generator->size()));
  return Generator::translation(dir);
}

}  // namespace semidisc::cli

#include "semidisc/cli/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "semidisc/cli/commands.hpp"
#include "semidisc/constraint.hpp"
#include "semidisc/diagnostics.hpp"

namespace semidisc::cli {

namespace fs = std::filesystem;

const std::vector<std::pair<std::string, std::string>>& reference_configs() {
  static const std::vector<std::pair<std::string, std::string>> configs = {
      {"linear_wave_fixed.json", R"js({
  "model": {"sigma": "v^2/2", "f": "0", "h": 0.125, "N": 8},
  "boundary": {"mode": "fixed", "left": "0", "right": "0"},
  "initial": {"u": "sin(pi*x)", "v": "0"},
  "integrator": {"scheme": "variational_midpoint", "dt": 0.01, "T": 1, "newton_tol": 1e-12, "max_newton_iters": 50},
  "analyses": {"energy": true, "noether_generator": [1], "symplectic_probe": true},
  "output": {"directory": "out/linear_wave_fixed", "trajectory_stride": 10}
}
)js"},
      {"quartic_wave_rk4.json", R"js({
  "model": {"sigma": "v^2/2", "f": "u^4/4", "h": 0.1, "N": 16},
  "boundary": {"mode": "fixed", "left": "0", "right": "0"},
  "initial": {"u": "0.2*sin(pi*x/1.6)", "v": "0"},
  "integrator": {"scheme": "rk4", "dt": 0.01, "T": 2},
  "analyses": {"energy": true},
  "output": {"directory": "out/quartic_wave_rk4", "trajectory_stride": 5}
}
)js"},
      {"free_wave_admissible.json", R"js({
  "model": {"sigma": "v^2/2", "f": "0", "h": 1, "N": 2},
  "boundary": {"mode": "free"},
  "initial": {"u": "x", "v": "0"},
  "integrator": {"scheme": "variational_midpoint", "dt": 0.05, "T": 1},
  "analyses": {"constraint_chain": true, "max_depth": 4},
  "output": {"directory": "out/free_wave_admissible"}
}
)js"},
      {"free_wave_inadmissible.json", R"js({
  "model": {"sigma": "v^2/2", "f": "0", "h": 1, "N": 2},
  "boundary": {"mode": "free"},
  "initial": {"u": "x*(2-x)", "v": "0"},
  "integrator": {"scheme": "variational_midpoint", "dt": 0.05, "T": 1},
  "analyses": {"constraint_chain": true, "max_depth": 4},
  "output": {"directory": "out/free_wave_inadmissible"}
}
)js"},
      {"convergence.json", R"js({
  "model": {"sigma": "v^2/2", "f": "0", "h": 0.25, "N": 4},
  "boundary": {"mode": "fixed", "left": "0", "right": "0"},
  "initial": {"u": "sin(pi*x)", "v": "0"},
  "integrator": {"scheme": "variational_midpoint", "dt": 0.01, "T": 0.5},
  "refinement": {"exact": "sin(pi*x)*cos(pi*t)", "levels": [4, 8, 16, 32], "T": 0.5, "length": 1, "dt_factor": 0.25},
  "output": {"directory": "out/convergence"}
}
)js"},
  };
  return configs;
}

std::string format_result(const CriterionResult& r) {
  char head[128];
  std::snprintf(head, sizeof head, "%s %2d  %-28s (%.2f s / %.0f s)  ", r.passed ? "PASS" : "FAIL", r.id,
                r.title.c_str(), r.seconds, r.budget_seconds);
  return head + r.detail;
}

namespace {

using Vec = Eigen::VectorXd;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

BoundaryMode zero_ends() {
  return BoundaryMode::fixed_ends({TimeCurve::parse("0")}, {TimeCurve::parse("0")});
}

ChainSystem wave(const std::string& sigma, const std::string& f, double h, int cells,
                 BoundaryMode mode) {
  return ChainSystem(make_wave_pair_lagrangian(make_wave_spec(sigma, f, h)), cells, std::move(mode));
}

NodeArray random_nodes(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  NodeArray a(rows, cols);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
  return a;
}

// ---- 1 -------------------------------------------------------------------

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

Outcome derivative_oracles() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::vector<PairLagrangian> pairs = {
      make_wave_pair_lagrangian(make_wave_spec("v^2/2 + v^4/12", "u^4/4 - cos(u)", 0.3)),
      make_generic_pair_lagrangian(
          parse_expression("0.5*(v0_1^2 + v1_1^2) + 0.3*v0_2*v1_2 + v0_1*y1_2 - sin(y0_1 - y1_2) "
                           "- 0.5*(y1_1 - y0_1)^2 - exp(0.2*y0_2)*v1_1^2"),
          2)};
  double worst = 0.0;
  int checks = 0;
  for (const auto& pair : pairs) {
    const int n = 4 * pair.dim();
    for (int trial = 0; trial < 100; ++trial) {
      PairPoint x(n);
      for (int i = 0; i < n; ++i) x(i) = u(rng);
      const PairDerivatives d = pair.evaluate(x, true);
      for (int i = 0; i < n; ++i) {
        const double step = 1e-5 * (1.0 + std::abs(x(i)));
        PairPoint xp = x, xm = x;
        xp(i) += step;
        xm(i) -= step;
        const double fd = (pair.value(xp) - pair.value(xm)) / (2.0 * step);
        worst = std::max(worst, rel_err(d.gradient(i), fd));
        const Vec gp = pair.evaluate(xp, false).gradient, gm = pair.evaluate(xm, false).gradient;
        for (int j = 0; j < n; ++j)
          worst = std::max(worst, rel_err(d.hessian(j, i), (gp(j) - gm(j)) / (2.0 * step)));
        ++checks;
      }
    }
  }

  // chain momenta and residual against the total Lagrangian
  for (const bool fixed : {false, true}) {
    const ChainSystem sys(pairs[0], 5,
                          fixed ? BoundaryMode::fixed_ends({TimeCurve::parse("0.3*sin(2*t)")},
                                                           {TimeCurve::parse("t^2/4")})
                                : BoundaryMode::free_ends());
    for (int trial = 0; trial < 100; ++trial) {
      const ChainState s = sys.make_state(u(rng), random_nodes(rng, sys.nodes(), 1),
                                          random_nodes(rng, sys.nodes(), 1));
      const NodeArray p = momenta(sys, s);
      NodeArray acc = random_nodes(rng, sys.nodes(), 1);
      sys.apply_boundary_accelerations(s.t, acc);
      const Vec r = el_residual(sys, s, acc);
      for (int k = 0; k < sys.nodes(); ++k) {
        const double step = 1e-5;
        auto lag = [&](double dy, double dv) {
          ChainState t = s;
          t.y(k, 0) += dy;
          t.ydot(k, 0) += dv;
          return assemble_total_lagrangian(sys, t);
        };
        worst = std::max(worst, rel_err(p(k, 0), (lag(0, step) - lag(0, -step)) / (2.0 * step)));
        ++checks;
        if (k < sys.first_dynamic() || k > sys.last_dynamic()) continue;
        // dL/dy - d/dt dL/dv, the time derivative taken along (ydot, yddot)
        const double dldy = (lag(step, 0) - lag(-step, 0)) / (2.0 * step);
        auto pk = [&](double tau) {
          ChainState t = s;
          t.y += tau * s.ydot;
          t.ydot += tau * acc;
          return momenta(sys, t)(k, 0);
        };
        const double dpdt = (pk(step) - pk(-step)) / (2.0 * step);
        worst = std::max(worst, rel_err(r(k - sys.first_dynamic()), dldy - dpdt));
        ++checks;
      }
    }
  }
  return {worst <= 1e-6, std::to_string(checks) + " derivative checks, worst relative error " + fmt(worst)};
}

// ---- 2 -------------------------------------------------------------------

Outcome kernel_reproduction() {
  double worst = 0.0;
  bool dims_ok = true;
  std::string bad;
  for (int cells = 2; cells <= 32; ++cells) {
    const ChainSystem sys = wave("v^2/2", "u^4/4", 0.1, cells, BoundaryMode::free_ends());
    std::mt19937_64 rng(static_cast<unsigned long>(cells));
    const ChainState s = sys.make_state(0.0, random_nodes(rng, sys.nodes(), 1), random_nodes(rng, sys.nodes(), 1));
    const auto basis = kernel_basis(mass_matrix(sys, s));
    if (basis.size() != 1) {
      dims_ok = false;
      bad += " N=" + std::to_string(cells) + ":dim " + std::to_string(basis.size());
      continue;
    }
    Vec alt(sys.nodes());
    for (int k = 0; k < sys.nodes(); ++k) alt(k) = (k % 2 == 0 ? 1.0 : -1.0);
    alt /= std::sqrt(static_cast<double>(sys.nodes()));
    worst = std::max(worst, (basis[0] - alt).cwiseAbs().maxCoeff());
  }
  const bool ok = dims_ok && worst <= 1e-12;
  return {ok, "N = 2..32 kernel dimension 1" + std::string(dims_ok ? "" : " violated:" + bad) +
                  ", max component deviation from alternating vector " + fmt(worst)};
}

// ---- 3 -------------------------------------------------------------------

Outcome del_equivalence(double newton_tol) {
  const ChainSystem sys = wave("v^2/2", "u^4/4", 0.125, 8,
                              BoundaryMode::fixed_ends({TimeCurve::parse("0.1*sin(3*t)")}, {TimeCurve::parse("0")}));
  StepperConfig cfg;
  cfg.dt = 0.05;
  cfg.newton_tol = newton_tol;
  std::mt19937_64 rng(7);
  NodeArray y0 = random_nodes(rng, sys.nodes(), 1, 0.5);
  NodeArray y1 = y0 + random_nodes(rng, sys.nodes(), 1, 0.02);
  sys.apply_boundary_positions(0.0, y0);
  sys.apply_boundary_positions(cfg.dt, y1);
  const NodeArray y2 = discrete_el_step(sys, DiscretePair{cfg.dt, cfg.dt, y0, y1}, cfg).y_next;

  // brute force: stationary point of S(q) = L_d(y0, q) + L_d(q, y2) over the
  // interior of q, with finite-difference gradient and Hessian of S
  const int off = sys.dyn_offset(), ds = sys.dyn_size();
  auto action = [&](const Vec& z) {
    NodeArray q = (y0 + y2) / 2.0;
    sys.apply_boundary_positions(cfg.dt, q);
    flat(q).segment(off, ds) = z;
    return discrete_lagrangian(sys, y0, q, cfg.dt) + discrete_lagrangian(sys, q, y2, cfg.dt);
  };
  auto grad = [&](const Vec& z) {
    Vec g(ds);
    for (int i = 0; i < ds; ++i) {
      const double h = 1e-5;
      Vec zp = z, zm = z;
      zp(i) += h;
      zm(i) -= h;
      g(i) = (action(zp) - action(zm)) / (2.0 * h);
    }
    return g;
  };
  Vec z = flat(NodeArray((y0 + y2) / 2.0)).segment(off, ds);
  for (int it = 0; it < 50; ++it) {
    const Vec g = grad(z);
    Eigen::MatrixXd hess(ds, ds);
    for (int i = 0; i < ds; ++i) {
      const double h = 1e-4;
      Vec zp = z, zm = z;
      zp(i) += h;
      zm(i) -= h;
      hess.col(i) = (grad(zp) - grad(zm)) / (2.0 * h);
    }
    const Vec step = hess.fullPivLu().solve(g);
    z -= step;
    if (step.norm() < 1e-14) break;
  }
  const double err = (z - flat(y1).segment(off, ds)).cwiseAbs().maxCoeff();
  return {err <= 1e-9, "max |argmin action - middle point| = " + fmt(err)};
}

// ---- 4 -------------------------------------------------------------------

Outcome energy_behaviour(double newton_tol) {
  const double h = 0.1;
  const int cells = 16;
  const ChainSystem sys = wave("v^2/2", "u^4/4", h, cells, zero_ends());
  NodeArray y(cells + 1, 1);
  for (int k = 0; k <= cells; ++k) y(k, 0) = 0.2 * std::sin(M_PI * k / cells);
  const ChainState s0 = sys.make_state(0.0, y, sys.zeros());
  StepperConfig cfg;
  cfg.dt = 0.01;
  cfg.newton_tol = newton_tol;
  const double T = 1e4 * cfg.dt;

  const Trajectory vm = run_simulation(sys, s0, cfg, T);
  cfg.scheme = Scheme::Rk4;
  const Trajectory rk = run_simulation(sys, s0, cfg, T);

  const DriftReport rv = energy_drift(vm);
  const DriftReport rr = energy_drift(rk);
  const std::vector<double> t_short(vm.times.begin(), vm.times.begin() + 1001);
  const std::vector<double> e_short(vm.energy.begin(), vm.energy.begin() + 1001);
  const DriftReport rshort = drift_report(t_short, e_short);

  const double ratio = std::abs(rv.secular_slope) / rv.amplitude;
  const bool bounded = rv.max_abs_drift <= 1.5 * rshort.max_abs_drift;
  const bool vm_ok = rv.amplitude > 0.0 && ratio <= 1e-3 && bounded;
  const bool rk_ok = rr.secular_slope != 0.0 && rr.sign_stable;
  return {vm_ok && rk_ok,
          "midpoint |slope|/amplitude " + fmt(ratio) + ", drift 1e4/1e3 steps " +
              fmt(rv.max_abs_drift / rshort.max_abs_drift) + "; rk4 slope " + fmt(rr.secular_slope) +
              (rr.sign_stable ? " sign-stable" : " not sign-stable")};
}

// ---- 5 -------------------------------------------------------------------

Outcome discrete_noether(double newton_tol) {
  const int cells = 8;
  const ChainSystem sys = wave("v^2/2", "0", 0.125, cells, BoundaryMode::free_ends());
  // smooth data projected onto both constraint levels (kernel . F = 0 and its rate)
  NodeArray y(cells + 1, 1), v(cells + 1, 1);
  for (int k = 0; k <= cells; ++k) {
    const double x = k * 0.125;
    y(k, 0) = 0.3 * std::sin(2.0 * x) + 0.2 * x;
    v(k, 0) = 0.5 * std::cos(3.0 * x) + 0.1;
  }
  const Vec kernel = kernel_basis(mass_matrix(sys, sys.make_state(0.0, y, v)))[0];
  const ChainDerivatives d = chain_derivatives(sys, y, v, true);
  const Vec c = d.hyy.transpose() * kernel;  // phi = kernel . (dL/dy) = c . y for this model
  flat(y) -= (c.dot(flat(y)) / c.squaredNorm()) * c;
  flat(v) -= (c.dot(flat(v)) / c.squaredNorm()) * c;

  StepperConfig cfg;
  cfg.dt = 0.01;
  cfg.newton_tol = newton_tol;
  const Trajectory traj = run_simulation(sys, sys.make_state(0.0, y, v), cfg, 1000 * cfg.dt);
  // J_d from the pairs directly, independent of the recorded series
  const Generator xi = Generator::translation(Vec::Ones(1));
  double j0 = 0.0, drift = 0.0;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const NodeArray& prev = n == 0 ? traj.seed_prev : traj.states[n - 1].y;
    const double j = discrete_momentum_map(sys, DiscretePair{traj.times[n], traj.dt, prev, traj.states[n].y}, xi);
    if (n == 0) j0 = j;
    drift = std::max(drift, std::abs(j - j0));
  }
  const double limit = 100.0 * newton_tol;
  return {drift <= limit, "J_d = " + fmt(j0) + ", drift over 1000 steps " + fmt(drift) + " (limit " + fmt(limit) + ")"};
}

// ---- 6 -------------------------------------------------------------------

Outcome symplectic_probe(double newton_tol) {
  const double h = 0.1;
  const int cells = 16;
  const ChainSystem sys = wave("v^2/2", "u^4/4", h, cells, zero_ends());
  NodeArray y(cells + 1, 1);
  for (int k = 0; k <= cells; ++k) y(k, 0) = 0.2 * std::sin(M_PI * k / cells);
  StepperConfig cfg;
  cfg.dt = 0.01;
  cfg.newton_tol = newton_tol;
  const Trajectory traj = run_simulation(sys, sys.make_state(0.0, y, sys.zeros()), cfg, 1000 * cfg.dt);
  Tangent a{sys.zeros(), sys.zeros()}, b{sys.zeros(), sys.zeros()};
  a.d_cur(3, 0) = 1.0;
  a.d_prev(8, 0) = 0.4;
  b.d_prev(3, 0) = 1.0;
  b.d_cur(4, 0) = 0.3;
  b.d_cur(8, 0) = -0.7;
  const std::vector<double> w = symplectic_drift(sys, traj, cfg, a, b);
  double dev = 0.0;
  for (double x : w) dev = std::max(dev, std::abs(x - w.front()) / std::abs(w.front()));
  return {w.front() != 0.0 && dev <= 1e-6,
          "omega_d = " + fmt(w.front()) + ", max relative change over 1000 steps " + fmt(dev)};
}

// ---- 7 -------------------------------------------------------------------

Outcome spatial_conservation() {
  // y_k(t) = s k h + a sin(pi k/N) cos(w t) solves the FixedEnds linear chain
  // for w = 2 tan(pi/(2N))/h; on t in [0, pi/w] all velocities vanish at both
  // ends, so every interior momentum does too.
  const int cells = 8;
  const double h = 1.0 / cells, slope = 0.3, amp = 0.5;
  const double w = 2.0 * std::tan(M_PI / (2.0 * cells)) / h;
  const double T = M_PI / w;
  const std::string right = std::to_string(slope * cells * h);
  const ChainSystem sys =
      wave("v^2/2", "0", h, cells, BoundaryMode::fixed_ends({TimeCurve::parse("0")}, {TimeCurve::parse(right)}));
  auto sample = [&](int intervals) {
    ChainSamples sol;
    double residual = 0.0;
    for (int j = 0; j <= intervals; ++j) {
      const double t = T * j / intervals;
      NodeArray y(cells + 1, 1), v(cells + 1, 1), a(cells + 1, 1);
      for (int k = 0; k <= cells; ++k) {
        const double mode = amp * std::sin(M_PI * k / cells);
        y(k, 0) = slope * k * h + mode * std::cos(w * t);
        v(k, 0) = -w * mode * std::sin(w * t);
        a(k, 0) = -w * w * mode * std::cos(w * t);
      }
      ChainState s = sys.make_state(t, y, v);
      residual = std::max(residual, el_residual(sys, s, a).cwiseAbs().maxCoeff());
      sol.times.push_back(t);
      sol.states.push_back(std::move(s));
    }
    const Generator xi = Generator::translation(Vec::Ones(1));
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k < cells; ++k) {
      const double value = spatial_conservation_check(sys, sol, xi, k);
      lo = std::min(lo, value);
      hi = std::max(hi, value);
    }
    return std::make_tuple(hi - lo, residual, 0.5 * (hi + lo));
  };
  const int intervals = 200;
  const double dt = T / intervals;
  const auto [spread, residual, mean] = sample(intervals);
  const auto [spread_fine, residual_fine, mean_fine] = sample(2 * intervals);
  // every cell carries stress s, so the common value is T s / h
  // constant: integrand scale times w^2 times the horizon
  const double c = T * w * w * (slope + 2.0 * amp / h);
  const double bound = c * (dt * dt + residual);
  const bool ok = spread <= bound && spread_fine <= c * (dt * dt / 4.0 + residual_fine) &&
                  std::abs(mean - slope * T / h) <= bound && std::abs(mean_fine - mean) <= bound;
  return {ok, "N=8 spread over k " + fmt(spread) + " (bound " + fmt(bound) + "), halved dt " + fmt(spread_fine) +
                  ", EL residual " + fmt(residual) + ", value " + fmt(mean) + " vs s*T/h " + fmt(slope * T / h)};
}

// ---- 8 -------------------------------------------------------------------

Outcome pde_consistency() {
  const Expr exact = parse_expression("sin(pi*x)*cos(pi*t)");
  const WaveSpec base = make_wave_spec("v^2/2", "0", 1.0);
  std::vector<std::pair<double, double>> points;
  for (int i = 0; i < 7; ++i) points.push_back({0.13 * i, 0.11 * i + 0.05});
  const double pointwise = pde_pointwise_residual(base, exact, points);
  std::vector<double> res;
  std::string detail;
  for (int cells : {8, 16, 32, 64}) {
    WaveSpec spec = base;
    spec.h = 1.0 / cells;
    res.push_back(pde_consistency_check(spec, exact, cells, 0.3));
  }
  bool ok = pointwise <= 1e-12;
  detail = "residuals";
  for (double r : res) detail += " " + fmt(r);
  detail += "; orders";
  for (std::size_t i = 1; i < res.size(); ++i) {
    const double order = std::log2(res[i - 1] / res[i]);
    ok = ok && std::abs(order - 2.0) <= 0.3;
    detail += " " + fmt(order);
  }
  return {ok, detail};
}

// ---- 9 -------------------------------------------------------------------

Outcome gotay_nester() {
  const ChainSystem sys = wave("v^2/2", "0", 1.0, 2, BoundaryMode::free_ends());
  auto state = [&](const Vec& y, const Vec& v) {
    NodeArray yy(3, 1), vv(3, 1);
    flat(yy) = y;
    flat(vv) = v;
    return sys.make_state(0.0, yy, vv);
  };
  const ChainState ref = state(Vec::LinSpaced(3, 0.0, 2.0), Vec::Zero(3));
  const ConstraintChain chain = constraint_chain(sys, ref, 6);
  const bool ref_ok = chain.stabilized && chain.depth == 2 && is_admissible(sys, ref, chain, 1e-8);

  // each level is a fixed multiple of the second difference of y, resp. ydot
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> r1, r2;
  for (int i = 0; i < 20; ++i) {
    Vec y(3), v(3);
    for (int j = 0; j < 3; ++j) {
      y(j) = u(rng);
      v(j) = u(rng);
    }
    const auto vals = chain.values(state(y, v));
    r1.push_back(vals[0][0] / (y(0) - 2.0 * y(1) + y(2)));
    r2.push_back(vals[1][0] / (v(0) - 2.0 * v(1) + v(2)));
  }
  auto spread = [](const std::vector<double>& r) {
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    return (*hi - *lo) / std::abs(r.front());
  };
  const double s1 = spread(r1), s2 = spread(r2);

  Vec vb(3);
  vb << 1.0, -1.0, 1.0;
  const ChainState bad = state(Vec::Zero(3), vb);
  const ConstraintChain bad_chain = constraint_chain(sys, bad, 6);
  const bool rejected = !is_admissible(sys, bad, bad_chain, 1e-8);

  const bool ok = ref_ok && s1 <= 1e-6 && s2 <= 1e-5 && rejected;
  return {ok, "depth " + std::to_string(chain.depth) + (chain.stabilized ? " stabilized" : " not stabilized") +
                  ", reference " + (ref_ok ? "admissible" : "rejected") + ", level ratios " + fmt(r1.front()) +
                  "/" + fmt(r2.front()) + " spread " + fmt(s1) + "/" + fmt(s2) + ", inadmissible state " +
                  (rejected ? "rejected" : "accepted")};
}

// ---- 10 ------------------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() /
                        ("semidisc-acceptance-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  fs::create_directories(root);
  bool ok = true;
  std::string detail;
  std::ostringstream sink;
  int identical = 0;

  for (const auto& [name, text] : reference_configs()) {
    const fs::path cfg = root / name;
    std::ofstream(cfg) << text;
    const bool converge = name == "convergence.json";
    const bool diagnose = name.rfind("free_wave", 0) == 0;
    const std::vector<std::string> files = converge   ? std::vector<std::string>{"convergence.csv"}
                                           : diagnose ? std::vector<std::string>{"constraints.json"}
                                                      : std::vector<std::string>{"trajectory.csv", "summary.json"};
    std::string first[2];
    for (int run = 0; run < 2; ++run) {
      CommandOptions opts;
      opts.output_dir = root / (name + "." + std::to_string(run));
      opts.out = &sink;
      opts.err = &sink;
      const int code = converge ? cmd_converge(cfg, opts) : diagnose ? cmd_diagnose(cfg, opts) : cmd_simulate(cfg, opts);
      if (code != kExitOk) {
        ok = false;
        detail += name + " exit " + std::to_string(code) + "; ";
      }
    }
    for (const auto& f : files) {
      const std::string a = read_file(root / (name + ".0") / f);
      const std::string b = read_file(root / (name + ".1") / f);
      if (a.empty() || a != b) {
        ok = false;
        detail += name + "/" + f + " differs; ";
      } else {
        ++identical;
      }
    }
  }

  // the inadmissible free-ends start must fail at step 0
  {
    const fs::path cfg = root / "free_wave_inadmissible.json";
    std::ostringstream err;
    CommandOptions opts;
    opts.output_dir = root / "inadmissible.sim";
    opts.out = &sink;
    opts.err = &err;
    const int code = cmd_simulate(cfg, opts);
    if (code != kExitSolver || err.str().find("InconsistentForce at step 0") == std::string::npos) {
      ok = false;
      detail += "inadmissible start gave exit " + std::to_string(code) + "; ";
    }
  }

  struct Broken {
    std::string key, json;
  };
  const std::vector<Broken> broken = {
      {"model.N", R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 1}, "initial": {}, "integrator": {"dt": 0.1, "T": 1}})js"},
      {"model.sigma", R"js({"model": {"sigma": "v^^2", "h": 0.1, "N": 4}, "initial": {}, "integrator": {"dt": 0.1, "T": 1}})js"},
      {"integrator.dt", R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 4}, "initial": {}, "integrator": {"dt": -1, "T": 1}})js"},
      {"integrator.dtt", R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 4}, "initial": {}, "integrator": {"dt": 0.1, "T": 1, "dtt": 2}})js"},
      {"initial.u", R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 4}, "initial": {"u": "sin(y)"}, "integrator": {"dt": 0.1, "T": 1}})js"},
      {"output.trajectory_stride", R"js({"model": {"sigma": "v^2/2", "h": 0.1, "N": 4}, "initial": {}, "integrator": {"dt": 0.1, "T": 1}, "output": {"trajectory_stride": 0}})js"},
  };
  int rejected = 0;
  for (std::size_t i = 0; i < broken.size(); ++i) {
    const fs::path cfg = root / ("broken" + std::to_string(i) + ".json");
    std::ofstream(cfg) << broken[i].json;
    std::ostringstream err;
    CommandOptions opts;
    opts.output_dir = root / ("broken" + std::to_string(i));
    opts.out = &sink;
    opts.err = &err;
    const int code = cmd_simulate(cfg, opts);
    if (code == kExitConfig && err.str().find("'" + broken[i].key + "'") != std::string::npos) {
      ++rejected;
    } else {
      ok = false;
      detail += broken[i].key + " not reported (exit " + std::to_string(code) + "); ";
    }
  }
  std::error_code ec;
  fs::remove_all(root, ec);
  return {ok, detail + std::to_string(identical) + " output files byte-identical across runs, " +
                  std::to_string(rejected) + "/" + std::to_string(broken.size()) +
                  " malformed configs rejected with exit 2 naming the key"};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  struct Entry {
    int id;
    std::string title;
    double budget;
    std::function<Outcome()> run;
  };
  const double tol = opts.newton_tol;
  const std::vector<Entry> entries = {
      {1, "derivative oracles", 5, derivative_oracles},
      {2, "kernel reproduction", 1, kernel_reproduction},
      {3, "discrete EL equivalence", 1, [tol] { return del_equivalence(tol); }},
      {4, "energy behaviour", 30, [tol] { return energy_behaviour(tol); }},
      {5, "discrete Noether", 10, [tol] { return discrete_noether(tol); }},
      {6, "symplectic probe", 10, [tol] { return symplectic_probe(tol); }},
      {7, "spatial conservation law", 10, spatial_conservation},
      {8, "PDE consistency", 10, pde_consistency},
      {9, "Gotay-Nester stabilization", 1, gotay_nester},
      {10, "CLI determinism/validation", 5, cli_determinism},
  };
  std::vector<CriterionResult> out;
  for (const auto& e : entries) {
    CriterionResult r;
    r.id = e.id;
    r.title = e.title;
    r.budget_seconds = e.budget;
    const auto start = std::chrono::steady_clock::now();
    try {
      const Outcome o = e.run();
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& ex) {
      r.passed = false;
      r.detail = std::string("raised: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.seconds > r.budget_seconds) {
      r.passed = false;
      r.detail += " [runtime budget exceeded]";
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace semidisc::cli

#include "semidisc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semidisc/constraint.hpp"

namespace semidisc {

long step_count(double T, double dt) {
  return static_cast<long>(std::ceil(T / dt - 1e-9));
}

namespace {

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const InconsistentForce*>(&e)) return "InconsistentForce";
  if (dynamic_cast<const SingularLegendre*>(&e)) return "SingularLegendre";
  if (dynamic_cast<const NewtonDivergence*>(&e)) return "NewtonDivergence";
  if (dynamic_cast<const SingularJacobian*>(&e)) return "SingularJacobian";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  return "Error";
}

template <class Fn>
auto at_step(long step, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StepFailure&) {
    throw;
  } catch (const Error& e) {
    throw StepFailure(step, error_kind(e), e.what());
  }
}

double pairing(const NodeArray& p, const NodeArray& y, const Generator& xi) {
  double total = 0.0;
  for (int k = 0; k < p.rows(); ++k) total += p.row(k).dot(xi(k, y.row(k).transpose()).transpose());
  return total;
}

void record(Trajectory& traj, const ChainSystem& sys, const Generator& xi, ChainState s,
            NodeArray p, int iters, double inconsistency) {
  traj.times.push_back(s.t);
  traj.energy.push_back(energy(sys, s));
  traj.noether.push_back(pairing(p, s.y, xi));
  traj.momenta.push_back(std::move(p));
  traj.newton_iters.push_back(iters);
  traj.inconsistency.push_back(inconsistency);
  traj.states.push_back(std::move(s));
}

void run_variational(Trajectory& traj, const ChainSystem& sys, const ChainState& s0,
                     const StepperConfig& cfg, long steps, const Generator& xi) {
  const double dt = cfg.dt;
  const SeedResult seed = at_step(0, [&] { return initialize_discrete(sys, s0, cfg); });
  traj.seed_prev = seed.pair.y_prev;
  traj.seed_fallback = seed.fallback;
  const bool regular =
      at_step(0, [&] { return kernel_basis(mass_matrix(sys, s0)).empty(); });

  std::vector<NodeArray> ys{s0.y};
  std::vector<int> iters{seed.iterations};
  std::vector<double> incons{0.0};
  DiscretePair pair = seed.pair;
  // the singular case needs one position beyond the horizon for central differences
  const long wanted = regular ? steps : steps + 1;
  for (long n = 1; n <= wanted; ++n) {
    StepResult r;
    try {
      r = at_step(n, [&] { return discrete_el_step(sys, pair, cfg); });
    } catch (const StepFailure&) {
      if (n > steps) break;
      throw;
    }
    if (n <= steps) {
      iters.push_back(r.iterations);
      incons.push_back(r.inconsistency);
    }
    pair = DiscretePair{pair.t + dt, dt, pair.y_cur, r.y_next};
    ys.push_back(std::move(r.y_next));
  }

  NodeArray velocity = s0.ydot;
  for (long n = 0; n <= steps; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const double t = s0.t + static_cast<double>(n) * dt;
    const NodeArray& prev = n == 0 ? seed.pair.y_prev : ys[i - 1];
    NodeArray p = discrete_legendre(sys, DiscretePair{t, dt, prev, ys[i]}, Side::Plus);
    ChainState s;
    if (n == 0) {
      s = s0;
    } else if (regular) {
      s = at_step(n, [&] { return inverse_legendre(sys, PhaseState{t, ys[i], p}, velocity); });
    } else {
      const NodeArray v = i + 1 < ys.size() ? NodeArray((ys[i + 1] - ys[i - 1]) / (2.0 * dt))
                                            : NodeArray((ys[i] - ys[i - 1]) / dt);
      s = sys.make_state(t, ys[i], v);
    }
    velocity = s.ydot;
    record(traj, sys, xi, std::move(s), std::move(p), iters[i], incons[i]);
  }
}

}  // namespace

Trajectory run_simulation(const ChainSystem& sys, const ChainState& initial,
                          const StepperConfig& cfg, double T, const std::optional<Generator>& xi) {
  cfg.validate();
  if (!(T > 0.0)) throw Error("T must be positive");
  const long steps = step_count(T, cfg.dt);
  if (steps < 1) throw Error("T/dt must allow at least one step");
  const Generator gen = xi ? *xi : Generator::translation(Eigen::VectorXd::Ones(sys.dim()));

  ChainState s0 = sys.make_state(initial.t, initial.y, initial.ydot);
  const AccelerationSolve first = at_step(0, [&] { return solve_accelerations(sys, s0); });

  Trajectory traj;
  traj.scheme = cfg.scheme;
  traj.dt = cfg.dt;
  if (cfg.scheme == Scheme::VariationalMidpoint) {
    run_variational(traj, sys, s0, cfg, steps, gen);
    return traj;
  }

  record(traj, sys, gen, s0, momenta(sys, s0), 0, first.consistency);
  ChainState s = s0;
  for (long n = 1; n <= steps; ++n) {
    int iters = 0;
    double consistency = 0.0;
    at_step(n, [&] {
      if (cfg.scheme == Scheme::Rk4) {
        s = rk4_step(sys, s, cfg);
        consistency = solve_accelerations(sys, s).consistency;
      } else {
        ContinuousStep r = symplectic_euler_step(sys, s, cfg);
        s = std::move(r.state);
        iters = r.iterations;
      }
      return 0;
    });
    // keep the grid exact instead of accumulating t += dt
    s.t = s0.t + static_cast<double>(n) * cfg.dt;
    sys.sync_boundary(s);
    record(traj, sys, gen, s, momenta(sys, s), iters, consistency);
  }
  return traj;
}

DriftReport drift_report(const std::vector<double>& times, const std::vector<double>& series,
                         int blocks) {
  if (times.size() != series.size()) throw GridMismatch("drift series and times differ in length");
  DriftReport r;
  const std::size_t n = series.size();
  if (n == 0) return r;
  const double x0 = series.front();
  for (double x : series) r.max_abs_drift = std::max(r.max_abs_drift, std::abs(x - x0));
  r.max_rel_drift = x0 != 0.0 ? r.max_abs_drift / std::abs(x0) : r.max_abs_drift;
  if (n < 2) return r;

  double tm = 0.0, xm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tm += times[i];
    xm += series[i];
  }
  tm /= static_cast<double>(n);
  xm /= static_cast<double>(n);
  double stt = 0.0, stx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (times[i] - tm) * (times[i] - tm);
    stx += (times[i] - tm) * (series[i] - xm);
  }
  r.secular_slope = stt > 0.0 ? stx / stt : 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double res = series[i] - (xm + r.secular_slope * (times[i] - tm));
    lo = std::min(lo, res);
    hi = std::max(hi, res);
  }
  r.amplitude = 0.5 * (hi - lo);

  const auto nb = static_cast<std::size_t>(std::max(blocks, 2));
  if (r.secular_slope != 0.0 && n >= 2 * nb) {
    std::vector<double> means;
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t lo_i = b * n / nb, hi_i = (b + 1) * n / nb;
      double sum = 0.0;
      for (std::size_t i = lo_i; i < hi_i; ++i) sum += series[i];
      means.push_back(sum / static_cast<double>(hi_i - lo_i));
    }
    r.sign_stable = true;
    for (std::size_t b = 1; b < nb; ++b)
      if (!((means[b] - means[b - 1]) * r.secular_slope > 0.0)) r.sign_stable = false;
  }
  return r;
}

DriftReport energy_drift(const Trajectory& traj) { return drift_report(traj.times, traj.energy); }

DriftReport noether_drift(const Trajectory& traj) { return drift_report(traj.times, traj.noether); }

DriftReport noether_drift(const Trajectory& traj, const Generator& xi) {
  std::vector<double> series;
  for (std::size_t i = 0; i < traj.size(); ++i)
    series.push_back(pairing(traj.momenta[i], traj.states[i].y, xi));
  return drift_report(traj.times, series);
}

std::vector<double> symplectic_drift(const ChainSystem& sys, const Trajectory& traj,
                                     const StepperConfig& cfg, const Tangent& seed_a,
                                     const Tangent& seed_b) {
  if (traj.scheme != Scheme::VariationalMidpoint)
    throw Error("symplectic_drift needs a variational_midpoint trajectory");
  if (traj.size() == 0) return {};
  StepperConfig c = cfg;
  c.dt = traj.dt;
  DiscretePair pair{traj.times[0], traj.dt, traj.seed_prev, traj.states[0].y};
  Tangent a = seed_a, b = seed_b;
  std::vector<double> out;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    out.push_back(symplectic_two_form_probe(sys, pair, a, b));
    if (n + 1 == traj.size()) break;
    a = at_step(static_cast<long>(n + 1), [&] { return propagate_tangent(sys, pair, a, c); });
    b = at_step(static_cast<long>(n + 1), [&] { return propagate_tangent(sys, pair, b, c); });
    pair = DiscretePair{traj.times[n + 1], traj.dt, pair.y_cur, traj.states[n + 1].y};
  }
  return out;
}

namespace {

void check_exact_variables(const Expr& exact) {
  for (const auto& v : free_variables(exact))
    if (v != "t" && v != "x") throw UnknownVariable(v);
}

}  // namespace

ChainSystem exact_boundary_chain(const WaveSpec& spec, const Expr& exact, int cells) {
  check_exact_variables(exact);
  const Expr left = simplify(substitute(exact, "x", Expr::constant(0.0)));
  const Expr right = simplify(substitute(exact, "x", Expr::constant(cells * spec.h)));
  return ChainSystem(make_wave_pair_lagrangian(spec), cells,
                     BoundaryMode::fixed_ends({TimeCurve(left)}, {TimeCurve(right)}));
}

ChainState sample_exact_state(const ChainSystem& sys, const Expr& exact, double h, double t) {
  check_exact_variables(exact);
  const std::vector<std::string> slots{"t", "x"};
  const CompiledExpr u(exact, slots);
  const CompiledExpr ut(differentiate(exact, "t"), slots);
  NodeArray y(sys.nodes(), 1), v(sys.nodes(), 1);
  for (int k = 0; k < sys.nodes(); ++k) {
    const double tx[2] = {t, k * h};
    y(k, 0) = u(tx);
    v(k, 0) = ut(tx);
  }
  return sys.make_state(t, std::move(y), std::move(v));
}

std::vector<ConvergenceRow> convergence_study(const ConvergenceSetup& setup) {
  check_exact_variables(setup.exact);
  const std::vector<std::string> slots{"t", "x"};
  const CompiledExpr u(setup.exact, slots);
  std::vector<ConvergenceRow> rows;
  for (int cells : setup.levels) {
    WaveSpec spec = setup.spec;
    spec.h = setup.length / cells;
    const ChainSystem sys = exact_boundary_chain(spec, setup.exact, cells);
    const long steps = step_count(setup.T, setup.dt_factor * spec.h * spec.h);
    StepperConfig cfg;
    cfg.dt = setup.T / static_cast<double>(steps);
    cfg.scheme = setup.scheme;
    cfg.newton_tol = setup.newton_tol;
    const Trajectory traj =
        run_simulation(sys, sample_exact_state(sys, setup.exact, spec.h, 0.0), cfg, setup.T);
    const ChainState& last = traj.states.back();
    double err = 0.0;
    for (int k = 0; k < sys.nodes(); ++k) {
      const double tx[2] = {last.t, k * spec.h};
      err = std::max(err, std::abs(last.y(k, 0) - u(tx)));
    }
    ConvergenceRow row{cells, spec.h, cfg.dt, err, std::numeric_limits<double>::quiet_NaN()};
    if (!rows.empty()) row.observed_order = std::log2(rows.back().error / err);
    rows.push_back(row);
  }
  return rows;
}

double pde_consistency_check(const WaveSpec& spec, const Expr& exact, int cells, double t) {
  const ChainSystem sys = exact_boundary_chain(spec, exact, cells);
  const ChainState s = sample_exact_state(sys, exact, spec.h, t);
  const std::vector<std::string> slots{"t", "x"};
  const CompiledExpr utt(differentiate(differentiate(exact, "t"), "t"), slots);
  NodeArray a(sys.nodes(), 1);
  for (int k = 0; k < sys.nodes(); ++k) {
    const double tx[2] = {t, k * spec.h};
    a(k, 0) = utt(tx);
  }
  const Eigen::VectorXd r = el_residual(sys, s, a);
  return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

double pde_pointwise_residual(const WaveSpec& spec, const Expr& exact,
                              const std::vector<std::pair<double, double>>& tx_points) {
  check_exact_variables(exact);
  const Expr ux = differentiate(exact, "x");
  const Expr flux = substitute(differentiate(spec.sigma, "v"), "v", ux);
  const Expr force = substitute(differentiate(spec.f, "u"), "u", exact);
  const Expr r = simplify(differentiate(differentiate(exact, "t"), "t") - differentiate(flux, "x") +
                          force);
  const std::vector<std::string> slots{"t", "x"};
  const CompiledExpr fn(r, slots);
  double worst = 0.0;
  for (const auto& [t, x] : tx_points) {
    const double tx[2] = {t, x};
    worst = std::max(worst, std::abs(fn(tx)));
  }
  return worst;
}

}  // namespace semidisc

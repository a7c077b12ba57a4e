#include <doctest.h>

#include <cmath>
#include <random>

#include "semidisc/diagnostics.hpp"
#include "support.hpp"

using namespace semidisc;
using semidisc::test::wave_chain;

namespace {

ChainState bump(const ChainSystem& sys, double amp) {
  NodeArray y(sys.nodes(), 1);
  for (int k = 0; k < sys.nodes(); ++k) y(k, 0) = amp * std::sin(M_PI * k / sys.cells());
  return sys.make_state(0.0, y, sys.zeros());
}

}  // namespace

TEST_CASE("step count tolerates rounding") {
  CHECK(step_count(1.0, 0.01) == 100);
  CHECK(step_count(1.0, 0.3) == 4);
  CHECK(step_count(0.3, 0.1) == 3);
}

TEST_CASE("drift report of a linear ramp with oscillation") {
  std::vector<double> t, s;
  for (int i = 0; i <= 1000; ++i) {
    t.push_back(0.01 * i);
    s.push_back(1.0 + 0.002 * t.back() + 0.05 * std::sin(7.0 * t.back()));
  }
  const DriftReport r = drift_report(t, s);
  CHECK(r.secular_slope == doctest::Approx(0.002).epsilon(0.2));
  CHECK(r.amplitude == doctest::Approx(0.05).epsilon(0.05));
  CHECK(r.max_abs_drift > 0.0);
  CHECK(r.max_rel_drift == doctest::Approx(r.max_abs_drift / 1.0));

  std::vector<double> mono;
  for (double x : t) mono.push_back(-0.1 * x);
  const DriftReport m = drift_report(t, mono);
  CHECK(m.sign_stable);
  CHECK(m.secular_slope == doctest::Approx(-0.1));
  CHECK(m.amplitude <= 1e-12);
}

TEST_CASE("run_simulation records every step") {
  const ChainSystem sys = wave_chain("v^2/2", "u^4/4", 0.2, 5, true);
  StepperConfig cfg;
  cfg.dt = 0.05;
  for (Scheme s : {Scheme::VariationalMidpoint, Scheme::SymplecticEuler, Scheme::Rk4}) {
    cfg.scheme = s;
    const Trajectory tr = run_simulation(sys, bump(sys, 0.3), cfg, 1.0);
    CHECK(tr.size() == 21);
    CHECK(tr.states.size() == 21);
    CHECK(tr.energy.size() == 21);
    CHECK(tr.noether.size() == 21);
    CHECK(tr.times.back() == doctest::Approx(1.0));
    CHECK(tr.energy.front() == doctest::Approx(energy(sys, bump(sys, 0.3))));
    // symplectic Euler carries an O(dt) energy oscillation, the others O(dt^2) or better
    CHECK(energy_drift(tr).max_rel_drift < (s == Scheme::SymplecticEuler ? 0.2 : 1e-2));
  }
}

TEST_CASE("variational energy stays bounded, rk4 loses energy steadily") {
  const ChainSystem sys = wave_chain("v^2/2", "u^4/4", 0.1, 16, true);
  StepperConfig cfg;
  cfg.dt = 0.01;
  const Trajectory vm = run_simulation(sys, bump(sys, 0.2), cfg, 20.0);
  cfg.scheme = Scheme::Rk4;
  const Trajectory rk = run_simulation(sys, bump(sys, 0.2), cfg, 20.0);
  const DriftReport a = energy_drift(vm), b = energy_drift(rk);
  CHECK(std::abs(a.secular_slope) / a.amplitude < 1e-2);
  CHECK(b.secular_slope < 0.0);
  CHECK(b.sign_stable);
}

TEST_CASE("variational Noether momentum is exact for free ends") {
  const ChainSystem sys = wave_chain("v^2/2", "0", 0.2, 4, false);
  // uniform translation with uniform velocity stays on both constraint levels
  NodeArray y = NodeArray::Constant(5, 1, 0.1), v = NodeArray::Constant(5, 1, 0.3);
  StepperConfig cfg;
  cfg.dt = 0.05;
  const Trajectory tr = run_simulation(sys, sys.make_state(0.0, y, v), cfg, 2.0);
  CHECK(noether_drift(tr).max_abs_drift <= 1e-10);
  CHECK(tr.noether.front() == doctest::Approx(4 * 0.3).epsilon(1e-9));
  NodeArray w(5, 1);
  w << 1, 1, 1, 1, 1;
  CHECK(noether_drift(tr, Generator::per_node(w)).max_abs_drift <= 1e-10);
  CHECK(tr.states.back().y(0, 0) == doctest::Approx(0.1 + 0.3 * 2.0));
}

TEST_CASE("inadmissible initial data fails at step 0") {
  const ChainSystem sys = wave_chain("v^2/2", "0", 1.0, 2, false);
  NodeArray y(3, 1);
  y << 0.0, 1.0, 0.0;
  StepperConfig cfg;
  for (Scheme s : {Scheme::VariationalMidpoint, Scheme::SymplecticEuler, Scheme::Rk4}) {
    cfg.scheme = s;
    try {
      run_simulation(sys, sys.make_state(0.0, y, sys.zeros()), cfg, 1.0);
      FAIL("expected StepFailure");
    } catch (const StepFailure& e) {
      CHECK(e.step() == 0);
      CHECK(e.kind() == "InconsistentForce");
    }
  }
}

TEST_CASE("symplectic drift stays flat") {
  const ChainSystem sys = wave_chain("v^2/2", "u^4/4", 0.1, 8, true);
  StepperConfig cfg;
  cfg.dt = 0.01;
  const Trajectory tr = run_simulation(sys, bump(sys, 0.2), cfg, 1.0);
  Tangent a{sys.zeros(), sys.zeros()}, b{sys.zeros(), sys.zeros()};
  a.d_cur(3, 0) = 1.0;
  a.d_prev(5, 0) = 0.4;
  b.d_prev(3, 0) = 1.0;
  b.d_cur(4, 0) = 0.3;
  const auto w = symplectic_drift(sys, tr, cfg, a, b);
  CHECK(w.size() == tr.size());
  REQUIRE(w.front() != 0.0);
  for (double x : w) CHECK(std::abs(x / w.front() - 1.0) <= 1e-6);
}

TEST_CASE("PDE consistency is second order in h") {
  const Expr exact = parse_expression("sin(pi*x)*cos(pi*t)");
  const WaveSpec spec = make_wave_spec("v^2/2", "0", 1.0);
  std::vector<double> r;
  for (int cells : {8, 16, 32}) {
    WaveSpec s = spec;
    s.h = 1.0 / cells;
    r.push_back(pde_consistency_check(s, exact, cells, 0.3));
  }
  CHECK(std::log2(r[0] / r[1]) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::log2(r[1] / r[2]) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(pde_pointwise_residual(spec, exact, {{0.1, 0.2}, {0.7, 0.4}}) <= 1e-12);
  CHECK(pde_pointwise_residual(spec, parse_expression("sin(pi*x)*cos(2*t)"), {{0.2, 0.5}}) > 1.0);
}

TEST_CASE("convergence study reports observed orders") {
  ConvergenceSetup setup;
  setup.spec = make_wave_spec("v^2/2", "0", 1.0);
  setup.exact = parse_expression("sin(pi*x)*cos(pi*t)");
  setup.levels = {4, 8, 16};
  setup.T = 0.25;
  const auto rows = convergence_study(setup);
  REQUIRE(rows.size() == 3);
  CHECK(std::isnan(rows[0].observed_order));
  CHECK(rows[1].h == doctest::Approx(0.125));
  CHECK(rows[2].error < rows[1].error);
  CHECK(rows[2].observed_order == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("exact boundary chain follows the solution") {
  const Expr exact = parse_expression("x + t^2");
  const ChainSystem sys = exact_boundary_chain(make_wave_spec("v^2/2", "0", 0.25), exact, 4);
  const ChainState s = sample_exact_state(sys, exact, 0.25, 0.5);
  CHECK(s.y(4, 0) == doctest::Approx(1.25));
  CHECK(s.ydot(2, 0) == doctest::Approx(1.0));
}

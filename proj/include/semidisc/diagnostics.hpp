#pragma once

#include <optional>
#include <vector>

#include "semidisc/timeint.hpp"

namespace semidisc {

struct Trajectory {
  Scheme scheme = Scheme::VariationalMidpoint;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<ChainState> states;
  std::vector<double> energy;
  /// Continuous momenta for rk4 / symplectic Euler, FL+_d for the variational scheme.
  std::vector<NodeArray> momenta;
  std::vector<double> noether;
  std::vector<int> newton_iters;
  std::vector<double> inconsistency;
  /// Variational scheme only: position before the first state.
  NodeArray seed_prev;
  bool seed_fallback = false;

  std::size_t size() const { return times.size(); }
  ChainSamples samples() const { return {times, states}; }
};

/// ceil(T/dt) with a small tolerance so that e.g. 1/0.01 gives 100.
long step_count(double T, double dt);

/// Integrates ceil(T/dt) steps. Errors are rethrown as StepFailure carrying
/// the step index; step 0 covers the checks on the initial state. The Noether
/// record uses `xi` (translation by ones when absent).
///
/// Variational scheme: velocities are recovered from FL+_d through the
/// inverse Legendre map when the mass matrix is regular, and by central
/// differences of the positions otherwise.
Trajectory run_simulation(const ChainSystem& sys, const ChainState& initial,
                          const StepperConfig& cfg, double T,
                          const std::optional<Generator>& xi = std::nullopt);

struct DriftReport {
  double max_abs_drift = 0.0;
  double max_rel_drift = 0.0;
  double secular_slope = 0.0;  ///< least-squares slope of the series against time
  double amplitude = 0.0;      ///< half range of the series after removing the linear fit
  bool sign_stable = false;    ///< block means of the drift move monotonically with the slope
};

DriftReport drift_report(const std::vector<double>& times, const std::vector<double>& series,
                         int blocks = 10);
DriftReport energy_drift(const Trajectory& traj);
DriftReport noether_drift(const Trajectory& traj);
/// Noether series recomputed from the recorded momenta with another generator.
DriftReport noether_drift(const Trajectory& traj, const Generator& xi);

/// omega_d of two tangents propagated along a variational trajectory, one
/// value per recorded pair (y_{n-1}, y_n).
std::vector<double> symplectic_drift(const ChainSystem& sys, const Trajectory& traj,
                                     const StepperConfig& cfg, const Tangent& seed_a,
                                     const Tangent& seed_b);

/// Wave chain on [0, length] with boundaries and initial data read off an
/// exact solution u(t, x).
struct ConvergenceSetup {
  WaveSpec spec;  ///< h is ignored; each level uses length / N
  Expr exact;
  double length = 1.0;
  double T = 0.5;
  std::vector<int> levels{4, 8, 16, 32};
  double dt_factor = 0.25;  ///< dt = dt_factor * h^2 (rounded so that T is hit exactly)
  Scheme scheme = Scheme::VariationalMidpoint;
  double newton_tol = 1e-12;
};

struct ConvergenceRow {
  int cells = 0;
  double h = 0.0;
  double dt = 0.0;
  double error = 0.0;           ///< L-infinity over nodes at the final time
  double observed_order = 0.0;  ///< log2(previous error / error); NaN on the first row
};

std::vector<ConvergenceRow> convergence_study(const ConvergenceSetup& setup);

/// FixedEnds wave chain of `cells` cells on [0, cells*h] with boundaries from `exact`.
ChainSystem exact_boundary_chain(const WaveSpec& spec, const Expr& exact, int cells);

/// State sampled from u(t, x) at x_k = k h.
ChainState sample_exact_state(const ChainSystem& sys, const Expr& exact, double h, double t);

/// L-infinity norm of the semi-discrete EL residual with positions,
/// velocities and accelerations sampled from `exact` at time t.
double pde_consistency_check(const WaveSpec& spec, const Expr& exact, int cells, double t);

/// Pointwise residual of u_tt - d/dx sigma'(u_x) + f'(u) for an exact
/// solution, evaluated symbolically at the given points.
double pde_pointwise_residual(const WaveSpec& spec, const Expr& exact,
                              const std::vector<std::pair<double, double>>& tx_points);

}  // namespace semidisc

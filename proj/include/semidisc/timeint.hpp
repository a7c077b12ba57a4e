#pragma once

#include <string>
#include <string_view>

#include "semidisc/chain.hpp"

namespace semidisc {

enum class Scheme { VariationalMidpoint, SymplecticEuler, Rk4 };

std::string_view scheme_name(Scheme s);
/// Accepts "variational_midpoint", "symplectic_euler", "rk4".
Scheme parse_scheme(std::string_view name);

struct StepperConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::VariationalMidpoint;
  double newton_tol = 1e-12;
  int max_newton_iters = 50;

  void validate() const;
};

/// Least-squares Newton systems abort above this inconsistency norm.
inline constexpr double kNewtonInconsistencyLimit = 1e-8;
/// Step of the finite differences in symplectic_two_form_probe.
inline constexpr double kTwoFormProbeStep = 1e-6;
/// Relative step of propagate_tangent: eps = kTangentStep * (1 + |pair|).
inline constexpr double kTangentStep = 1e-6;

/// Two consecutive position arrays; t is the time of y_cur.
struct DiscretePair {
  double t = 0.0;
  double dt = 0.0;
  NodeArray y_prev, y_cur;
};

/// L_d(y0, y1) = dt * Ltilde((y0 + y1)/2, (y1 - y0)/dt).
double discrete_lagrangian(const ChainSystem& sys, const NodeArray& y0, const NodeArray& y1,
                           double dt);

/// D1 L_d and D2 L_d over all nodes (flattened).
struct DiscreteSlopes {
  Eigen::VectorXd d1, d2;
};
DiscreteSlopes discrete_slopes(const ChainSystem& sys, const NodeArray& y0, const NodeArray& y1,
                               double dt);

struct StepResult {
  NodeArray y_next;
  int iterations = 0;
  double inconsistency = 0.0;  ///< kernel part of the Newton system (0 when regular)
};

/// Solves D1 L_d(y_cur, y_next) + D2 L_d(y_prev, y_cur) = 0 on the dynamical
/// rows; boundary rows of y_next come from the curves at t + dt.
StepResult discrete_el_step(const ChainSystem& sys, const DiscretePair& pair,
                            const StepperConfig& cfg);

struct SeedResult {
  DiscretePair pair;
  int iterations = 0;
  bool fallback = false;  ///< Newton failed; y_prev = y0 - dt * ydot0
};

/// Chooses y_prev with D2 L_d(y_prev, y0) = p(state0) on the dynamical rows.
SeedResult initialize_discrete(const ChainSystem& sys, const ChainState& state0,
                               const StepperConfig& cfg);

/// Minus: -D1 L_d(y_prev, y_cur). Plus: D2 L_d(y_prev, y_cur). All nodes.
NodeArray discrete_legendre(const ChainSystem& sys, const DiscretePair& pair, Side side);

/// <D2 L_d(y_prev, y_cur), xi(y_cur)>.
double discrete_momentum_map(const ChainSystem& sys, const DiscretePair& pair,
                             const Generator& xi);

/// Direction in (y_prev, y_cur) space. Boundary rows are ignored.
struct Tangent {
  NodeArray d_prev, d_cur;
};

/// omega_d(a, b) = da_q . db_p - db_q . da_p with q = y_cur, p = FL+_d,
/// summed over the dynamical rows.
double symplectic_two_form_probe(const ChainSystem& sys, const DiscretePair& pair,
                                 const Tangent& da, const Tangent& db);

/// Finite-difference image of d under (y_prev, y_cur) -> (y_cur, y_next).
Tangent propagate_tangent(const ChainSystem& sys, const DiscretePair& pair, const Tangent& d,
                          const StepperConfig& cfg);

struct ContinuousStep {
  ChainState state;
  int iterations = 0;
};

/// p' = p + dt dL/dy(y, ydot(y, p')), y' = y + dt ydot(y, p'), ydot' from
/// the inverse Legendre map. The implicit momentum update is solved by
/// fixed-point iteration, which terminates after one pass for
/// velocity-independent forces.
ContinuousStep symplectic_euler_step(const ChainSystem& sys, const ChainState& s,
                                     const StepperConfig& cfg);

/// Classical RK4 on (y, ydot).
ChainState rk4_step(const ChainSystem& sys, const ChainState& s, const StepperConfig& cfg);

}  // namespace semidisc

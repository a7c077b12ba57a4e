#include "semidisc/timeint.hpp"

#include <cmath>
#include <limits>

namespace semidisc {

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::VariationalMidpoint: return "variational_midpoint";
    case Scheme::SymplecticEuler: return "symplectic_euler";
    case Scheme::Rk4: return "rk4";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "variational_midpoint") return Scheme::VariationalMidpoint;
  if (name == "symplectic_euler") return Scheme::SymplecticEuler;
  if (name == "rk4") return Scheme::Rk4;
  throw Error("unknown scheme '" + std::string(name) + "'");
}

void StepperConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("dt must be positive");
  if (!(newton_tol > 0.0)) throw Error("newton_tol must be positive");
  if (max_newton_iters < 1) throw Error("max_newton_iters must be >= 1");
}

namespace {

struct Midpoint {
  NodeArray q, v;
};

Midpoint midpoint(const NodeArray& y0, const NodeArray& y1, double dt) {
  return {0.5 * (y0 + y1), (y1 - y0) / dt};
}

// Solution of J x = r. Dense LU when well conditioned, otherwise the
// minimum-norm least-squares solution with the kernel part of r reported.
struct LinearSolve {
  Eigen::VectorXd x;
  double inconsistency = 0.0;
};

LinearSolve solve_newton_system(const Eigen::MatrixXd& j, const Eigen::VectorXd& r) {
  LinearSolve out;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(j);
  if (lu.rcond() > 1e-10) {
    out.x = lu.solve(r);
    return out;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cut = kRankTolerance * (sv.size() > 0 ? sv(0) : 0.0);
  const Eigen::VectorXd ur = svd.matrixU().transpose() * r;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(j.cols());
  double kernel_sq = 0.0;
  for (Eigen::Index i = 0; i < ur.size(); ++i) {
    if (i < sv.size() && sv(i) > cut) {
      y(i) = ur(i) / sv(i);
    } else {
      kernel_sq += ur(i) * ur(i);
    }
  }
  out.x = svd.matrixV() * y;
  out.inconsistency = std::sqrt(kernel_sq);
  return out;
}

// Newton on G(x) = 0 over the dynamical rows of `y`. `eval` returns the
// residual and its Jacobian with respect to those rows.
template <class Eval>
StepResult newton(const ChainSystem& sys, NodeArray y, const StepperConfig& cfg, double scale,
                  Eval eval) {
  const int off = sys.dyn_offset();
  const int ds = sys.dyn_size();
  StepResult out;
  for (int it = 0;; ++it) {
    Eigen::MatrixXd jac;
    const Eigen::VectorXd r = eval(y, jac);
    const double rn = r.norm();
    if (!std::isfinite(rn)) throw NewtonDivergence("non-finite Newton residual");
    if (rn <= cfg.newton_tol * scale) {
      out.y_next = std::move(y);
      out.iterations = it;
      return out;
    }
    if (it >= cfg.max_newton_iters)
      throw NewtonDivergence("Newton did not converge in " + std::to_string(cfg.max_newton_iters) +
                             " iterations (residual " + std::to_string(rn) + ")");
    const LinearSolve ls = solve_newton_system(jac, r);
    if (ls.inconsistency > kNewtonInconsistencyLimit)
      throw SingularJacobian("singular Newton system, inconsistency " +
                             std::to_string(ls.inconsistency));
    out.inconsistency = std::max(out.inconsistency, ls.inconsistency);
    flat(y).segment(off, ds) -= ls.x;
  }
}

Eigen::MatrixXd dyn_block(const ChainSystem& sys, const Eigen::MatrixXd& m) {
  return m.block(sys.dyn_offset(), sys.dyn_offset(), sys.dyn_size(), sys.dyn_size());
}

}  // namespace

double discrete_lagrangian(const ChainSystem& sys, const NodeArray& y0, const NodeArray& y1,
                           double dt) {
  const Midpoint mp = midpoint(y0, y1, dt);
  return dt * assemble_total_lagrangian(sys, ChainState{0.0, mp.q, mp.v});
}

DiscreteSlopes discrete_slopes(const ChainSystem& sys, const NodeArray& y0, const NodeArray& y1,
                               double dt) {
  const Midpoint mp = midpoint(y0, y1, dt);
  const ChainDerivatives d = chain_derivatives(sys, mp.q, mp.v, false);
  return {0.5 * dt * d.gy - d.gv, 0.5 * dt * d.gy + d.gv};
}

StepResult discrete_el_step(const ChainSystem& sys, const DiscretePair& pair,
                            const StepperConfig& cfg) {
  sys.check_shape(pair.y_prev, "y_prev");
  sys.check_shape(pair.y_cur, "y_cur");
  const double dt = cfg.dt;
  const int off = sys.dyn_offset();
  const int ds = sys.dyn_size();
  const Eigen::VectorXd d2prev =
      discrete_slopes(sys, pair.y_prev, pair.y_cur, dt).d2.segment(off, ds);

  NodeArray guess = 2.0 * pair.y_cur - pair.y_prev;
  sys.apply_boundary_positions(pair.t + dt, guess);
  const double scale = std::max(1.0, d2prev.norm());

  return newton(sys, std::move(guess), cfg, scale, [&](const NodeArray& y, Eigen::MatrixXd& jac) {
    const Midpoint mp = midpoint(pair.y_cur, y, dt);
    const ChainDerivatives d = chain_derivatives(sys, mp.q, mp.v, true);
    const Eigen::VectorXd d1 = 0.5 * dt * d.gy - d.gv;
    const Eigen::MatrixXd hvy = d.hyv.transpose();
    jac = dyn_block(sys, 0.25 * dt * d.hyy + 0.5 * d.hyv - 0.5 * hvy - d.hvv / dt);
    return Eigen::VectorXd(d1.segment(off, ds) + d2prev);
  });
}

SeedResult initialize_discrete(const ChainSystem& sys, const ChainState& state0,
                               const StepperConfig& cfg) {
  const double dt = cfg.dt;
  const int off = sys.dyn_offset();
  const int ds = sys.dyn_size();
  ChainState s0 = state0;
  sys.sync_boundary(s0);
  const Eigen::VectorXd p0 = flat(momenta(sys, s0)).segment(off, ds);

  NodeArray guess = s0.y - dt * s0.ydot;
  sys.apply_boundary_positions(s0.t - dt, guess);

  SeedResult out;
  out.pair.t = s0.t;
  out.pair.dt = dt;
  out.pair.y_cur = s0.y;
  try {
    const StepResult r = newton(sys, guess, cfg, std::max(1.0, p0.norm()),
                                [&](const NodeArray& y, Eigen::MatrixXd& jac) {
                                  const Midpoint mp = midpoint(y, s0.y, dt);
                                  const ChainDerivatives d = chain_derivatives(sys, mp.q, mp.v, true);
                                  const Eigen::VectorXd d2 = 0.5 * dt * d.gy + d.gv;
                                  const Eigen::MatrixXd hvy = d.hyv.transpose();
                                  jac = dyn_block(sys, 0.25 * dt * d.hyy - 0.5 * d.hyv + 0.5 * hvy -
                                                           d.hvv / dt);
                                  return Eigen::VectorXd(d2.segment(off, ds) - p0);
                                });
    out.pair.y_prev = r.y_next;
    out.iterations = r.iterations;
  } catch (const Error&) {
    out.pair.y_prev = guess;
    out.fallback = true;
  }
  return out;
}

NodeArray discrete_legendre(const ChainSystem& sys, const DiscretePair& pair, Side side) {
  const DiscreteSlopes sl = discrete_slopes(sys, pair.y_prev, pair.y_cur, pair.dt);
  NodeArray p(sys.nodes(), sys.dim());
  flat(p) = side == Side::Minus ? Eigen::VectorXd(-sl.d1) : sl.d2;
  return p;
}

double discrete_momentum_map(const ChainSystem& sys, const DiscretePair& pair,
                             const Generator& xi) {
  const NodeArray p = discrete_legendre(sys, pair, Side::Plus);
  double total = 0.0;
  for (int k = 0; k < sys.nodes(); ++k)
    total += p.row(k).dot(xi(k, pair.y_cur.row(k).transpose()).transpose());
  return total;
}

namespace {

DiscretePair shifted(const DiscretePair& pair, const Tangent& d, double eps) {
  DiscretePair out = pair;
  out.y_prev += eps * d.d_prev;
  out.y_cur += eps * d.d_cur;
  return out;
}

Tangent masked(const ChainSystem& sys, const Tangent& d) {
  Tangent out = d;
  if (sys.fixed_ends()) {
    for (NodeArray* a : {&out.d_prev, &out.d_cur}) {
      a->row(0).setZero();
      a->row(sys.cells()).setZero();
    }
  }
  return out;
}

}  // namespace

double symplectic_two_form_probe(const ChainSystem& sys, const DiscretePair& pair,
                                 const Tangent& da, const Tangent& db) {
  const int off = sys.dyn_offset();
  const int ds = sys.dyn_size();
  const double h = kTwoFormProbeStep;
  auto dp = [&](const Tangent& d) {
    const NodeArray plus = discrete_legendre(sys, shifted(pair, d, h), Side::Plus);
    const NodeArray minus = discrete_legendre(sys, shifted(pair, d, -h), Side::Plus);
    return Eigen::VectorXd((flat(plus) - flat(minus)).segment(off, ds) / (2.0 * h));
  };
  const Tangent a = masked(sys, da);
  const Tangent b = masked(sys, db);
  const Eigen::VectorXd qa = flat(a.d_cur).segment(off, ds);
  const Eigen::VectorXd qb = flat(b.d_cur).segment(off, ds);
  return qa.dot(dp(b)) - qb.dot(dp(a));
}

Tangent propagate_tangent(const ChainSystem& sys, const DiscretePair& pair, const Tangent& d,
                          const StepperConfig& cfg) {
  const Tangent dm = masked(sys, d);
  const double norm = std::sqrt(pair.y_prev.squaredNorm() + pair.y_cur.squaredNorm());
  const double eps = kTangentStep * (1.0 + norm);
  const NodeArray plus = discrete_el_step(sys, shifted(pair, dm, eps), cfg).y_next;
  const NodeArray minus = discrete_el_step(sys, shifted(pair, dm, -eps), cfg).y_next;
  return Tangent{dm.d_cur, (plus - minus) / (2.0 * eps)};
}

ContinuousStep symplectic_euler_step(const ChainSystem& sys, const ChainState& s,
                                     const StepperConfig& cfg) {
  const double dt = cfg.dt;
  const int off = sys.dyn_offset();
  const int ds = sys.dyn_size();
  ChainState cur = s;
  sys.sync_boundary(cur);
  const NodeArray p = momenta(sys, cur);

  // fixed point p' = p + dt * dL/dy(y, ydot(y, p')); the second pass only
  // confirms convergence when the forces do not depend on the velocities
  PhaseState next{cur.t, cur.y, p};
  ChainState mid = cur;
  ContinuousStep out;
  for (int it = 1;; ++it) {
    mid = inverse_legendre(sys, next, mid.ydot, cfg.newton_tol, cfg.max_newton_iters);
    const ChainDerivatives d = chain_derivatives(sys, mid.y, mid.ydot, false);
    NodeArray candidate = p;
    flat(candidate).segment(off, ds) += dt * d.gy.segment(off, ds);
    const double change = (flat(candidate) - flat(next.p)).segment(off, ds).norm();
    next.p = std::move(candidate);
    if (it > 1 && change <= cfg.newton_tol * std::max(1.0, flat(next.p).norm())) {
      out.iterations = it;
      break;
    }
    if (it >= cfg.max_newton_iters)
      throw NewtonDivergence("symplectic Euler momentum update did not converge");
  }
  mid = inverse_legendre(sys, next, mid.ydot, cfg.newton_tol, cfg.max_newton_iters);

  NodeArray y1 = cur.y;
  flat(y1).segment(off, ds) += dt * flat(mid.ydot).segment(off, ds);
  sys.apply_boundary_positions(cur.t + dt, y1);
  PhaseState after{cur.t + dt, y1, next.p};
  out.state = inverse_legendre(sys, after, mid.ydot, cfg.newton_tol, cfg.max_newton_iters);
  return out;
}

ChainState rk4_step(const ChainSystem& sys, const ChainState& s, const StepperConfig& cfg) {
  const double dt = cfg.dt;
  const int off = sys.dyn_offset();
  const int ds = sys.dyn_size();
  auto accel = [&](const ChainState& st) {
    return Eigen::VectorXd(flat(solve_accelerations(sys, st).yddot).segment(off, ds));
  };
  auto stage = [&](double t, const Eigen::VectorXd& dy, const Eigen::VectorXd& dv) {
    ChainState st = s;
    st.t = t;
    flat(st.y).segment(off, ds) += dy;
    flat(st.ydot).segment(off, ds) += dv;
    sys.sync_boundary(st);
    return st;
  };
  ChainState s0 = s;
  sys.sync_boundary(s0);
  const Eigen::VectorXd v0 = flat(s0.ydot).segment(off, ds);

  const Eigen::VectorXd k1y = v0, k1v = accel(s0);
  const ChainState s2 = stage(s.t + 0.5 * dt, 0.5 * dt * k1y, 0.5 * dt * k1v);
  const Eigen::VectorXd k2y = flat(s2.ydot).segment(off, ds), k2v = accel(s2);
  const ChainState s3 = stage(s.t + 0.5 * dt, 0.5 * dt * k2y, 0.5 * dt * k2v);
  const Eigen::VectorXd k3y = flat(s3.ydot).segment(off, ds), k3v = accel(s3);
  const ChainState s4 = stage(s.t + dt, dt * k3y, dt * k3v);
  const Eigen::VectorXd k4y = flat(s4.ydot).segment(off, ds), k4v = accel(s4);

  return stage(s.t + dt, dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
               dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v));
}

}  // namespace semidisc

#include "semidisc/chain.hpp"

#include <cmath>
#include <random>

namespace semidisc {

// ---------------------------------------------------------------------------
// Boundary curves

TimeCurve::TimeCurve(const Expr& position) : pos_(position) {
  for (const auto& v : free_variables(position))
    if (v != "t") throw UnknownVariable(v);
  const std::string t = "t";
  const std::vector<std::string> slots{t};
  const Expr vel = differentiate(position, t);
  const Expr acc = differentiate(vel, t);
  fns_ = std::make_shared<const std::array<CompiledExpr, 3>>(std::array<CompiledExpr, 3>{
      CompiledExpr(position, slots), CompiledExpr(vel, slots), CompiledExpr(acc, slots)});
}

TimeCurve TimeCurve::parse(std::string_view text) { return TimeCurve(parse_expression(text)); }

double TimeCurve::position(double t) const { return (*fns_)[0](std::span<const double>(&t, 1)); }
double TimeCurve::velocity(double t) const { return (*fns_)[1](std::span<const double>(&t, 1)); }
double TimeCurve::acceleration(double t) const {
  return (*fns_)[2](std::span<const double>(&t, 1));
}

BoundaryMode BoundaryMode::free_ends() { return BoundaryMode{}; }

BoundaryMode BoundaryMode::fixed_ends(std::vector<TimeCurve> left, std::vector<TimeCurve> right) {
  if (left.empty() || left.size() != right.size())
    throw Error("fixed ends need one left and one right curve per field component");
  BoundaryMode b;
  b.fixed_ = true;
  b.left_ = std::move(left);
  b.right_ = std::move(right);
  return b;
}

// ---------------------------------------------------------------------------
// ChainSystem

ChainSystem::ChainSystem(PairLagrangian pair, int cells, BoundaryMode mode)
    : pair_(std::make_shared<const PairLagrangian>(std::move(pair))),
      cells_(cells),
      mode_(std::move(mode)) {
  if (cells_ < 2) throw Error("a chain needs at least two cells (N >= 2)");
  if (mode_.is_fixed() && static_cast<int>(mode_.left().size()) != pair_->dim())
    throw Error("number of boundary curves must equal the field dimension");
}

void ChainSystem::check_shape(const NodeArray& a, const char* what) const {
  if (a.rows() != nodes() || a.cols() != dim())
    throw Error(std::string(what) + ": expected " + std::to_string(nodes()) + "x" +
                std::to_string(dim()) + " array, got " + std::to_string(a.rows()) + "x" +
                std::to_string(a.cols()));
}

void ChainSystem::apply_boundary_positions(double t, NodeArray& y) const {
  if (!fixed_ends()) return;
  for (int i = 0; i < dim(); ++i) {
    y(0, i) = mode_.left()[static_cast<std::size_t>(i)].position(t);
    y(cells_, i) = mode_.right()[static_cast<std::size_t>(i)].position(t);
  }
}

void ChainSystem::apply_boundary_velocities(double t, NodeArray& v) const {
  if (!fixed_ends()) return;
  for (int i = 0; i < dim(); ++i) {
    v(0, i) = mode_.left()[static_cast<std::size_t>(i)].velocity(t);
    v(cells_, i) = mode_.right()[static_cast<std::size_t>(i)].velocity(t);
  }
}

void ChainSystem::apply_boundary_accelerations(double t, NodeArray& a) const {
  if (!fixed_ends()) return;
  for (int i = 0; i < dim(); ++i) {
    a(0, i) = mode_.left()[static_cast<std::size_t>(i)].acceleration(t);
    a(cells_, i) = mode_.right()[static_cast<std::size_t>(i)].acceleration(t);
  }
}

void ChainSystem::sync_boundary(ChainState& s) const {
  apply_boundary_positions(s.t, s.y);
  apply_boundary_velocities(s.t, s.ydot);
}

ChainState ChainSystem::make_state(double t, NodeArray y, NodeArray ydot) const {
  check_shape(y, "positions");
  check_shape(ydot, "velocities");
  ChainState s{t, std::move(y), std::move(ydot)};
  sync_boundary(s);
  return s;
}

Generator Generator::translation(Eigen::VectorXd direction) {
  return Generator([d = std::move(direction)](int, const Eigen::VectorXd&) { return d; });
}

Generator Generator::per_node(NodeArray values) {
  return Generator([v = std::move(values)](int k, const Eigen::VectorXd&) {
    return Eigen::VectorXd(v.row(k).transpose());
  });
}

NodeArray Generator::at(const NodeArray& y) const {
  NodeArray out(y.rows(), y.cols());
  for (int k = 0; k < y.rows(); ++k) out.row(k) = (*this)(k, y.row(k).transpose()).transpose();
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

PairPoint cell_point(const NodeArray& y, const NodeArray& v, int k) {
  return pack_pair_point(y.row(k).transpose(), v.row(k).transpose(), y.row(k + 1).transpose(),
                         v.row(k + 1).transpose());
}

struct SymmetricSplit {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  double max_abs = 0.0;
};

SymmetricSplit eigen_split(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  SymmetricSplit s{es.eigenvalues(), es.eigenvectors(), 0.0};
  if (s.values.size() > 0) s.max_abs = s.values.cwiseAbs().maxCoeff();
  return s;
}

bool is_null(const SymmetricSplit& s, Eigen::Index i) {
  return std::abs(s.values(i)) <= kRankTolerance * s.max_abs || s.max_abs == 0.0;
}

}  // namespace

ChainDerivatives chain_derivatives(const ChainSystem& sys, const NodeArray& y,
                                   const NodeArray& ydot, bool with_hessian) {
  sys.check_shape(y, "positions");
  sys.check_shape(ydot, "velocities");
  const int m = sys.dim();
  const int n = sys.nodes() * m;
  ChainDerivatives d;
  d.gy = Eigen::VectorXd::Zero(n);
  d.gv = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd h;
  if (with_hessian) h = Eigen::MatrixXd::Zero(2 * n, 2 * n);

  std::vector<int> where(static_cast<std::size_t>(4 * m));
  for (int k = 0; k < sys.cells(); ++k) {
    const PairDerivatives pd = sys.pair().evaluate(cell_point(y, ydot, k), with_hessian);
    d.value += pd.value;
    for (int i = 0; i < m; ++i) {
      where[static_cast<std::size_t>(i)] = k * m + i;                  // y_k
      where[static_cast<std::size_t>(m + i)] = n + k * m + i;          // v_k
      where[static_cast<std::size_t>(2 * m + i)] = (k + 1) * m + i;    // y_{k+1}
      where[static_cast<std::size_t>(3 * m + i)] = n + (k + 1) * m + i;  // v_{k+1}
    }
    for (int a = 0; a < 4 * m; ++a) {
      const int ga = where[static_cast<std::size_t>(a)];
      if (ga < n) {
        d.gy(ga) += pd.gradient(a);
      } else {
        d.gv(ga - n) += pd.gradient(a);
      }
      if (!with_hessian) continue;
      for (int b = 0; b < 4 * m; ++b) h(ga, where[static_cast<std::size_t>(b)]) += pd.hessian(a, b);
    }
  }
  if (with_hessian) {
    d.hyy = h.topLeftCorner(n, n);
    d.hyv = h.topRightCorner(n, n);
    d.hvv = h.bottomRightCorner(n, n);
  }
  return d;
}

double assemble_total_lagrangian(const ChainSystem& sys, const ChainState& s) {
  double total = 0.0;
  for (int k = 0; k < sys.cells(); ++k) total += sys.pair().value(cell_point(s.y, s.ydot, k));
  return total;
}

NodeArray momenta(const ChainSystem& sys, const ChainState& s) {
  const ChainDerivatives d = chain_derivatives(sys, s.y, s.ydot, false);
  NodeArray p(sys.nodes(), sys.dim());
  flat(p) = d.gv;
  return p;
}

double energy(const ChainSystem& sys, const ChainState& s) {
  const ChainDerivatives d = chain_derivatives(sys, s.y, s.ydot, false);
  return d.gv.dot(flat(s.ydot)) - d.value;
}

Eigen::MatrixXd mass_matrix(const ChainSystem& sys, const ChainState& s) {
  const ChainDerivatives d = chain_derivatives(sys, s.y, s.ydot, true);
  return d.hvv.block(sys.dyn_offset(), sys.dyn_offset(), sys.dyn_size(), sys.dyn_size());
}

namespace {

// dL/dy - d/dt dL/dv restricted to the dynamical rows, with the dynamical
// accelerations taken from `yddot` (boundary rows from the curves).
Eigen::VectorXd residual_from(const ChainSystem& sys, const ChainState& s,
                              const ChainDerivatives& d, NodeArray yddot) {
  sys.apply_boundary_accelerations(s.t, yddot);
  const Eigen::VectorXd full = d.gy - d.hyv.transpose() * flat(s.ydot) - d.hvv * flat(yddot);
  return full.segment(sys.dyn_offset(), sys.dyn_size());
}

}  // namespace

Eigen::VectorXd force_vector(const ChainSystem& sys, const ChainState& s) {
  const ChainDerivatives d = chain_derivatives(sys, s.y, s.ydot, true);
  return residual_from(sys, s, d, sys.zeros());
}

Eigen::VectorXd el_residual(const ChainSystem& sys, const ChainState& s, const NodeArray& yddot) {
  sys.check_shape(yddot, "accelerations");
  const ChainDerivatives d = chain_derivatives(sys, s.y, s.ydot, true);
  return residual_from(sys, s, d, yddot);
}

AccelerationSolve solve_accelerations(const ChainSystem& sys, const ChainState& s,
                                      double consistency_tol) {
  const ChainDerivatives d = chain_derivatives(sys, s.y, s.ydot, true);
  const int off = sys.dyn_offset();
  const int ds = sys.dyn_size();
  const Eigen::MatrixXd M = d.hvv.block(off, off, ds, ds);
  const Eigen::VectorXd F = residual_from(sys, s, d, sys.zeros());

  const SymmetricSplit es = eigen_split(M);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(ds);
  double kernel_sq = 0.0;
  bool singular = false;
  for (Eigen::Index i = 0; i < es.values.size(); ++i) {
    const double c = es.vectors.col(i).dot(F);
    if (is_null(es, i)) {
      singular = true;
      kernel_sq += c * c;
    } else {
      a += (c / es.values(i)) * es.vectors.col(i);
    }
  }
  AccelerationSolve out;
  out.consistency = std::sqrt(kernel_sq);
  out.singular = singular;
  if (out.consistency > consistency_tol) throw InconsistentForce(out.consistency, "at t = " + std::to_string(s.t));
  out.yddot = sys.zeros();
  flat(out.yddot).segment(off, ds) = a;
  sys.apply_boundary_accelerations(s.t, out.yddot);
  return out;
}

double noether_momentum(const ChainSystem& sys, const ChainState& s, const Generator& xi) {
  const NodeArray p = momenta(sys, s);
  double total = 0.0;
  for (int k = 0; k < sys.nodes(); ++k)
    total += p.row(k).dot(xi(k, s.y.row(k).transpose()).transpose());
  return total;
}

PhaseState legendre_transform(const ChainSystem& sys, const ChainState& s) {
  return PhaseState{s.t, s.y, momenta(sys, s)};
}

ChainState inverse_legendre(const ChainSystem& sys, const PhaseState& ps,
                            const NodeArray& guess_ydot, double tol, int max_iters) {
  sys.check_shape(ps.y, "positions");
  sys.check_shape(ps.p, "momenta");
  ChainState s = sys.make_state(ps.t, ps.y, guess_ydot);
  const int off = sys.dyn_offset();
  const int ds = sys.dyn_size();
  const Eigen::VectorXd target = flat(ps.p).segment(off, ds);
  const double scale = std::max(1.0, target.norm());
  for (int it = 0; it <= max_iters; ++it) {
    const ChainDerivatives d = chain_derivatives(sys, s.y, s.ydot, true);
    const Eigen::VectorXd r = d.gv.segment(off, ds) - target;
    if (r.norm() <= tol * scale) return s;
    if (it == max_iters) break;
    const Eigen::MatrixXd M = d.hvv.block(off, off, ds, ds);
    const SymmetricSplit es = eigen_split(M);
    for (Eigen::Index i = 0; i < es.values.size(); ++i)
      if (is_null(es, i))
        throw SingularLegendre("Legendre map is singular: mass matrix has a kernel");
    const Eigen::VectorXd step =
        es.vectors * (es.vectors.transpose() * r).cwiseQuotient(es.values);
    flat(s.ydot).segment(off, ds) -= step;
  }
  throw NewtonDivergence("inverse Legendre transform did not converge");
}

double hamiltonian(const ChainSystem& sys, const PhaseState& ps, const NodeArray& guess_ydot) {
  return energy(sys, inverse_legendre(sys, ps, guess_ydot));
}

// ---------------------------------------------------------------------------
// Path-space pairings

double uniform_spacing(const std::vector<double>& times) {
  if (times.size() < 2) throw GridMismatch("need at least two time samples");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw GridMismatch("time samples must be increasing");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt)) + 1e-12 * std::abs(times[i]))
      throw GridMismatch("time samples are not uniformly spaced");
  }
  return dt;
}

std::vector<double> grid_derivative(const std::vector<double>& f, double dt) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  if (n == 2) {
    d[0] = d[1] = (f[1] - f[0]) / dt;
    return d;
  }
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
  return d;
}

double trapezoid(const std::vector<double>& f, double dt) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * dt;
}

double theta_pairing(const ChainSystem& sys, const PairSamples& pair, const CurveSamples& variation,
                     Side side) {
  const auto n = static_cast<Eigen::Index>(pair.times.size());
  const int m = sys.dim();
  for (const NodeArray* a : {&pair.y0, &pair.v0, &pair.y1, &pair.v1, &variation})
    if (a->rows() != n || a->cols() != m)
      throw GridMismatch("sample arrays do not match the time grid");
  const double dt = uniform_spacing(pair.times);

  // variation derivative, column by column
  NodeArray xdot(n, m);
  for (int i = 0; i < m; ++i) {
    std::vector<double> col(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) col[static_cast<std::size_t>(j)] = variation(j, i);
    const auto dcol = grid_derivative(col, dt);
    for (Eigen::Index j = 0; j < n; ++j) xdot(j, i) = dcol[static_cast<std::size_t>(j)];
  }

  std::vector<double> integrand(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const PairPoint x = pack_pair_point(pair.y0.row(j).transpose(), pair.v0.row(j).transpose(),
                                        pair.y1.row(j).transpose(), pair.v1.row(j).transpose());
    const PairDerivatives d = sys.pair().evaluate(x, false);
    const Eigen::VectorXd X = variation.row(j).transpose();
    const Eigen::VectorXd Xd = xdot.row(j).transpose();
    integrand[static_cast<std::size_t>(j)] =
        side == Side::Minus ? -(d.block(Slot::Y0).dot(X) + d.block(Slot::V0).dot(Xd))
                            : d.block(Slot::Y1).dot(X) + d.block(Slot::V1).dot(Xd);
  }
  return trapezoid(integrand, dt);
}

PairSamples cell_samples(const ChainSamples& sol, int k) {
  if (sol.states.size() != sol.times.size()) throw GridMismatch("times and states differ in length");
  if (sol.states.empty()) throw GridMismatch("empty solution");
  const auto n = static_cast<Eigen::Index>(sol.states.size());
  const auto m = sol.states.front().y.cols();
  if (k < 0 || k + 1 >= sol.states.front().y.rows()) throw Error("cell index out of range");
  PairSamples ps;
  ps.times = sol.times;
  ps.y0.resize(n, m);
  ps.v0.resize(n, m);
  ps.y1.resize(n, m);
  ps.v1.resize(n, m);
  for (Eigen::Index j = 0; j < n; ++j) {
    const ChainState& s = sol.states[static_cast<std::size_t>(j)];
    ps.y0.row(j) = s.y.row(k);
    ps.v0.row(j) = s.ydot.row(k);
    ps.y1.row(j) = s.y.row(k + 1);
    ps.v1.row(j) = s.ydot.row(k + 1);
  }
  return ps;
}

double spatial_conservation_check(const ChainSystem& sys, const ChainSamples& sol,
                                  const Generator& xi, int k) {
  const PairSamples cell = cell_samples(sol, k);
  const double dt = uniform_spacing(cell.times);
  const std::size_t n = cell.times.size();
  const int m = sys.dim();

  std::vector<double> d1xi(n);
  std::vector<std::vector<double>> d2(static_cast<std::size_t>(m), std::vector<double>(n));
  std::vector<Eigen::VectorXd> xis(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto r = static_cast<Eigen::Index>(j);
    const PairPoint x = pack_pair_point(cell.y0.row(r).transpose(), cell.v0.row(r).transpose(),
                                        cell.y1.row(r).transpose(), cell.v1.row(r).transpose());
    const PairDerivatives d = sys.pair().evaluate(x, false);
    xis[j] = xi(k, cell.y0.row(r).transpose());
    d1xi[j] = d.block(Slot::Y0).dot(xis[j]);
    const Eigen::VectorXd b = d.block(Slot::V0);
    for (int i = 0; i < m; ++i) d2[static_cast<std::size_t>(i)][j] = b(i);
  }
  std::vector<double> integrand = d1xi;
  double boundary = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto& series = d2[static_cast<std::size_t>(i)];
    const auto rate = grid_derivative(series, dt);
    for (std::size_t j = 0; j < n; ++j) integrand[j] -= rate[j] * xis[j](i);
    boundary += series.back() * xis.back()(i) - series.front() * xis.front()(i);
  }
  return trapezoid(integrand, dt) + boundary;
}

BoundaryResiduals boundary_residuals_mode_a(const ChainSystem& sys, const ChainSamples& sol) {
  if (sol.states.empty()) throw GridMismatch("empty solution");
  const int m = sys.dim();
  const int interior = (sys.nodes() - 2) * m;
  auto interior_momenta = [&](const ChainState& s) {
    const NodeArray p = momenta(sys, s);
    return Eigen::VectorXd(flat(p).segment(m, interior));
  };
  return {interior_momenta(sol.states.front()), interior_momenta(sol.states.back())};
}

ChainState project_initial_velocities(const ChainSystem& sys, const ChainState& s) {
  const int m = sys.dim();
  const int n = sys.nodes() * m;
  const int off = sys.dyn_offset();
  const int ds = sys.dyn_size();

  // momenta are affine in the velocities iff the velocity Hessian does not
  // depend on them; probe two pseudo-random velocity points
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NodeArray va = s.ydot, vb = s.ydot;
  for (int i = off; i < off + ds; ++i) {
    flat(va)(i) += u(rng);
    flat(vb)(i) += u(rng);
  }
  const ChainDerivatives da = chain_derivatives(sys, s.y, va, true);
  const ChainDerivatives db = chain_derivatives(sys, s.y, vb, true);
  const double scale = 1.0 + da.hvv.norm();
  if ((da.hvv - db.hvv).norm() > 1e-10 * scale)
    throw NotVelocityAffine("momenta are not affine in the velocities");

  const ChainDerivatives d = chain_derivatives(sys, s.y, s.ydot, true);
  const int interior = n - 2 * m;
  const Eigen::MatrixXd A = d.hvv.block(m, off, interior, ds);
  const Eigen::VectorXd p = d.gv.segment(m, interior);
  const Eigen::VectorXd delta = A.completeOrthogonalDecomposition().solve(-p);
  ChainState out = s;
  flat(out.ydot).segment(off, ds) += delta;
  return out;
}

}  // namespace semidisc

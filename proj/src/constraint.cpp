#include "semidisc/constraint.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace semidisc {

std::vector<Eigen::VectorXd> kernel_basis(const Eigen::MatrixXd& m, double tol_rank) {
  if (m.rows() != m.cols()) throw Error("kernel_basis: matrix must be square");
  std::vector<Eigen::VectorXd> out;
  if (m.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double top = lam.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (top > 0.0 && std::abs(lam(i)) > tol_rank * top) continue;
    Eigen::VectorXd v = es.eigenvectors().col(i);
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (std::abs(v(j)) > 1e-8) {
        if (v(j) < 0.0) v = -v;
        break;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& m, double tol_rank) {
  const auto basis = kernel_basis(m, tol_rank);
  Eigen::MatrixXd k(m.rows(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) k.col(static_cast<Eigen::Index>(i)) = basis[i];
  return k;
}

Eigen::VectorXd secondary_constraints(const ChainSystem& sys, const ChainState& s) {
  const Eigen::MatrixXd k = kernel_matrix(mass_matrix(sys, s));
  if (k.cols() == 0) return Eigen::VectorXd();
  return k.transpose() * force_vector(sys, s);
}

std::vector<std::vector<double>> ConstraintChain::values(const ChainState& s) const {
  std::vector<std::vector<double>> out;
  for (const auto& level : levels) {
    std::vector<double> row;
    for (const auto& fn : level.functions) row.push_back(fn(s));
    out.push_back(std::move(row));
  }
  return out;
}

double constraint_fd_step(const ChainState& s) {
  return 1e-5 * (1.0 + std::sqrt(s.y.squaredNorm() + s.ydot.squaredNorm()));
}

namespace {

using Vec = Eigen::VectorXd;

struct Context {
  ChainSystem sys;
  Eigen::MatrixXd kernel;  // dyn_size x r, frozen at the reference state
};
using ContextPtr = std::shared_ptr<const Context>;

// State coordinates are (y_dyn, ydot_dyn); boundary rows never move.
ChainState displaced(const Context& c, const ChainState& s, const Vec& dz, double eps) {
  const int off = c.sys.dyn_offset();
  const int ds = c.sys.dyn_size();
  ChainState out = s;
  flat(out.y).segment(off, ds) += eps * dz.head(ds);
  flat(out.ydot).segment(off, ds) += eps * dz.tail(ds);
  return out;
}

double directional(const Context& c, const ConstraintFunction& f, const ChainState& s,
                   const Vec& dz) {
  const double eps = constraint_fd_step(s);
  return (f(displaced(c, s, dz, eps)) - f(displaced(c, s, dz, -eps))) / (2.0 * eps);
}

Vec gradient(const Context& c, const ConstraintFunction& f, const ChainState& s) {
  const int n = 2 * c.sys.dyn_size();
  Vec g(n);
  for (int i = 0; i < n; ++i) g(i) = directional(c, f, s, Vec::Unit(n, i));
  return g;
}

Vec multiplier_direction(const Context& c, Eigen::Index r) {
  const int ds = c.sys.dyn_size();
  Vec dz = Vec::Zero(2 * ds);
  dz.tail(ds) = c.kernel.col(r);
  return dz;
}

Vec sensitivity(const Context& c, const ConstraintFunction& f, const ChainState& s) {
  Vec b(c.kernel.cols());
  for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = directional(c, f, s, multiplier_direction(c, r));
  return b;
}

// (ydot, yddot_ls + K c) on the dynamical block.
Vec flow(const Context& c, const std::vector<ConstraintFunction>& absorbed, const ChainState& s) {
  const int off = c.sys.dyn_offset();
  const int ds = c.sys.dyn_size();
  const AccelerationSolve acc =
      solve_accelerations(c.sys, s, std::numeric_limits<double>::infinity());
  Vec z(2 * ds);
  z.head(ds) = flat(s.ydot).segment(off, ds);
  z.tail(ds) = flat(acc.yddot).segment(off, ds);
  if (absorbed.empty()) return z;

  const auto na = static_cast<Eigen::Index>(absorbed.size());
  Eigen::MatrixXd b(na, c.kernel.cols());
  Vec g(na);
  for (Eigen::Index j = 0; j < na; ++j) {
    const auto& fn = absorbed[static_cast<std::size_t>(j)];
    g(j) = directional(c, fn, s, z);
    b.row(j) = sensitivity(c, fn, s).transpose();
  }
  const Vec mult = b.completeOrthogonalDecomposition().solve(-g);
  z.tail(ds) += c.kernel * mult;
  return z;
}

ConstraintFunction time_derivative(const ContextPtr& c, std::vector<ConstraintFunction> absorbed,
                                   ConstraintFunction f) {
  return [c, absorbed = std::move(absorbed), f = std::move(f)](const ChainState& s) {
    return directional(*c, f, s, flow(*c, absorbed, s));
  };
}

// Orthonormal rows used for incremental rank tests.
class Span {
 public:
  /// Component of v orthogonal to the span.
  Vec residual(const Vec& v) const {
    Vec r = v;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis_) r -= q.dot(r) * q;
    return r;
  }
  /// Adds v when its orthogonal part exceeds tol * scale; returns whether it did.
  bool add_if_independent(const Vec& v, double tol, double scale) {
    const Vec r = residual(v);
    const double n = r.norm();
    if (!(n > tol * scale) || n == 0.0) return false;
    basis_.push_back(r / n);
    return true;
  }

 private:
  std::vector<Vec> basis_;
};

}  // namespace

ConstraintChain constraint_chain(const ChainSystem& sys, const ChainState& s, int max_depth,
                                 double tol) {
  if (max_depth < 1) throw Error("constraint_chain: max_depth must be >= 1");
  ConstraintChain chain;
  auto ctx = std::make_shared<const Context>(Context{sys, kernel_matrix(mass_matrix(sys, s))});
  const Eigen::MatrixXd& k = ctx->kernel;
  if (k.cols() == 0) {
    chain.stabilized = true;
    return chain;
  }

  ConstraintLevel first;
  first.kernel = k;
  for (Eigen::Index a = 0; a < k.cols(); ++a) {
    first.functions.push_back([ctx, a](const ChainState& st) {
      return ctx->kernel.col(a).dot(force_vector(ctx->sys, st));
    });
  }

  Span gradients;
  double grad_scale = 0.0;
  std::vector<Vec> first_grads;
  for (const auto& fn : first.functions) {
    first_grads.push_back(gradient(*ctx, fn, s));
    grad_scale = std::max(grad_scale, first_grads.back().norm());
  }
  for (const auto& g : first_grads) gradients.add_if_independent(g, tol, std::max(grad_scale, 1e-300));
  chain.levels.push_back(first);
  chain.depth = 1;

  std::vector<ConstraintFunction> absorbed;
  Span absorbed_rows;
  std::vector<ConstraintFunction> pending = first.functions;

  for (;;) {
    std::vector<ConstraintFunction> free_rows;
    for (const auto& fn : pending) {
      const Vec b = sensitivity(*ctx, fn, s);
      const double scale = std::max(gradient(*ctx, fn, s).norm(), 1e-300);
      if (absorbed_rows.add_if_independent(b, tol, scale)) {
        absorbed.push_back(fn);
      } else {
        free_rows.push_back(fn);
      }
    }

    std::vector<ConstraintFunction> accepted;
    for (const auto& fn : free_rows) {
      ConstraintFunction d = time_derivative(ctx, absorbed, fn);
      const Vec g = gradient(*ctx, d, s);
      grad_scale = std::max(grad_scale, g.norm());
      if (gradients.add_if_independent(g, tol, std::max(grad_scale, 1e-300)))
        accepted.push_back(std::move(d));
    }

    if (accepted.empty()) {
      chain.stabilized = true;
      break;
    }
    if (chain.depth >= max_depth) {
      chain.stabilized = false;
      break;
    }
    chain.levels.push_back(ConstraintLevel{accepted, k});
    ++chain.depth;
    pending = std::move(accepted);
  }
  return chain;
}

bool is_admissible(const ChainSystem&, const ChainState& s, const ConstraintChain& chain,
                   double tol) {
  for (const auto& level : chain.levels)
    for (const auto& fn : level.functions)
      if (!(std::abs(fn(s)) <= tol)) return false;
  return true;
}

}  // namespace semidisc

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "semidisc/pairlag.hpp"

namespace semidisc {

/// Per-node field values, one row per node, one column per field component.
/// Row-major so that the flattened view is node-major: index = k*m + i.
using NodeArray = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::Map<const Eigen::VectorXd> flat(const NodeArray& a) {
  return {a.data(), a.size()};
}
inline Eigen::Map<Eigen::VectorXd> flat(NodeArray& a) { return {a.data(), a.size()}; }

/// Singular-value cutoff relative to the largest singular value.
inline constexpr double kRankTolerance = 1e-10;
/// Largest admissible kernel component of the force in solve_accelerations.
inline constexpr double kConsistencyTolerance = 1e-8;

/// Prescribed motion of one end node: one curve per field component, in "t",
/// with symbolic first and second derivatives.
class TimeCurve {
 public:
  explicit TimeCurve(const Expr& position);
  static TimeCurve parse(std::string_view text);

  double position(double t) const;
  double velocity(double t) const;
  double acceleration(double t) const;
  const Expr& expr() const { return pos_; }

 private:
  Expr pos_;
  std::shared_ptr<const std::array<CompiledExpr, 3>> fns_;
};

class BoundaryMode {
 public:
  /// All nodes dynamical.
  static BoundaryMode free_ends();
  /// Nodes 0 and N follow prescribed curves (one per field component).
  static BoundaryMode fixed_ends(std::vector<TimeCurve> left, std::vector<TimeCurve> right);

  bool is_fixed() const { return fixed_; }
  const std::vector<TimeCurve>& left() const { return left_; }
  const std::vector<TimeCurve>& right() const { return right_; }

 private:
  bool fixed_ = false;
  std::vector<TimeCurve> left_, right_;
};

struct ChainState {
  double t = 0.0;
  NodeArray y;
  NodeArray ydot;
};

/// Phase-space point (y, p).
struct PhaseState {
  double t = 0.0;
  NodeArray y;
  NodeArray p;
};

/// Value, gradient and Hessian of the chain Lagrangian over all (N+1)m
/// positions and velocities (flattened node-major).
struct ChainDerivatives {
  double value = 0.0;
  Eigen::VectorXd gy, gv;
  Eigen::MatrixXd hyy, hyv, hvv;  ///< hyv(i, j) = d2L / dy_i dv_j
};

/// N cells, N+1 nodes, one pair Lagrangian per cell.
class ChainSystem {
 public:
  ChainSystem(PairLagrangian pair, int cells, BoundaryMode mode);

  const PairLagrangian& pair() const { return *pair_; }
  int cells() const { return cells_; }
  int nodes() const { return cells_ + 1; }
  int dim() const { return pair_->dim(); }
  const BoundaryMode& mode() const { return mode_; }
  bool fixed_ends() const { return mode_.is_fixed(); }

  /// Dynamical nodes form the contiguous range [first_dynamic, last_dynamic].
  int first_dynamic() const { return fixed_ends() ? 1 : 0; }
  int last_dynamic() const { return fixed_ends() ? cells_ - 1 : cells_; }
  int dynamic_nodes() const { return last_dynamic() - first_dynamic() + 1; }
  /// Offset and size of the dynamical block in flattened arrays.
  int dyn_offset() const { return first_dynamic() * dim(); }
  int dyn_size() const { return dynamic_nodes() * dim(); }

  NodeArray zeros() const { return NodeArray::Zero(nodes(), dim()); }

  /// Boundary node values at time t (FixedEnds only); rows 0 and N.
  void apply_boundary_positions(double t, NodeArray& y) const;
  void apply_boundary_velocities(double t, NodeArray& v) const;
  void apply_boundary_accelerations(double t, NodeArray& a) const;
  /// Overwrite boundary rows of y and ydot from the curves at state.t.
  void sync_boundary(ChainState& s) const;

  /// State with the given positions/velocities, boundary rows synchronised.
  ChainState make_state(double t, NodeArray y, NodeArray ydot) const;

  void check_shape(const NodeArray& a, const char* what) const;

 private:
  std::shared_ptr<const PairLagrangian> pair_;
  int cells_;
  BoundaryMode mode_;
};

/// Symmetry generator xi_Q evaluated at a node position.
class Generator {
 public:
  using Fn = std::function<Eigen::VectorXd(int node, const Eigen::VectorXd& y)>;
  explicit Generator(Fn fn) : fn_(std::move(fn)) {}
  /// Constant vector field (spatial translation of the field values).
  static Generator translation(Eigen::VectorXd direction);
  /// Fixed per-node values, independent of position.
  static Generator per_node(NodeArray values);

  Eigen::VectorXd operator()(int node, const Eigen::VectorXd& y) const { return fn_(node, y); }
  NodeArray at(const NodeArray& y) const;

 private:
  Fn fn_;
};

ChainDerivatives chain_derivatives(const ChainSystem& sys, const NodeArray& y,
                                   const NodeArray& ydot, bool with_hessian = true);

/// Sum over cells of L(y_k, ydot_k, y_{k+1}, ydot_{k+1}).
double assemble_total_lagrangian(const ChainSystem& sys, const ChainState& s);

/// p_0 = D2 L(0,1), p_k = D4 L(k-1,k) + D2 L(k,k+1), p_N = D4 L(N-1,N).
NodeArray momenta(const ChainSystem& sys, const ChainState& s);

double energy(const ChainSystem& sys, const ChainState& s);

/// Velocity Hessian restricted to the dynamical nodes.
Eigen::MatrixXd mass_matrix(const ChainSystem& sys, const ChainState& s);

/// Right-hand side F with M * yddot_dyn = F on the dynamical nodes.
Eigen::VectorXd force_vector(const ChainSystem& sys, const ChainState& s);

/// F - M * yddot on the dynamical nodes, i.e. dL/dy - d/dt dL/dydot.
/// Boundary rows of yddot are ignored in FixedEnds mode (curves are used).
Eigen::VectorXd el_residual(const ChainSystem& sys, const ChainState& s, const NodeArray& yddot);

struct AccelerationSolve {
  NodeArray yddot;           ///< all nodes; boundary rows from the curves
  double consistency = 0.0;  ///< norm of the kernel component of F
  bool singular = false;
};

/// Minimum-norm least-squares accelerations. Throws InconsistentForce when the
/// kernel component of F exceeds `consistency_tol`.
AccelerationSolve solve_accelerations(const ChainSystem& sys, const ChainState& s,
                                      double consistency_tol = kConsistencyTolerance);

/// Sum_k p_k . xi(y_k).
double noether_momentum(const ChainSystem& sys, const ChainState& s, const Generator& xi);

PhaseState legendre_transform(const ChainSystem& sys, const ChainState& s);

/// Newton inversion of the fiber map ydot -> p on the dynamical nodes.
/// Throws SingularLegendre when the mass matrix is numerically singular.
ChainState inverse_legendre(const ChainSystem& sys, const PhaseState& ps,
                            const NodeArray& guess_ydot, double tol = 1e-12, int max_iters = 50);

/// H(y, p) = energy at the inverse-Legendre state.
double hamiltonian(const ChainSystem& sys, const PhaseState& ps, const NodeArray& guess_ydot);

/// Samples of the two curves of one cell on a uniform time grid.
struct PairSamples {
  std::vector<double> times;
  NodeArray y0, v0, y1, v1;  ///< one row per sample, m columns
};

/// Samples of a variation (one row per sample).
using CurveSamples = NodeArray;

enum class Side { Minus, Plus };

/// Poincare-Cartan pairing of one cell:
///   minus: -int (D1 L X + D2 L Xdot) dt,   plus: int (D3 L Y + D4 L Ydot) dt,
/// composite trapezoid, Xdot by second-order differences on the grid.
double theta_pairing(const ChainSystem& sys, const PairSamples& pair, const CurveSamples& variation,
                     Side side);

/// Time samples of a full chain solution.
struct ChainSamples {
  std::vector<double> times;
  std::vector<ChainState> states;
};

/// Cell samples (k, k+1) extracted from a chain solution.
PairSamples cell_samples(const ChainSamples& sol, int k);

/// int_0^T [D1 L(k,k+1) - d/dt D2 L(k,k+1)] xi(y_k) dt + D2 L(k,k+1) xi(y_k) |_0^T.
/// Along solutions of the semi-discrete equations with vanishing interior
/// momenta at t = 0, T this is independent of k.
double spatial_conservation_check(const ChainSystem& sys, const ChainSamples& sol,
                                  const Generator& xi, int k);

struct BoundaryResiduals {
  Eigen::VectorXd r0, rT;  ///< interior momenta at the first / last sample
};

BoundaryResiduals boundary_residuals_mode_a(const ChainSystem& sys, const ChainSamples& sol);

/// Smallest velocity change (Euclidean) making all interior momenta vanish.
/// Throws NotVelocityAffine if momenta are not affine in the velocities.
ChainState project_initial_velocities(const ChainSystem& sys, const ChainState& s);

/// Grid-aware numerical derivative (second-order, one-sided at the ends).
std::vector<double> grid_derivative(const std::vector<double>& values, double dt);

/// Composite trapezoid rule on a uniform grid.
double trapezoid(const std::vector<double>& values, double dt);

/// Uniform spacing of `times`; throws GridMismatch otherwise.
double uniform_spacing(const std::vector<double>& times);

}  // namespace semidisc

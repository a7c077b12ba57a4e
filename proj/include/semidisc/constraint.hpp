#pragma once

#include <functional>
#include <vector>

#include "semidisc/chain.hpp"

namespace semidisc {

/// Orthonormal basis of the numerical null space of a symmetric matrix
/// (eigenvalues with |lambda| <= tol_rank * max |lambda|). Each vector is
/// sign-normalised: its first entry with |x| > 1e-8 is positive.
std::vector<Eigen::VectorXd> kernel_basis(const Eigen::MatrixXd& m,
                                          double tol_rank = kRankTolerance);

/// Kernel basis as matrix columns.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& m, double tol_rank = kRankTolerance);

/// phi_a = v_a . F for the kernel basis of the mass matrix at `s`.
Eigen::VectorXd secondary_constraints(const ChainSystem& sys, const ChainState& s);

using ConstraintFunction = std::function<double(const ChainState&)>;

struct ConstraintLevel {
  std::vector<ConstraintFunction> functions;
  Eigen::MatrixXd kernel;  ///< columns: kernel basis the level was generated with
};

struct ConstraintChain {
  std::vector<ConstraintLevel> levels;
  bool stabilized = false;
  int depth = 0;

  /// values[i][j] = levels[i].functions[j](s)
  std::vector<std::vector<double>> values(const ChainState& s) const;
};

/// Step used for every finite-difference probe of constraint functions.
double constraint_fd_step(const ChainState& s);

/// Pointwise constraint algorithm at `s`.
///
/// Level 1 holds phi_a. Each further level holds time derivatives of the
/// previous level's functions along ydot, yddot = yddot_ls + K c, where yddot_ls
/// is the minimum-norm acceleration, K the kernel basis frozen at `s` and c the
/// multiplier fixed by every derivative that depends on it ("absorbed" rows).
/// Derivatives that do not involve c and whose state gradient is independent
/// of all earlier gradients (relative rank tolerance `tol`) form the next
/// level. Probe states never throw InconsistentForce; they use the
/// least-squares acceleration.
ConstraintChain constraint_chain(const ChainSystem& sys, const ChainState& s, int max_depth,
                                 double tol = 1e-6);

bool is_admissible(const ChainSystem& sys, const ChainState& s, const ConstraintChain& chain,
                   double tol);

}  // namespace semidisc

#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "semidisc/expr.hpp"

namespace semidisc {

/// Derivative slots of a pair Lagrangian L(y0, v0, y1, v1): 1 = y0, 2 = v0,
/// 3 = y1, 4 = v1. Slots 1,2 belong to the left node, 3,4 to the right node.
enum class Slot : int { Y0 = 1, V0 = 2, Y1 = 3, V1 = 4 };

/// Packed evaluation point [y0 | v0 | y1 | v1], each block of length m.
using PairPoint = Eigen::VectorXd;

PairPoint pack_pair_point(const Eigen::Ref<const Eigen::VectorXd>& y0,
                          const Eigen::Ref<const Eigen::VectorXd>& v0,
                          const Eigen::Ref<const Eigen::VectorXd>& y1,
                          const Eigen::Ref<const Eigen::VectorXd>& v1);

/// Value, full gradient (4m) and full Hessian (4m x 4m) at one point.
struct PairDerivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;

  Eigen::VectorXd block(Slot s) const;
  Eigen::MatrixXd block(Slot a, Slot b) const;
};

struct WaveSpec {
  Expr sigma;  ///< function of "v"
  Expr f;      ///< function of "u"
  double h = 1.0;
};

/// Two-node Lagrangian with exact first and second derivatives.
///
/// Every partial derivative is differentiated symbolically once at
/// construction and compiled; evaluation never differences numerically.
class PairLagrangian {
 public:
  /// Source expression over y0_i, v0_i, y1_i, v1_i (i = 1..m).
  /// Throws UnknownVariable for any other name.
  PairLagrangian(const Expr& lagrangian, int m);

  int dim() const { return m_; }
  const Expr& source() const { return source_; }
  /// Variable names in packed order.
  const std::vector<std::string>& variables() const { return names_; }
  /// Human-readable note of how the Lagrangian was built.
  const std::string& provenance() const { return provenance_; }

  double value(const PairPoint& x) const;
  Eigen::VectorXd gradient(Slot s, const PairPoint& x) const;
  Eigen::MatrixXd hessian(Slot a, Slot b, const PairPoint& x) const;

  /// Bulk evaluation. Second derivatives are only filled when requested.
  PairDerivatives evaluate(const PairPoint& x, bool with_hessian = true) const;

  /// Symbolic partial derivative d L / d (packed variable i).
  const Expr& partial(int i) const { return first_exprs_[static_cast<std::size_t>(i)]; }

 private:
  friend PairLagrangian make_wave_pair_lagrangian(const WaveSpec& spec);

  struct Term {
    CompiledExpr fn;
    bool constant = false;
    double value = 0.0;
    double operator()(const PairPoint& x) const;
  };
  static Term make_term(const Expr& e, const std::vector<std::string>& names);

  int m_;
  Expr source_;
  std::string provenance_;
  std::vector<std::string> names_;
  std::vector<Expr> first_exprs_;
  Term value_fn_;
  std::vector<Term> first_;
  // full (4m)x(4m), row-major; d/dx_j applied to dL/dx_i
  std::vector<Term> second_;
};

/// L = 1/2 ((v0+v1)/2)^2 - sigma((y1-y0)/h) - f((y0+y1)/2), m = 1.
PairLagrangian make_wave_pair_lagrangian(const WaveSpec& spec);

/// Convenience: parse sigma(v) and f(u) text.
WaveSpec make_wave_spec(std::string_view sigma, std::string_view f, double h);

PairLagrangian make_generic_pair_lagrangian(const Expr& lagrangian, int m);

/// Variable name for slot s, component i (1-based), e.g. "v0_2".
std::string pair_variable_name(Slot s, int component);

}  // namespace semidisc

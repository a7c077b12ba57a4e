#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semidisc/error.hpp"

namespace semidisc {

enum class ExprKind { Constant, Pi, Variable, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt };

/// Immutable scalar expression tree. Copies share structure; safe to read
/// from several threads at once.
class Expr {
 public:
  /// The zero constant.
  Expr();

  static Expr constant(double value);
  static Expr pi();
  static Expr variable(std::string name);
  static Expr neg(Expr arg);
  static Expr binary(ExprKind kind, Expr lhs, Expr rhs);
  static Expr pow(Expr base, double exponent);
  static Expr function(ExprKind kind, Expr arg);

  ExprKind kind() const;
  /// Constant value, or the exponent of a Pow node.
  double number() const;
  const std::string& name() const;
  /// Single operand of Neg/functions, base of Pow, left operand of binaries.
  const Expr& lhs() const;
  const Expr& rhs() const;

  bool is_constant() const { return kind() == ExprKind::Constant; }
  bool is_constant(double v) const { return is_constant() && number() == v; }

  /// Structural equality (same tree shape, same constants bit-for-bit).
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  static const std::shared_ptr<const Node>& zero_node();
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

using Env = std::map<std::string, double, std::less<>>;

/// Grammar, loosest binding first:  + -,  * /,  unary -,  ^ (right-assoc),
/// then numbers, identifiers, pi, sin/cos/exp/sqrt(...) and parentheses.
/// Exponents must fold to a constant.
Expr parse_expression(std::string_view text);

/// Text that parses back to a structurally identical tree.
std::string render(const Expr& e);

double evaluate(const Expr& e, const Env& env);

Expr differentiate(const Expr& e, std::string_view var);

/// Local rewrites only: constant folding, additive/multiplicative identities,
/// x^1, x^0, double negation.
Expr simplify(const Expr& e);

std::set<std::string> free_variables(const Expr& e);

/// Replace every occurrence of variable `name` by `with`.
Expr substitute(const Expr& e, std::string_view name, const Expr& with);

/// An Expr lowered to a postfix program with variables bound to slots of a
/// value array. Used on hot paths where Env lookups are too slow.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  /// Throws UnknownVariable if `e` uses a name not in `slots`.
  CompiledExpr(const Expr& e, std::span<const std::string> slots);

  double operator()(std::span<const double> values) const;

  /// True when the program is a single constant.
  bool is_constant() const { return code_.size() == 1 && code_[0].kind == ExprKind::Constant; }

 private:
  struct Instr {
    ExprKind kind;
    double number;
    int slot;
  };
  std::vector<Instr> code_;
  int max_depth_ = 0;
};

}  // namespace semidisc

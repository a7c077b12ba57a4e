#include "semidisc/pairlag.hpp"

#include <algorithm>

namespace semidisc {

namespace {

const char* slot_prefix(Slot s) {
  switch (s) {
    case Slot::Y0: return "y0_";
    case Slot::V0: return "v0_";
    case Slot::Y1: return "y1_";
    case Slot::V1: return "v1_";
  }
  return "";
}

int slot_offset(Slot s, int m) { return (static_cast<int>(s) - 1) * m; }

}  // namespace

std::string pair_variable_name(Slot s, int component) {
  return slot_prefix(s) + std::to_string(component);
}

PairPoint pack_pair_point(const Eigen::Ref<const Eigen::VectorXd>& y0,
                          const Eigen::Ref<const Eigen::VectorXd>& v0,
                          const Eigen::Ref<const Eigen::VectorXd>& y1,
                          const Eigen::Ref<const Eigen::VectorXd>& v1) {
  const auto m = y0.size();
  PairPoint x(4 * m);
  x << y0, v0, y1, v1;
  return x;
}

Eigen::VectorXd PairDerivatives::block(Slot s) const {
  const int m = static_cast<int>(gradient.size()) / 4;
  return gradient.segment(slot_offset(s, m), m);
}

Eigen::MatrixXd PairDerivatives::block(Slot a, Slot b) const {
  const int m = static_cast<int>(gradient.size()) / 4;
  return hessian.block(slot_offset(a, m), slot_offset(b, m), m, m);
}

double PairLagrangian::Term::operator()(const PairPoint& x) const {
  if (constant) return value;
  return fn(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

PairLagrangian::Term PairLagrangian::make_term(const Expr& e,
                                               const std::vector<std::string>& names) {
  Term t;
  t.fn = CompiledExpr(e, names);
  if (t.fn.is_constant()) {
    t.constant = true;
    t.value = t.fn({});
  }
  return t;
}

PairLagrangian::PairLagrangian(const Expr& lagrangian, int m) : m_(m), source_(lagrangian) {
  if (m < 1) throw Error("pair Lagrangian field dimension must be positive");
  for (Slot s : {Slot::Y0, Slot::V0, Slot::Y1, Slot::V1})
    for (int i = 1; i <= m; ++i) names_.push_back(pair_variable_name(s, i));

  for (const auto& v : free_variables(lagrangian))
    if (std::find(names_.begin(), names_.end(), v) == names_.end()) throw UnknownVariable(v);

  const std::size_t n = names_.size();
  value_fn_ = make_term(lagrangian, names_);
  first_exprs_.reserve(n);
  for (const auto& name : names_) first_exprs_.push_back(differentiate(lagrangian, name));
  for (const auto& d : first_exprs_) first_.push_back(make_term(d, names_));
  second_.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      second_.push_back(make_term(differentiate(first_exprs_[i], names_[j]), names_));
  provenance_ = "L = " + render(lagrangian);
}

double PairLagrangian::value(const PairPoint& x) const { return value_fn_(x); }

Eigen::VectorXd PairLagrangian::gradient(Slot s, const PairPoint& x) const {
  Eigen::VectorXd g(m_);
  const int off = slot_offset(s, m_);
  for (int i = 0; i < m_; ++i) g(i) = first_[static_cast<std::size_t>(off + i)](x);
  return g;
}

Eigen::MatrixXd PairLagrangian::hessian(Slot a, Slot b, const PairPoint& x) const {
  Eigen::MatrixXd h(m_, m_);
  const int n = 4 * m_;
  const int ra = slot_offset(a, m_);
  const int cb = slot_offset(b, m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      h(i, j) = second_[static_cast<std::size_t>((ra + i) * n + cb + j)](x);
  return h;
}

PairDerivatives PairLagrangian::evaluate(const PairPoint& x, bool with_hessian) const {
  const int n = 4 * m_;
  PairDerivatives d;
  d.value = value_fn_(x);
  d.gradient.resize(n);
  for (int i = 0; i < n; ++i) d.gradient(i) = first_[static_cast<std::size_t>(i)](x);
  if (with_hessian) {
    d.hessian.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d.hessian(i, j) = second_[static_cast<std::size_t>(i * n + j)](x);
  }
  return d;
}

WaveSpec make_wave_spec(std::string_view sigma, std::string_view f, double h) {
  return WaveSpec{parse_expression(sigma), parse_expression(f), h};
}

PairLagrangian make_wave_pair_lagrangian(const WaveSpec& spec) {
  if (!(spec.h > 0.0)) throw Error("wave spacing h must be positive");
  for (const auto& v : free_variables(spec.sigma))
    if (v != "v") throw UnknownVariable(v);
  for (const auto& v : free_variables(spec.f))
    if (v != "u") throw UnknownVariable(v);

  const Expr y0 = Expr::variable("y0_1");
  const Expr v0 = Expr::variable("v0_1");
  const Expr y1 = Expr::variable("y1_1");
  const Expr v1 = Expr::variable("v1_1");
  const Expr half = Expr::constant(0.5);
  const Expr two = Expr::constant(2.0);

  const Expr kinetic = half * Expr::pow((v0 + v1) / two, 2.0);
  const Expr strain = substitute(spec.sigma, "v", (y1 - y0) / Expr::constant(spec.h));
  const Expr potential = substitute(spec.f, "u", (y0 + y1) / two);

  PairLagrangian pl(kinetic - strain - potential, 1);
  pl.provenance_ = "wave: sigma(v) = " + render(spec.sigma) + ", f(u) = " + render(spec.f) +
                   ", h = " + std::to_string(spec.h);
  return pl;
}

PairLagrangian make_generic_pair_lagrangian(const Expr& lagrangian, int m) {
  return PairLagrangian(lagrangian, m);
}

}  // namespace semidisc

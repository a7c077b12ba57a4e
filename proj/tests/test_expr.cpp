#include <doctest.h>

#include <cmath>
#include <random>

#include "semidisc/expr.hpp"

using namespace semidisc;

namespace {

// Random trees over x, y whose values stay finite on [-1, 1]^2: no division
// by anything that can vanish, sqrt only of positive arguments.
Expr random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 10);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  switch (pick(rng)) {
    case 0: return Expr::constant(std::round(c(rng) * 100.0) / 100.0);
    case 1: return Expr::variable("x");
    case 2: return Expr::variable("y");
    case 3: return random_tree(rng, depth - 1) + random_tree(rng, depth - 1);
    case 4: return random_tree(rng, depth - 1) - random_tree(rng, depth - 1);
    case 5: return random_tree(rng, depth - 1) * random_tree(rng, depth - 1);
    case 6: {
      const Expr d = random_tree(rng, depth - 1);
      return random_tree(rng, depth - 1) / (Expr::constant(3.0) + d * d);
    }
    case 7: return Expr::pow(random_tree(rng, depth - 1), std::uniform_int_distribution<int>(0, 3)(rng));
    case 8: return Expr::function(ExprKind::Sin, random_tree(rng, depth - 1));
    case 9: return Expr::function(ExprKind::Cos, random_tree(rng, depth - 1));
    default: {
      const Expr d = random_tree(rng, depth - 1);
      return -Expr::function(ExprKind::Sqrt, Expr::constant(1.0) + d * d);
    }
  }
}

double fd(const Expr& e, Env env, const std::string& var) {
  const double h = 1e-6 * (1.0 + std::abs(env[var]));
  Env p = env, m = env;
  p[var] += h;
  m[var] -= h;
  return (evaluate(e, p) - evaluate(e, m)) / (2.0 * h);
}

}  // namespace

TEST_CASE("precedence and associativity") {
  const Env env{{"x", 2.0}, {"y", 3.0}};
  CHECK(evaluate(parse_expression("1 + 2*3"), env) == 7.0);
  CHECK(evaluate(parse_expression("2^3^2"), env) == 512.0);
  CHECK(evaluate(parse_expression("-x^2"), env) == -4.0);
  CHECK(evaluate(parse_expression("8/2/2"), env) == 2.0);
  CHECK(evaluate(parse_expression("x - y - 1"), env) == -2.0);
  CHECK(evaluate(parse_expression("2*pi"), env) == doctest::Approx(2.0 * M_PI));
  CHECK(evaluate(parse_expression("1.5e2 + .5"), env) == 150.5);
  CHECK(evaluate(parse_expression("sqrt(x^2 + 5)"), env) == 3.0);
  CHECK(evaluate(parse_expression("exp(0) + cos(0) - sin(0)"), env) == 2.0);
}

TEST_CASE("exponents must be constant") {
  CHECK(evaluate(parse_expression("x^(1/2)"), {{"x", 4.0}}) == 2.0);
  CHECK_THROWS_AS(parse_expression("x^y"), SyntaxError);
  CHECK_THROWS_AS(parse_expression("2^x"), SyntaxError);
}

TEST_CASE("syntax errors carry the offending offset") {
  auto offset_of = [](const char* text) {
    try {
      parse_expression(text);
    } catch (const SyntaxError& e) {
      return static_cast<long>(e.offset());
    }
    return -1L;
  };
  CHECK(offset_of("1 + ") == 4);
  CHECK(offset_of("(x + 1") == 6);
  CHECK(offset_of("x $ 2") == 2);
  CHECK(offset_of("x y") == 2);
  CHECK(offset_of("tan(x)") == 0);
  CHECK(offset_of("sin + 1") == 4);
  CHECK(offset_of("") == 0);
  CHECK(offset_of("v^^2") == 2);
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(evaluate(parse_expression("x + 1"), {}), UnboundVariable);
  CHECK_THROWS_AS(evaluate(parse_expression("1/x"), {{"x", 0.0}}), DomainError);
  CHECK_THROWS_AS(evaluate(parse_expression("sqrt(x)"), {{"x", -1.0}}), DomainError);
  CHECK_THROWS_AS(evaluate(parse_expression("x^0.5"), {{"x", -1.0}}), DomainError);
  CHECK_THROWS_AS(evaluate(parse_expression("exp(x)"), {{"x", 1000.0}}), DomainError);
  CHECK(evaluate(parse_expression("x^3"), {{"x", -2.0}}) == -8.0);
}

TEST_CASE("known derivatives") {
  const Env env{{"x", 0.7}, {"y", -0.4}};
  auto d = [&](const char* text, const char* var) { return evaluate(differentiate(parse_expression(text), var), env); };
  CHECK(d("x^3", "x") == doctest::Approx(3.0 * 0.49));
  CHECK(d("sin(x)*y", "x") == doctest::Approx(std::cos(0.7) * -0.4));
  CHECK(d("sin(x)*y", "y") == doctest::Approx(std::sin(0.7)));
  CHECK(d("exp(2*x)", "x") == doctest::Approx(2.0 * std::exp(1.4)));
  CHECK(d("sqrt(x)", "x") == doctest::Approx(0.5 / std::sqrt(0.7)));
  CHECK(d("x/y", "y") == doctest::Approx(-0.7 / 0.16));
  CHECK(d("cos(x*y)", "x") == doctest::Approx(0.4 * std::sin(-0.28)));
  CHECK(differentiate(parse_expression("y^2"), "x").is_constant(0.0));
}

TEST_CASE("simplify performs local identities") {
  CHECK(simplify(parse_expression("x*1 + 0")) == Expr::variable("x"));
  CHECK(simplify(parse_expression("x^1")) == Expr::variable("x"));
  CHECK(simplify(parse_expression("x^0")).is_constant(1.0));
  CHECK(simplify(parse_expression("0*sin(x)")).is_constant(0.0));
  CHECK(simplify(parse_expression("--x")) == Expr::variable("x"));
  CHECK(simplify(parse_expression("2*3 + 1")).is_constant(7.0));
}

TEST_CASE("free variables and substitution") {
  const Expr e = parse_expression("a*sin(b) + pi*c");
  CHECK(free_variables(e) == std::set<std::string>{"a", "b", "c"});
  const Expr s = substitute(e, "b", parse_expression("a + 1"));
  CHECK(free_variables(s) == std::set<std::string>{"a", "c"});
  CHECK(evaluate(s, {{"a", 2.0}, {"c", 0.0}}) == doctest::Approx(2.0 * std::sin(3.0)));
}

TEST_CASE("compiled programs bind variables by slot") {
  const std::vector<std::string> slots{"y", "x"};
  const CompiledExpr f(parse_expression("x^2 - 3*y"), slots);
  const double values[] = {1.0, 4.0};
  CHECK(f(values) == 13.0);
  CHECK_THROWS_AS(CompiledExpr(parse_expression("z"), slots), UnknownVariable);
  CHECK(CompiledExpr(parse_expression("6"), slots).is_constant());
  CHECK_FALSE(CompiledExpr(parse_expression("x"), slots).is_constant());
}

TEST_CASE("property: render parses back to the same tree and value") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Expr e = random_tree(rng, 4);
    const std::string text = render(e);
    const Expr back = parse_expression(text);
    CAPTURE(text);
    CHECK(back == e);
    const Env env{{"x", u(rng)}, {"y", u(rng)}};
    CHECK(evaluate(back, env) == evaluate(e, env));
  }
}

TEST_CASE("property: symbolic derivatives agree with central differences") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Expr e = random_tree(rng, 4);
    const Env env{{"x", u(rng)}, {"y", u(rng)}};
    for (const char* var : {"x", "y"}) {
      const double exact = evaluate(differentiate(e, var), env);
      const double approx = fd(e, env, var);
      CAPTURE(render(e));
      CHECK(std::abs(exact - approx) <= 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("property: simplify and compilation preserve values") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::vector<std::string> slots{"x", "y"};
  for (int trial = 0; trial < 300; ++trial) {
    const Expr e = random_tree(rng, 4);
    const double x = u(rng), y = u(rng);
    const double want = evaluate(e, {{"x", x}, {"y", y}});
    const double values[] = {x, y};
    CHECK(evaluate(simplify(e), {{"x", x}, {"y", y}}) == doctest::Approx(want).epsilon(1e-12));
    CHECK(CompiledExpr(e, slots)(values) == doctest::Approx(want).epsilon(1e-12));
  }
}

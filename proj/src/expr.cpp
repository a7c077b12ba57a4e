#include "semidisc/expr.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

namespace semidisc {

struct Expr::Node {
  ExprKind kind;
  double number = 0.0;
  std::string name;
  Expr lhs{std::shared_ptr<const Node>()};
  Expr rhs{std::shared_ptr<const Node>()};
};

namespace {


bool is_binary(ExprKind k) {
  return k == ExprKind::Add || k == ExprKind::Sub || k == ExprKind::Mul || k == ExprKind::Div;
}

bool is_function(ExprKind k) {
  return k == ExprKind::Sin || k == ExprKind::Cos || k == ExprKind::Exp || k == ExprKind::Sqrt;
}

const char* function_name(ExprKind k) {
  switch (k) {
    case ExprKind::Sin: return "sin";
    case ExprKind::Cos: return "cos";
    case ExprKind::Exp: return "exp";
    case ExprKind::Sqrt: return "sqrt";
    default: return "?";
  }
}

std::optional<ExprKind> function_kind(std::string_view name) {
  if (name == "sin") return ExprKind::Sin;
  if (name == "cos") return ExprKind::Cos;
  if (name == "exp") return ExprKind::Exp;
  if (name == "sqrt") return ExprKind::Sqrt;
  return std::nullopt;
}

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s[0]);
  if (!(std::isalpha(head) || s[0] == '_')) return false;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '_')) return false;
  }
  return true;
}

}  // namespace

const std::shared_ptr<const Expr::Node>& Expr::zero_node() {
  static const auto node = [] {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Constant;
    return std::shared_ptr<const Node>(std::move(n));
  }();
  return node;
}

Expr::Expr() : node_(zero_node()) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Constant;
  n->number = value;
  return Expr(std::move(n));
}

Expr Expr::pi() {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Pi;
  n->number = std::numbers::pi;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  if (!valid_identifier(name)) throw Error("invalid variable name '" + name + "'");
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Variable;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::neg(Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Neg;
  n->lhs = std::move(arg);
  return Expr(std::move(n));
}

Expr Expr::binary(ExprKind kind, Expr lhs, Expr rhs) {
  if (!is_binary(kind)) throw Error("not a binary operator");
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return Expr(std::move(n));
}

Expr Expr::pow(Expr base, double exponent) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Pow;
  n->number = exponent;
  n->lhs = std::move(base);
  return Expr(std::move(n));
}

Expr Expr::function(ExprKind kind, Expr arg) {
  if (!is_function(kind)) throw Error("not a function");
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->lhs = std::move(arg);
  return Expr(std::move(n));
}

ExprKind Expr::kind() const { return node_->kind; }
double Expr::number() const { return node_->number; }
const std::string& Expr::name() const { return node_->name; }
const Expr& Expr::lhs() const { return node_->lhs; }
const Expr& Expr::rhs() const { return node_->rhs; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::Constant:
      return std::bit_cast<std::uint64_t>(a.number()) == std::bit_cast<std::uint64_t>(b.number());
    case ExprKind::Pi: return true;
    case ExprKind::Variable: return a.name() == b.name();
    case ExprKind::Pow:
      return a.number() == b.number() && a.lhs() == b.lhs();
    case ExprKind::Neg:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Sqrt: return a.lhs() == b.lhs();
    default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::neg(a); }

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok type;
  std::size_t offset;
  std::string_view text;
  double value = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (true) {
      while (i < src_.size() && std::isspace(static_cast<unsigned char>(src_[i]))) ++i;
      if (i >= src_.size()) {
        out.push_back({Tok::End, i, {}});
        return out;
      }
      char c = src_[i];
      auto uc = static_cast<unsigned char>(c);
      if (std::isdigit(uc) || (c == '.' && i + 1 < src_.size() &&
                               std::isdigit(static_cast<unsigned char>(src_[i + 1])))) {
        out.push_back(number(i));
        continue;
      }
      if (std::isalpha(uc) || c == '_') {
        std::size_t j = i;
        while (j < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_'))
          ++j;
        out.push_back({Tok::Ident, i, src_.substr(i, j - i)});
        i = j;
        continue;
      }
      Tok t;
      switch (c) {
        case '+': t = Tok::Plus; break;
        case '-': t = Tok::Minus; break;
        case '*': t = Tok::Star; break;
        case '/': t = Tok::Slash; break;
        case '^': t = Tok::Caret; break;
        case '(': t = Tok::LParen; break;
        case ')': t = Tok::RParen; break;
        default:
          throw SyntaxError(i, "number, identifier, operator or parenthesis",
                            std::string("unexpected character '") + c + "'");
      }
      out.push_back({t, i, src_.substr(i, 1)});
      ++i;
    }
  }

 private:
  Token number(std::size_t& i) {
    std::size_t j = i;
    auto digits = [&] {
      while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
    };
    digits();
    if (j < src_.size() && src_[j] == '.') {
      ++j;
      digits();
    }
    if (j < src_.size() && (src_[j] == 'e' || src_[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        j = k;
        digits();
      }
    }
    Token tok{Tok::Number, i, src_.substr(i, j - i)};
    auto [ptr, ec] = std::from_chars(src_.data() + i, src_.data() + j, tok.value);
    if (ec != std::errc() || ptr != src_.data() + j)
      throw SyntaxError(i, "number", "malformed numeric literal");
    i = j;
    return tok;
  }

  std::string_view src_;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

  Expr parse() {
    if (peek().type == Tok::End) throw SyntaxError(0, "expression", "empty input");
    Expr e = expression();
    if (peek().type != Tok::End)
      throw SyntaxError(peek().offset, "operator or end of input",
                        "unexpected '" + std::string(peek().text) + "'");
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& take() { return toks_[pos_++]; }

  Expr expression() {
    Expr e = term();
    while (peek().type == Tok::Plus || peek().type == Tok::Minus) {
      auto kind = take().type == Tok::Plus ? ExprKind::Add : ExprKind::Sub;
      e = Expr::binary(kind, e, term());
    }
    return e;
  }

  Expr term() {
    Expr e = unary();
    while (peek().type == Tok::Star || peek().type == Tok::Slash) {
      auto kind = take().type == Tok::Star ? ExprKind::Mul : ExprKind::Div;
      e = Expr::binary(kind, e, unary());
    }
    return e;
  }

  Expr unary() {
    if (peek().type == Tok::Minus) {
      take();
      // A minus written directly on a literal is a negative constant, unless
      // the literal is a power base: -2^2 is -(2^2).
      if (peek().type == Tok::Number && peek(1).type != Tok::Caret)
        return Expr::constant(-take().value);
      return Expr::neg(unary());
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (peek().type != Tok::Caret) return base;
    take();
    std::size_t at = peek().offset;
    Expr exponent = unary();
    if (!free_variables(exponent).empty())
      throw SyntaxError(at, "constant exponent", "exponent depends on a variable");
    try {
      return Expr::pow(base, evaluate(exponent, {}));
    } catch (const DomainError& err) {
      throw SyntaxError(at, "finite constant exponent", err.what());
    }
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.type) {
      case Tok::Number: take(); return Expr::constant(t.value);
      case Tok::LParen: {
        take();
        Expr e = expression();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: {
        take();
        if (auto fk = function_kind(t.text)) {
          if (peek().type != Tok::LParen)
            throw SyntaxError(peek().offset, "'('", "function name used without argument");
          take();
          Expr arg = expression();
          expect(Tok::RParen, "')'");
          return Expr::function(*fk, arg);
        }
        if (peek().type == Tok::LParen)
          throw SyntaxError(t.offset, "sin, cos, exp or sqrt",
                            "unknown function '" + std::string(t.text) + "'");
        if (t.text == "pi") return Expr::pi();
        return Expr::variable(std::string(t.text));
      }
      case Tok::End:
        throw SyntaxError(t.offset, "number, identifier, '(' or '-'", "unexpected end of input");
      default:
        throw SyntaxError(t.offset, "number, identifier, '(' or '-'",
                          "unexpected '" + std::string(t.text) + "'");
    }
  }

  void expect(Tok type, const char* what) {
    if (peek().type != type)
      throw SyntaxError(peek().offset, what,
                        peek().type == Tok::End ? std::string("unexpected end of input")
                                                : "unexpected '" + std::string(peek().text) + "'");
    take();
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text) { return Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Rendering

namespace {

int precedence(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

void render_into(const Expr& e, std::string& out);

void render_child(const Expr& child, bool parens, std::string& out) {
  if (parens) out += '(';
  render_into(child, out);
  if (parens) out += ')';
}

void render_into(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case ExprKind::Constant: {
      double v = e.number();
      if (std::signbit(v)) {
        out += "(-" + format_number(-v) + ")";
      } else {
        out += format_number(v);
      }
      return;
    }
    case ExprKind::Pi: out += "pi"; return;
    case ExprKind::Variable: out += e.name(); return;
    case ExprKind::Neg: {
      out += '-';
      const Expr& a = e.lhs();
      // -(3) keeps the Neg node; a bare -3 would read back as a constant.
      render_child(a, precedence(a) < 3 || a.kind() == ExprKind::Constant ||
                          (a.kind() == ExprKind::Pow && a.lhs().kind() == ExprKind::Constant),
                   out);
      return;
    }
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div: {
      int p = precedence(e);
      const char* op = e.kind() == ExprKind::Add   ? " + "
                       : e.kind() == ExprKind::Sub ? " - "
                       : e.kind() == ExprKind::Mul ? "*"
                                                   : "/";
      const Expr& r = e.rhs();
      render_child(e.lhs(), precedence(e.lhs()) < p, out);
      out += op;
      render_child(r, precedence(r) <= p || r.kind() == ExprKind::Neg, out);
      return;
    }
    case ExprKind::Pow: {
      render_child(e.lhs(), precedence(e.lhs()) <= 4, out);
      out += '^';
      double x = e.number();
      if (std::signbit(x)) {
        out += "(-" + format_number(-x) + ")";
      } else {
        out += format_number(x);
      }
      return;
    }
    default:
      out += function_name(e.kind());
      out += '(';
      render_into(e.lhs(), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string render(const Expr& e) {
  std::string out;
  render_into(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double apply_pow(double base, double exponent) {
  if (base < 0.0 && exponent != std::floor(exponent))
    throw DomainError("negative base raised to a non-integer power");
  if (base == 0.0 && exponent < 0.0) throw DomainError("zero raised to a negative power");
  return std::pow(base, exponent);
}

double apply_div(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}

double apply_function(ExprKind k, double a) {
  switch (k) {
    case ExprKind::Sin: return std::sin(a);
    case ExprKind::Cos: return std::cos(a);
    case ExprKind::Exp: {
      double r = std::exp(a);
      if (!std::isfinite(r)) throw DomainError("exp overflow");
      return r;
    }
    case ExprKind::Sqrt:
      if (a < 0.0) throw DomainError("sqrt of a negative number");
      return std::sqrt(a);
    default: throw Error("not a function");
  }
}

}  // namespace

double evaluate(const Expr& e, const Env& env) {
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Pi: return e.number();
    case ExprKind::Variable: {
      auto it = env.find(e.name());
      if (it == env.end()) throw UnboundVariable(e.name());
      return it->second;
    }
    case ExprKind::Neg: return -evaluate(e.lhs(), env);
    case ExprKind::Add: return evaluate(e.lhs(), env) + evaluate(e.rhs(), env);
    case ExprKind::Sub: return evaluate(e.lhs(), env) - evaluate(e.rhs(), env);
    case ExprKind::Mul: return evaluate(e.lhs(), env) * evaluate(e.rhs(), env);
    case ExprKind::Div: return apply_div(evaluate(e.lhs(), env), evaluate(e.rhs(), env));
    case ExprKind::Pow: return apply_pow(evaluate(e.lhs(), env), e.number());
    default: return apply_function(e.kind(), evaluate(e.lhs(), env));
  }
}

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  auto walk = [&](auto& self, const Expr& x) -> void {
    switch (x.kind()) {
      case ExprKind::Constant:
      case ExprKind::Pi: return;
      case ExprKind::Variable: out.insert(x.name()); return;
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Mul:
      case ExprKind::Div:
        self(self, x.lhs());
        self(self, x.rhs());
        return;
      default: self(self, x.lhs()); return;
    }
  };
  walk(walk, e);
  return out;
}

Expr substitute(const Expr& e, std::string_view name, const Expr& with) {
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Pi: return e;
    case ExprKind::Variable: return e.name() == name ? with : e;
    case ExprKind::Neg: return Expr::neg(substitute(e.lhs(), name, with));
    case ExprKind::Pow: return Expr::pow(substitute(e.lhs(), name, with), e.number());
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
      return Expr::binary(e.kind(), substitute(e.lhs(), name, with), substitute(e.rhs(), name, with));
    default: return Expr::function(e.kind(), substitute(e.lhs(), name, with));
  }
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

std::optional<double> try_fold(const Expr& e) {
  try {
    double v = evaluate(e, {});
    if (std::isfinite(v)) return v + 0.0;
  } catch (const Error&) {
  }
  return std::nullopt;
}

Expr rewrite(const Expr& e) {
  const ExprKind k = e.kind();
  switch (k) {
    case ExprKind::Constant:
    case ExprKind::Pi:
    case ExprKind::Variable: return e;
    case ExprKind::Neg: {
      Expr a = rewrite(e.lhs());
      if (a.is_constant()) return Expr::constant(-a.number() + 0.0);
      if (a.kind() == ExprKind::Neg) return a.lhs();
      return Expr::neg(a);
    }
    case ExprKind::Pow: {
      Expr b = rewrite(e.lhs());
      double x = e.number();
      if (x == 1.0) return b;
      if (x == 0.0) return Expr::constant(1.0);
      Expr p = Expr::pow(b, x);
      if (b.is_constant())
        if (auto v = try_fold(p)) return Expr::constant(*v);
      return p;
    }
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
    case ExprKind::Sqrt: {
      Expr a = rewrite(e.lhs());
      Expr f = Expr::function(k, a);
      if (a.is_constant())
        if (auto v = try_fold(f)) return Expr::constant(*v);
      return f;
    }
    default: break;
  }

  Expr a = rewrite(e.lhs());
  Expr b = rewrite(e.rhs());
  if (a.is_constant() && b.is_constant()) {
    if (auto v = try_fold(Expr::binary(k, a, b))) return Expr::constant(*v);
  }
  switch (k) {
    case ExprKind::Add:
      if (a.is_constant(0.0)) return b;
      if (b.is_constant(0.0)) return a;
      break;
    case ExprKind::Sub:
      if (b.is_constant(0.0)) return a;
      if (a.is_constant(0.0)) return rewrite(Expr::neg(b));
      break;
    case ExprKind::Mul:
      if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
      if (a.is_constant(1.0)) return b;
      if (b.is_constant(1.0)) return a;
      // constants to the left, and adjacent constants merged
      if (b.is_constant() && !a.is_constant()) std::swap(a, b);
      if (a.is_constant() && b.kind() == ExprKind::Mul && b.lhs().is_constant())
        return rewrite(Expr::constant(a.number() * b.lhs().number()) * b.rhs());
      break;
    case ExprKind::Div:
      if (a.is_constant(0.0)) return Expr::constant(0.0);
      if (b.is_constant(1.0)) return a;
      if (b.is_constant() && a.kind() == ExprKind::Mul && a.lhs() == b) return a.rhs();
      break;
    default: break;
  }
  return Expr::binary(k, a, b);
}

}  // namespace

Expr simplify(const Expr& e) { return rewrite(e); }

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr derive(const Expr& e, std::string_view var) {
  const Expr zero = Expr::constant(0.0);
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Pi: return zero;
    case ExprKind::Variable: return Expr::constant(e.name() == var ? 1.0 : 0.0);
    case ExprKind::Neg: return Expr::neg(derive(e.lhs(), var));
    case ExprKind::Add: return derive(e.lhs(), var) + derive(e.rhs(), var);
    case ExprKind::Sub: return derive(e.lhs(), var) - derive(e.rhs(), var);
    case ExprKind::Mul: {
      const Expr& a = e.lhs();
      const Expr& b = e.rhs();
      return derive(a, var) * b + a * derive(b, var);
    }
    case ExprKind::Div: {
      const Expr& a = e.lhs();
      const Expr& b = e.rhs();
      if (b.is_constant() || b.kind() == ExprKind::Pi) return derive(a, var) / b;
      return (derive(a, var) * b - a * derive(b, var)) / Expr::pow(b, 2.0);
    }
    case ExprKind::Pow: {
      double x = e.number();
      return Expr::constant(x) * Expr::pow(e.lhs(), x - 1.0) * derive(e.lhs(), var);
    }
    case ExprKind::Sin:
      return Expr::function(ExprKind::Cos, e.lhs()) * derive(e.lhs(), var);
    case ExprKind::Cos:
      return Expr::neg(Expr::function(ExprKind::Sin, e.lhs())) * derive(e.lhs(), var);
    case ExprKind::Exp: return e * derive(e.lhs(), var);
    case ExprKind::Sqrt: return derive(e.lhs(), var) / (Expr::constant(2.0) * e);
  }
  return zero;
}

}  // namespace

Expr differentiate(const Expr& e, std::string_view var) { return simplify(derive(e, var)); }

// ---------------------------------------------------------------------------
// Compiled evaluation

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> slots) {
  int depth = 0;
  auto emit = [&](auto& self, const Expr& x) -> void {
    switch (x.kind()) {
      case ExprKind::Constant:
      case ExprKind::Pi:
        code_.push_back({ExprKind::Constant, x.number(), -1});
        ++depth;
        break;
      case ExprKind::Variable: {
        int slot = -1;
        for (std::size_t i = 0; i < slots.size(); ++i)
          if (slots[i] == x.name()) slot = static_cast<int>(i);
        if (slot < 0) throw UnknownVariable(x.name());
        code_.push_back({ExprKind::Variable, 0.0, slot});
        ++depth;
        break;
      }
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Mul:
      case ExprKind::Div:
        self(self, x.lhs());
        self(self, x.rhs());
        code_.push_back({x.kind(), 0.0, -1});
        --depth;
        break;
      default:
        self(self, x.lhs());
        code_.push_back({x.kind(), x.number(), -1});
        break;
    }
    max_depth_ = std::max(max_depth_, depth);
  };
  emit(emit, e);
}

double CompiledExpr::operator()(std::span<const double> values) const {
  if (code_.empty()) return 0.0;
  std::array<double, 64> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (max_depth_ > static_cast<int>(small.size())) {
    large.resize(static_cast<std::size_t>(max_depth_));
    stack = large.data();
  }
  int top = -1;
  for (const Instr& in : code_) {
    switch (in.kind) {
      case ExprKind::Constant: stack[++top] = in.number; break;
      case ExprKind::Variable: stack[++top] = values[static_cast<std::size_t>(in.slot)]; break;
      case ExprKind::Neg: stack[top] = -stack[top]; break;
      case ExprKind::Add: stack[top - 1] += stack[top]; --top; break;
      case ExprKind::Sub: stack[top - 1] -= stack[top]; --top; break;
      case ExprKind::Mul: stack[top - 1] *= stack[top]; --top; break;
      case ExprKind::Div: stack[top - 1] = apply_div(stack[top - 1], stack[top]); --top; break;
      case ExprKind::Pow:
        if (in.number == 2.0) {
          stack[top] *= stack[top];
        } else if (in.number == 1.0) {
        } else {
          stack[top] = apply_pow(stack[top], in.number);
        }
        break;
      default: stack[top] = apply_function(in.kind, stack[top]); break;
    }
  }
  return stack[0];
}

}  // namespace semidisc

#pragma once

// Scalar field expressions: a small recursive-descent parser, a printer and
// a generic evaluator that runs on plain doubles or on Jet<N> values.
//
// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' integer)*        integer may carry a sign or parentheses
//   primary := number | name | func '(' sum ')' | '(' sum ')'
// Functions: exp ln sin cos sqrt. The constant `pi` is predefined.

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csl/errors.hpp"
#include "csl/jet.hpp"

namespace csl {

enum class Func { exp, ln, sin, cos, sqrt };

inline const char* func_name(Func f) {
  switch (f) {
    case Func::exp: return "exp";
    case Func::ln: return "ln";
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::sqrt: return "sqrt";
  }
  return "?";
}

struct ExprNode {
  enum class Kind { constant, variable, negate, add, sub, mul, div, pow, call };
  Kind kind = Kind::constant;
  double value = 0.0;  // constant
  int var = -1;        // variable index
  int exponent = 0;    // pow
  Func func = Func::exp;
  std::shared_ptr<const ExprNode> lhs, rhs;  // rhs unused for unary kinds
};

using ExprPtr = std::shared_ptr<const ExprNode>;

namespace detail {

inline double fn(Func f, double x) {
  switch (f) {
    case Func::exp: {
      const double r = std::exp(x);
      if (!std::isfinite(r)) throw DomainError("exp overflow");
      return r;
    }
    case Func::ln:
      if (!(x > 0.0)) throw DomainError("ln of a non-positive value");
      return std::log(x);
    case Func::sin: return std::sin(x);
    case Func::cos: return std::cos(x);
    case Func::sqrt:
      if (x < 0.0) throw DomainError("sqrt of a negative value");
      return std::sqrt(x);
  }
  return 0.0;
}

template <int N>
Jet<N> fn(Func f, const Jet<N>& x) {
  switch (f) {
    case Func::exp: return exp(x);
    case Func::ln: return ln(x);
    case Func::sin: return sin(x);
    case Func::cos: return cos(x);
    case Func::sqrt: return sqrt(x);
  }
  return x;
}

inline double constant_like(double v, double) { return v; }
template <int N>
Jet<N> constant_like(double v, const Jet<N>& like) {
  return Jet<N>(like.order(), v);
}

inline double divide(double a, double b) {
  if (b == 0.0) throw DomainError("division by zero");
  return a / b;
}
template <int N>
Jet<N> divide(const Jet<N>& a, const Jet<N>& b) {
  return a / b;
}

inline double power(double a, int k) {
  if (a == 0.0 && k < 0) throw DomainError("division by zero");
  double r = 1.0, base = k < 0 ? 1.0 / a : a;
  for (int n = k < 0 ? -k : k; n > 0; n >>= 1) {
    if (n & 1) r *= base;
    base *= base;
  }
  return r;
}
template <int N>
Jet<N> power(const Jet<N>& a, int k) {
  return pow_int(a, k);
}

template <class T>
T eval_node(const ExprNode& n, std::span<const T> vars, const T& like) {
  using K = ExprNode::Kind;
  switch (n.kind) {
    case K::constant: return constant_like(n.value, like);
    case K::variable: return vars[n.var];
    case K::negate: return -eval_node(*n.lhs, vars, like);
    case K::add: return eval_node(*n.lhs, vars, like) + eval_node(*n.rhs, vars, like);
    case K::sub: return eval_node(*n.lhs, vars, like) - eval_node(*n.rhs, vars, like);
    case K::mul: return eval_node(*n.lhs, vars, like) * eval_node(*n.rhs, vars, like);
    case K::div: return divide(eval_node(*n.lhs, vars, like), eval_node(*n.rhs, vars, like));
    case K::pow: return power(eval_node(*n.lhs, vars, like), n.exponent);
    case K::call: return fn(n.func, eval_node(*n.lhs, vars, like));
  }
  return like;
}

inline bool finite(double x) { return std::isfinite(x); }
template <int N>
bool finite(const Jet<N>& x) {
  return all_finite(x);
}

}  // namespace detail

// Immutable expression tree bound to an ordered list of variable names.
class FieldExpr {
 public:
  FieldExpr() = default;
  FieldExpr(ExprPtr root, std::vector<std::string> variables)
      : root_(std::move(root)), variables_(std::move(variables)) {}

  static FieldExpr constant(double v, std::vector<std::string> variables) {
    auto n = std::make_shared<ExprNode>();
    n->value = v;
    return {std::move(n), std::move(variables)};
  }

  const ExprPtr& root() const noexcept { return root_; }
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  bool empty() const noexcept { return !root_; }

  // True when the tree is a literal zero (the flat conformal factor).
  bool is_zero_constant() const {
    return root_ && root_->kind == ExprNode::Kind::constant && root_->value == 0.0;
  }
  bool is_constant() const { return root_ && root_->kind == ExprNode::Kind::constant; }

  template <class T>
  T eval(std::span<const T> values) const {
    if (!root_) throw Error("evaluating an empty expression");
    if (values.size() != variables_.size())
      throw ArityError("expression expects " + std::to_string(variables_.size()) + " variables, got " +
                       std::to_string(values.size()));
    if (values.empty()) throw ArityError("expression has no variables");
    T r = detail::eval_node(*root_, values, values.front());
    if (!detail::finite(r)) throw DomainError("expression produced a non-finite value");
    return r;
  }
  template <class T, std::size_t K>
  T eval(const std::array<T, K>& values) const {
    return eval<T>(std::span<const T>(values.data(), K));
  }

  std::string to_string() const;

 private:
  ExprPtr root_;
  std::vector<std::string> variables_;
};

// ---------------------------------------------------------------------------
// Node builders, used by catalogs to assemble expressions programmatically.
namespace expr {

inline ExprPtr num(double v) {
  auto n = std::make_shared<ExprNode>();
  n->value = v;
  return n;
}
inline ExprPtr var(int index) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::variable;
  n->var = index;
  return n;
}
inline ExprPtr binary(ExprNode::Kind k, ExprPtr a, ExprPtr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}
inline ExprPtr neg(ExprPtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::negate;
  n->lhs = std::move(a);
  return n;
}
inline ExprPtr call(Func f, ExprPtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::call;
  n->func = f;
  n->lhs = std::move(a);
  return n;
}
inline ExprPtr pow(ExprPtr a, int k) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::pow;
  n->exponent = k;
  n->lhs = std::move(a);
  return n;
}
inline ExprPtr add(ExprPtr a, ExprPtr b) { return binary(ExprNode::Kind::add, std::move(a), std::move(b)); }
inline ExprPtr sub(ExprPtr a, ExprPtr b) { return binary(ExprNode::Kind::sub, std::move(a), std::move(b)); }
inline ExprPtr mul(ExprPtr a, ExprPtr b) { return binary(ExprNode::Kind::mul, std::move(a), std::move(b)); }
inline ExprPtr div(ExprPtr a, ExprPtr b) { return binary(ExprNode::Kind::div, std::move(a), std::move(b)); }

}  // namespace expr

// ---------------------------------------------------------------------------
// Printing: every compound node is parenthesized so the text reparses to the
// same tree regardless of precedence.
namespace detail {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  return v < 0 ? "(" + s + ")" : s;
}

inline void print_node(const ExprNode& n, const std::vector<std::string>& vars, std::string& out) {
  using K = ExprNode::Kind;
  switch (n.kind) {
    case K::constant: out += format_number(n.value); return;
    case K::variable: out += vars.at(n.var); return;
    case K::negate:
      out += "(-";
      print_node(*n.lhs, vars, out);
      out += ")";
      return;
    case K::call:
      out += func_name(n.func);
      out += "(";
      print_node(*n.lhs, vars, out);
      out += ")";
      return;
    case K::pow:
      out += "(";
      print_node(*n.lhs, vars, out);
      out += "^" + std::to_string(n.exponent) + ")";
      return;
    default: break;
  }
  const char op = n.kind == K::add ? '+' : n.kind == K::sub ? '-' : n.kind == K::mul ? '*' : '/';
  out += "(";
  print_node(*n.lhs, vars, out);
  out += ' ';
  out += op;
  out += ' ';
  print_node(*n.rhs, vars, out);
  out += ")";
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  ExprPtr parse() {
    ExprPtr e = sum();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos_); }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      skip_ws();
      fail(pos_ < s_.size() ? std::string("expected '") + c + "'" : std::string("unexpected end of input"));
    }
  }

  ExprPtr sum() {
    ExprPtr e = product();
    for (;;) {
      if (accept('+')) e = expr::add(e, product());
      else if (accept('-')) e = expr::sub(e, product());
      else return e;
    }
  }
  ExprPtr product() {
    ExprPtr e = unary();
    for (;;) {
      if (accept('*')) e = expr::mul(e, unary());
      else if (accept('/')) e = expr::div(e, unary());
      else return e;
    }
  }
  ExprPtr unary() {
    if (accept('-')) return expr::neg(unary());
    return power();
  }
  ExprPtr power() {
    ExprPtr e = primary();
    while (accept('^')) e = expr::pow(e, integer_exponent());
    return e;
  }
  int integer_exponent() {
    const bool paren = accept('(');
    bool negative = accept('-');
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    if (start == pos_) {
      if (pos_ < s_.size() && (s_[pos_] == '.' || std::isalpha(static_cast<unsigned char>(s_[pos_]))))
        fail("exponent must be an integer literal");
      fail(pos_ < s_.size() ? "expected integer exponent" : "unexpected end of input");
    }
    if (pos_ < s_.size() && (s_[pos_] == '.' || s_[pos_] == 'e' || s_[pos_] == 'E'))
      fail("exponent must be an integer literal");
    int k = 0;
    std::from_chars(s_.data() + start, s_.data() + pos_, k);
    if (paren) expect(')');
    return negative ? -k : k;
  }
  ExprPtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = sum();
      expect(')');
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }
  ExprPtr number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && ((s_[pos_] >= '0' && s_[pos_] <= '9') || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && s_[p] >= '0' && s_[p] <= '9') {
        pos_ = p;
        while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
      }
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec != std::errc() || ptr != s_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return expr::num(v);
  }
  ExprPtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name(s_.substr(start, pos_ - start));
    static constexpr std::array<std::pair<const char*, Func>, 5> funcs{
        {{"exp", Func::exp}, {"ln", Func::ln}, {"sin", Func::sin}, {"cos", Func::cos}, {"sqrt", Func::sqrt}}};
    for (const auto& [fname, f] : funcs) {
      if (name == fname) {
        expect('(');
        ExprPtr arg = sum();
        expect(')');
        return expr::call(f, arg);
      }
    }
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name) return expr::var(static_cast<int>(i));
    if (name == "pi") return expr::num(std::numbers::pi);
    throw UnknownIdentifierError(name, start);
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string FieldExpr::to_string() const {
  std::string out;
  if (root_) detail::print_node(*root_, variables_, out);
  return out;
}

// Parse `text` over the given variable names (e.g. {"x","y","z"}).
inline FieldExpr parse_field(std::string_view text, std::vector<std::string> variables) {
  detail::Parser p(text, variables);
  ExprPtr root = p.parse();
  return {std::move(root), std::move(variables)};
}

inline const std::vector<std::string>& ambient_variables() {
  static const std::vector<std::string> v{"x", "y", "z"};
  return v;
}
inline const std::vector<std::string>& chart_variables() {
  static const std::vector<std::string> v{"u", "v"};
  return v;
}
// Chart scalars may also reference the ambient position of the immersion.
inline const std::vector<std::string>& surface_variables() {
  static const std::vector<std::string> v{"u", "v", "x", "y", "z"};
  return v;
}

// Taylor expansion of `e` about `point` to the given order.
template <int N>
Jet<N> jet_eval(const FieldExpr& e, const std::array<double, N>& point, int order) {
  if (static_cast<int>(e.variables().size()) != N)
    throw ArityError("expression has " + std::to_string(e.variables().size()) + " variables, point has " +
                     std::to_string(N));
  std::array<Jet<N>, N> vars;
  for (int v = 0; v < N; ++v) vars[v] = Jet<N>::variable(v, point[v], order);
  return e.eval(vars);
}

}  // namespace csl

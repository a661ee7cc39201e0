#pragma once

// Immutable expression trees for right-hand sides, initial functions and
// forcing terms. Nodes are shared, so copying an Expression is cheap.

#include <charconv>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "fdedtm/error.hpp"

namespace fdedtm {

enum class FuncKind { Exp, Sin, Cos };

class Expression;

namespace ast {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Constant {
  double value;
};
struct TimeVar {};
/// u^(deriv)(t - delay); delay 0 is the undelayed unknown.
struct Unknown {
  int deriv;
  double delay;
};
struct Neg {
  NodePtr arg;
};
struct Add {
  NodePtr lhs, rhs;
};
struct Sub {
  NodePtr lhs, rhs;
};
struct Mul {
  NodePtr lhs, rhs;
};
struct Div {
  NodePtr num;
  double denom;
};
struct IntPow {
  NodePtr base;
  int exponent;
};
/// kind(lambda * t + mu)
struct Func {
  FuncKind kind;
  double lambda;
  double mu;
};

struct Node {
  std::variant<Constant, TimeVar, Unknown, Neg, Add, Sub, Mul, Div, IntPow, Func> data;
};

}  // namespace ast

class Expression {
 public:
  Expression() : root_(std::make_shared<const ast::Node>(ast::Node{ast::Constant{0.0}})) {}
  explicit Expression(ast::NodePtr root) : root_(std::move(root)) {}

  template <typename Alt>
  static Expression make(Alt alt) {
    return Expression(std::make_shared<const ast::Node>(ast::Node{std::move(alt)}));
  }

  const ast::Node& node() const noexcept { return *root_; }
  const ast::NodePtr& ptr() const noexcept { return root_; }

  template <typename Visitor>
  decltype(auto) visit(Visitor&& v) const {
    return std::visit(std::forward<Visitor>(v), root_->data);
  }

 private:
  ast::NodePtr root_;
};

// Construction helpers. Validation of invariants (nonzero denominators,
// nonnegative delays) happens here so that hand-built trees obey the same
// rules as parsed ones.

inline Expression constant(double v) { return Expression::make(ast::Constant{v}); }
inline Expression time_var() { return Expression::make(ast::TimeVar{}); }

inline Expression unknown(int deriv = 0, double delay = 0.0) {
  if (deriv < 0) throw Error(ErrorKind::InvalidArgument, "negative derivative order");
  if (!(delay >= 0.0)) throw Error(ErrorKind::NegativeDelay, "delay " + std::to_string(delay));
  return Expression::make(ast::Unknown{deriv, delay});
}

inline Expression func(FuncKind kind, double lambda, double mu) {
  return Expression::make(ast::Func{kind, lambda, mu});
}

inline Expression operator-(const Expression& a) { return Expression::make(ast::Neg{a.ptr()}); }
inline Expression operator+(const Expression& a, const Expression& b) {
  return Expression::make(ast::Add{a.ptr(), b.ptr()});
}
inline Expression operator-(const Expression& a, const Expression& b) {
  return Expression::make(ast::Sub{a.ptr(), b.ptr()});
}
inline Expression operator*(const Expression& a, const Expression& b) {
  return Expression::make(ast::Mul{a.ptr(), b.ptr()});
}
inline Expression divide(const Expression& a, double denom) {
  if (denom == 0.0 || !std::isfinite(denom))
    throw Error(ErrorKind::NonConstantDenominator, "denominator must be a finite nonzero constant");
  return Expression::make(ast::Div{a.ptr(), denom});
}
inline Expression pow(const Expression& a, int exponent) {
  if (exponent < 0) throw Error(ErrorKind::InvalidArgument, "negative exponent");
  return Expression::make(ast::IntPow{a.ptr(), exponent});
}

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline Expression wrap(const ast::NodePtr& p) { return Expression(p); }
}  // namespace detail

/// Structural identity; doubles compare with ==.
inline bool structurally_equal(const Expression& a, const Expression& b) {
  if (a.ptr() == b.ptr()) return true;
  if (a.node().data.index() != b.node().data.index()) return false;
  using detail::wrap;
  return a.visit([&](const auto& x) -> bool {
    using X = std::decay_t<decltype(x)>;
    const auto& y = std::get<X>(b.node().data);
    if constexpr (std::is_same_v<X, ast::Constant>) {
      return x.value == y.value;
    } else if constexpr (std::is_same_v<X, ast::TimeVar>) {
      return true;
    } else if constexpr (std::is_same_v<X, ast::Unknown>) {
      return x.deriv == y.deriv && x.delay == y.delay;
    } else if constexpr (std::is_same_v<X, ast::Neg>) {
      return structurally_equal(wrap(x.arg), wrap(y.arg));
    } else if constexpr (std::is_same_v<X, ast::Div>) {
      return x.denom == y.denom && structurally_equal(wrap(x.num), wrap(y.num));
    } else if constexpr (std::is_same_v<X, ast::IntPow>) {
      return x.exponent == y.exponent && structurally_equal(wrap(x.base), wrap(y.base));
    } else if constexpr (std::is_same_v<X, ast::Func>) {
      return x.kind == y.kind && x.lambda == y.lambda && x.mu == y.mu;
    } else {
      return structurally_equal(wrap(x.lhs), wrap(y.lhs)) &&
             structurally_equal(wrap(x.rhs), wrap(y.rhs));
    }
  });
}

inline bool contains_unknown(const Expression& e) {
  using detail::wrap;
  return e.visit(detail::overloaded{
      [](const ast::Constant&) { return false; },
      [](const ast::TimeVar&) { return false; },
      [](const ast::Unknown&) { return true; },
      [](const ast::Func&) { return false; },
      [](const ast::Neg& n) { return contains_unknown(wrap(n.arg)); },
      [](const ast::Div& n) { return contains_unknown(wrap(n.num)); },
      [](const ast::IntPow& n) { return n.exponent > 0 && contains_unknown(wrap(n.base)); },
      [](const auto& bin) { return contains_unknown(wrap(bin.lhs)) || contains_unknown(wrap(bin.rhs)); },
  });
}

/// Polynomial degree in the Unknown nodes (0 for known functions).
inline int unknown_degree(const Expression& e) {
  using detail::wrap;
  return e.visit(detail::overloaded{
      [](const ast::Constant&) { return 0; },
      [](const ast::TimeVar&) { return 0; },
      [](const ast::Unknown&) { return 1; },
      [](const ast::Func&) { return 0; },
      [](const ast::Neg& n) { return unknown_degree(wrap(n.arg)); },
      [](const ast::Div& n) { return unknown_degree(wrap(n.num)); },
      [](const ast::IntPow& n) { return n.exponent * unknown_degree(wrap(n.base)); },
      [](const ast::Mul& n) { return unknown_degree(wrap(n.lhs)) + unknown_degree(wrap(n.rhs)); },
      [](const auto& bin) { return std::max(unknown_degree(wrap(bin.lhs)), unknown_degree(wrap(bin.rhs))); },
  });
}

struct Affine {
  double lambda;
  double mu;
};

/// Returns (lambda, mu) when e == lambda*t + mu identically, nullopt otherwise.
inline std::optional<Affine> affine_form(const Expression& e) {
  using detail::wrap;
  using R = std::optional<Affine>;
  auto fn_value = [](FuncKind k, double x) {
    switch (k) {
      case FuncKind::Exp: return std::exp(x);
      case FuncKind::Sin: return std::sin(x);
      case FuncKind::Cos: return std::cos(x);
    }
    return 0.0;
  };
  return e.visit(detail::overloaded{
      [](const ast::Constant& c) -> R { return Affine{0.0, c.value}; },
      [](const ast::TimeVar&) -> R { return Affine{1.0, 0.0}; },
      [](const ast::Unknown&) -> R { return std::nullopt; },
      [&](const ast::Func& f) -> R {
        if (f.lambda != 0.0) return std::nullopt;
        return Affine{0.0, fn_value(f.kind, f.mu)};
      },
      [](const ast::Neg& n) -> R {
        auto a = affine_form(wrap(n.arg));
        if (!a) return std::nullopt;
        return Affine{-a->lambda, -a->mu};
      },
      [](const ast::Add& n) -> R {
        auto a = affine_form(wrap(n.lhs));
        auto b = affine_form(wrap(n.rhs));
        if (!a || !b) return std::nullopt;
        return Affine{a->lambda + b->lambda, a->mu + b->mu};
      },
      [](const ast::Sub& n) -> R {
        auto a = affine_form(wrap(n.lhs));
        auto b = affine_form(wrap(n.rhs));
        if (!a || !b) return std::nullopt;
        return Affine{a->lambda - b->lambda, a->mu - b->mu};
      },
      [](const ast::Mul& n) -> R {
        auto a = affine_form(wrap(n.lhs));
        auto b = affine_form(wrap(n.rhs));
        if (!a || !b) return std::nullopt;
        if (a->lambda != 0.0 && b->lambda != 0.0) return std::nullopt;
        return Affine{a->lambda * b->mu + a->mu * b->lambda, a->mu * b->mu};
      },
      [](const ast::Div& n) -> R {
        auto a = affine_form(wrap(n.num));
        if (!a) return std::nullopt;
        return Affine{a->lambda / n.denom, a->mu / n.denom};
      },
      [](const ast::IntPow& n) -> R {
        if (n.exponent == 0) return Affine{0.0, 1.0};
        auto a = affine_form(wrap(n.base));
        if (!a) return std::nullopt;
        if (n.exponent == 1) return a;
        if (a->lambda != 0.0) return std::nullopt;
        return Affine{0.0, std::pow(a->mu, n.exponent)};
      },
  });
}

/// Pointwise value of an Unknown-free expression.
inline double evaluate(const Expression& e, double t) {
  using detail::wrap;
  return e.visit(detail::overloaded{
      [](const ast::Constant& c) { return c.value; },
      [t](const ast::TimeVar&) { return t; },
      [](const ast::Unknown&) -> double {
        throw Error(ErrorKind::NotKnownFunction, "cannot evaluate the unknown function pointwise");
      },
      [t](const ast::Func& f) {
        const double x = f.lambda * t + f.mu;
        switch (f.kind) {
          case FuncKind::Exp: return std::exp(x);
          case FuncKind::Sin: return std::sin(x);
          case FuncKind::Cos: return std::cos(x);
        }
        return 0.0;
      },
      [t](const ast::Neg& n) { return -evaluate(wrap(n.arg), t); },
      [t](const ast::Add& n) { return evaluate(wrap(n.lhs), t) + evaluate(wrap(n.rhs), t); },
      [t](const ast::Sub& n) { return evaluate(wrap(n.lhs), t) - evaluate(wrap(n.rhs), t); },
      [t](const ast::Mul& n) { return evaluate(wrap(n.lhs), t) * evaluate(wrap(n.rhs), t); },
      [t](const ast::Div& n) { return evaluate(wrap(n.num), t) / n.denom; },
      [t](const ast::IntPow& n) {
        const double b = evaluate(wrap(n.base), t);
        double acc = 1.0;
        for (int i = 0; i < n.exponent; ++i) acc *= b;
        return acc;
      },
  });
}

namespace detail {

/// Shortest decimal that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  // the grammar has no exponent-free infinity; keep plain decimals parseable
  return s;
}

inline std::string format_signed(double v) {
  return v < 0 || std::signbit(v) ? "(" + format_number(v) + ")" : format_number(v);
}

}  // namespace detail

/// Fully parenthesized text that parses back to a structurally identical tree.
inline std::string to_string(const Expression& e) {
  using detail::format_number;
  using detail::format_signed;
  using detail::wrap;
  return e.visit(detail::overloaded{
      [](const ast::Constant& c) { return format_signed(c.value); },
      [](const ast::TimeVar&) { return std::string("t"); },
      [](const ast::Unknown& u) {
        std::string s = u.deriv <= 3 ? "u" + std::string(static_cast<std::size_t>(u.deriv), '\'')
                                     : "u^(" + std::to_string(u.deriv) + ")";
        if (u.delay != 0.0) return s + "(t-" + format_number(u.delay) + ")";
        return s + "(t)";
      },
      [](const ast::Func& f) {
        const char* name = f.kind == FuncKind::Exp ? "exp" : f.kind == FuncKind::Sin ? "sin" : "cos";
        return std::string(name) + "(" + format_signed(f.lambda) + "*t+" + format_signed(f.mu) + ")";
      },
      [](const ast::Neg& n) { return "-(" + to_string(wrap(n.arg)) + ")"; },
      [](const ast::Add& n) { return "(" + to_string(wrap(n.lhs)) + " + " + to_string(wrap(n.rhs)) + ")"; },
      [](const ast::Sub& n) { return "(" + to_string(wrap(n.lhs)) + " - " + to_string(wrap(n.rhs)) + ")"; },
      [](const ast::Mul& n) { return "(" + to_string(wrap(n.lhs)) + " * " + to_string(wrap(n.rhs)) + ")"; },
      [](const ast::Div& n) { return "(" + to_string(wrap(n.num)) + " / " + format_signed(n.denom) + ")"; },
      [](const ast::IntPow& n) { return "(" + to_string(wrap(n.base)) + ")^" + std::to_string(n.exponent); },
  });
}

}  // namespace fdedtm

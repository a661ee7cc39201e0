#pragma once

// Recursive-descent parser for the expression language.
//
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := base ('^' uint)?
//   base    := number | 't' | unknown | func '(' affine ')' | '(' expr ')'
//   unknown := 'u' '\''* ('(' arg ')')? | 'u^(' uint ')' ('(' arg ')')?
//   arg     := 't' (('-'|'+') number)?
//   func    := 'exp' | 'sin' | 'cos'
//
// Precedence is ^ > unary minus > * / > + -, so "-t^2" is -(t^2). A minus
// written directly in front of a numeric literal folds into the constant.
// Denominators must reduce to nonzero constants and function arguments to
// lambda*t + mu; both are checked while parsing.

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>

#include "fdedtm/error.hpp"
#include "fdedtm/expression.hpp"

namespace fdedtm {

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expression parse_all() {
    Expression e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(pos_, what); }
  [[noreturn]] void fail_at(std::size_t at, ErrorKind kind, const std::string& what) const {
    throw Error(kind, what + " at offset " + std::to_string(at));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  bool starts_number() {
    const char c = peek();
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.';
  }

  Expression expr() {
    Expression lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + term();
      } else if (accept('-')) {
        lhs = lhs - term();
      } else {
        return lhs;
      }
    }
  }

  Expression term() {
    Expression lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * unary();
      } else if (peek() == '/') {
        ++pos_;
        const std::size_t at = pos_;
        Expression den = unary();
        auto aff = contains_unknown(den) ? std::nullopt : affine_form(den);
        if (!aff || aff->lambda != 0.0)
          fail_at(at, ErrorKind::NonConstantDenominator, "denominator is not a constant");
        if (aff->mu == 0.0 || !std::isfinite(aff->mu))
          fail_at(at, ErrorKind::NonConstantDenominator, "denominator evaluates to zero");
        lhs = divide(lhs, aff->mu);
      } else {
        return lhs;
      }
    }
  }

  Expression unary() {
    if (accept('-')) {
      if (starts_number()) {
        Expression operand = power();
        if (auto* c = std::get_if<ast::Constant>(&operand.node().data)) return constant(-c->value);
        return -operand;
      }
      return -unary();
    }
    return power();
  }

  Expression power() {
    Expression b = base();
    if (accept('^')) {
      skip_ws();
      return pow(b, parse_uint());
    }
    return b;
  }

  int parse_uint() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
      fail("expected a nonnegative integer");
    int value = 0;
    auto [end, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc{} || end == text_.data() + start) fail("expected a nonnegative integer");
    pos_ = static_cast<std::size_t>(end - text_.data());
    return value;
  }

  double parse_number() {
    skip_ws();
    const std::size_t start = pos_;
    std::size_t i = pos_;
    auto digits = [&] {
      while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) ++i;
    };
    digits();
    if (i < text_.size() && text_[i] == '.') {
      ++i;
      digits();
    }
    if (i < text_.size() && (text_[i] == 'e' || text_[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < text_.size() && (text_[j] == '+' || text_[j] == '-')) ++j;
      if (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) {
        i = j;
        digits();
      }
    }
    double value = 0.0;
    auto [end, ec] = std::from_chars(text_.data() + start, text_.data() + i, value);
    if (ec != std::errc{} || end != text_.data() + i) fail("malformed number");
    pos_ = i;
    return value;
  }

  std::string_view identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  Expression base() {
    const char c = peek();
    if (starts_number()) return constant(parse_number());
    if (c == '(') {
      ++pos_;
      Expression inner = expr();
      expect(')');
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t at = pos_;
      const std::string_view id = identifier();
      if (id == "t") return time_var();
      if (id == "u") return unknown_term();
      if (id == "exp" || id == "sin" || id == "cos") {
        const FuncKind kind = id == "exp" ? FuncKind::Exp : id == "sin" ? FuncKind::Sin : FuncKind::Cos;
        expect('(');
        const std::size_t arg_at = pos_;
        Expression arg = expr();
        expect(')');
        auto aff = affine_form(arg);
        if (!aff)
          fail_at(arg_at, ErrorKind::NonAffineArgument,
                  std::string(id) + " argument is not of the form lambda*t + mu");
        return func(kind, aff->lambda, aff->mu);
      }
      pos_ = at;
      fail("unknown identifier '" + std::string(id) + "'");
    }
    if (c == '\0') fail("unexpected end of input");
    fail("unexpected '" + std::string(1, c) + "'");
  }

  // 'u' has been consumed.
  Expression unknown_term() {
    int deriv = 0;
    if (pos_ < text_.size() && text_[pos_] == '^' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '(') {
      pos_ += 2;
      deriv = parse_uint();
      expect(')');
    } else {
      while (pos_ < text_.size() && text_[pos_] == '\'') {
        ++deriv;
        ++pos_;
      }
    }
    double delay = 0.0;
    if (accept('(')) {
      const std::size_t at = pos_;
      if (identifier() != "t") {
        pos_ = at;
        fail("expected 't' as the argument of u");
      }
      if (accept('-')) {
        delay = parse_number();
      } else if (accept('+')) {
        const double lead = parse_number();
        if (lead != 0.0) fail_at(at, ErrorKind::NegativeDelay, "advanced argument u(t+c)");
      }
      expect(')');
    }
    return unknown(deriv, delay);
  }
};

}  // namespace detail

inline Expression parse(std::string_view text) { return detail::Parser(text).parse_all(); }

}  // namespace fdedtm

#pragma once

// Structural queries on right-hand sides: delay/derivative classification and
// Taylor coefficients of known (Unknown-free) functions.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fdedtm/error.hpp"
#include "fdedtm/expression.hpp"
#include "fdedtm/series.hpp"

namespace fdedtm {

/// Delays closer than this are the same delay.
inline constexpr double kDelayTolerance = 1e-12;

/// One delayed unknown u^(deriv)(t - delay) as it occurs in an expression.
struct DelayedTerm {
  int deriv;
  double delay;
  friend bool operator==(const DelayedTerm&, const DelayedTerm&) = default;
};

struct RhsClassification {
  int order = 0;                   ///< n, supplied by the problem
  std::vector<double> delays;      ///< distinct positive delays, ascending
  std::vector<int> max_derivs;     ///< m_i for each entry of `delays`
  bool is_neutral = false;         ///< max m_i == n
  int max_undelayed_deriv = -1;    ///< -1 when u does not occur undelayed

  double max_delay() const { return delays.empty() ? 0.0 : delays.back(); }
  double min_delay() const { return delays.empty() ? 0.0 : delays.front(); }
  int max_delayed_deriv() const {
    return max_derivs.empty() ? -1 : *std::max_element(max_derivs.begin(), max_derivs.end());
  }
};

namespace detail {

inline void collect_unknowns(const Expression& e, std::vector<ast::Unknown>& out) {
  e.visit(overloaded{
      [&](const ast::Unknown& u) { out.push_back(u); },
      [](const ast::Constant&) {},
      [](const ast::TimeVar&) {},
      [](const ast::Func&) {},
      [&](const ast::Neg& n) { collect_unknowns(wrap(n.arg), out); },
      [&](const ast::Div& n) { collect_unknowns(wrap(n.num), out); },
      [&](const ast::IntPow& n) {
        if (n.exponent > 0) collect_unknowns(wrap(n.base), out);
      },
      [&](const auto& bin) {
        collect_unknowns(wrap(bin.lhs), out);
        collect_unknowns(wrap(bin.rhs), out);
      },
  });
}

inline bool is_undelayed(double delay) { return delay <= kDelayTolerance; }

}  // namespace detail

/// Distinct (derivative, delay) pairs of delayed unknowns, sorted by delay then order.
inline std::vector<DelayedTerm> delayed_terms(const Expression& e) {
  std::vector<ast::Unknown> all;
  detail::collect_unknowns(e, all);
  std::vector<DelayedTerm> out;
  for (const auto& u : all) {
    if (detail::is_undelayed(u.delay)) continue;
    const bool seen = std::any_of(out.begin(), out.end(), [&](const DelayedTerm& d) {
      return d.deriv == u.deriv && std::abs(d.delay - u.delay) < kDelayTolerance;
    });
    if (!seen) out.push_back({u.deriv, u.delay});
  }
  std::sort(out.begin(), out.end(), [](const DelayedTerm& a, const DelayedTerm& b) {
    return a.delay != b.delay ? a.delay < b.delay : a.deriv < b.deriv;
  });
  return out;
}

inline RhsClassification classify(const Expression& rhs, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "equation order must be at least 1");
  std::vector<ast::Unknown> all;
  detail::collect_unknowns(rhs, all);

  RhsClassification cls;
  cls.order = n;
  for (const auto& u : all) {
    if (detail::is_undelayed(u.delay)) {
      if (u.deriv >= n)
        throw Error(ErrorKind::NotExplicit, "right-hand side contains u^(" + std::to_string(u.deriv) +
                                                ")(t) but the equation has order " + std::to_string(n));
      cls.max_undelayed_deriv = std::max(cls.max_undelayed_deriv, u.deriv);
      continue;
    }
    if (u.deriv > n)
      throw Error(ErrorKind::OrderViolation, "delayed derivative of order " + std::to_string(u.deriv) +
                                                 " exceeds equation order " + std::to_string(n));
  }
  for (const auto& term : delayed_terms(rhs)) {
    if (!cls.delays.empty() && std::abs(cls.delays.back() - term.delay) < kDelayTolerance) {
      cls.max_derivs.back() = std::max(cls.max_derivs.back(), term.deriv);
    } else {
      cls.delays.push_back(term.delay);
      cls.max_derivs.push_back(term.deriv);
    }
  }
  cls.is_neutral = cls.max_delayed_deriv() == n;
  return cls;
}

/// Taylor coefficients of an Unknown-free expression about `center`, built
/// from the series primitives (elementary series, sums, Cauchy products).
inline TaylorSeries series_of_known(const Expression& e, double center, int order) {
  using detail::wrap;
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "negative series order");
  auto constant_series = [&](double v) {
    auto s = TaylorSeries::zero(center, order);
    s[0] = v;
    return s;
  };
  return e.visit(detail::overloaded{
      [&](const ast::Constant& c) { return constant_series(c.value); },
      [&](const ast::TimeVar&) {
        return elementary_series(ElementaryKind::Power, 0.0, 0.0, center, order, 1);
      },
      [](const ast::Unknown&) -> TaylorSeries {
        throw Error(ErrorKind::NotKnownFunction, "expression depends on the unknown function");
      },
      [&](const ast::Func& f) {
        const ElementaryKind kind = f.kind == FuncKind::Exp   ? ElementaryKind::Exp
                                    : f.kind == FuncKind::Sin ? ElementaryKind::Sin
                                                              : ElementaryKind::Cos;
        return elementary_series(kind, f.lambda, f.mu, center, order);
      },
      [&](const ast::Neg& n) { return scale(series_of_known(wrap(n.arg), center, order), -1.0); },
      [&](const ast::Add& n) {
        return add(series_of_known(wrap(n.lhs), center, order), series_of_known(wrap(n.rhs), center, order));
      },
      [&](const ast::Sub& n) {
        return add(series_of_known(wrap(n.lhs), center, order),
                   scale(series_of_known(wrap(n.rhs), center, order), -1.0));
      },
      [&](const ast::Mul& n) {
        return cauchy_product(series_of_known(wrap(n.lhs), center, order),
                              series_of_known(wrap(n.rhs), center, order));
      },
      [&](const ast::Div& n) {
        auto s = series_of_known(wrap(n.num), center, order);
        for (auto& x : s.mutable_coeffs()) x /= n.denom;
        return s;
      },
      [&](const ast::IntPow& n) {
        auto acc = constant_series(1.0);
        if (n.exponent == 0) return acc;
        const auto b = series_of_known(wrap(n.base), center, order);
        acc = b;
        for (int i = 1; i < n.exponent; ++i) acc = cauchy_product(acc, b);
        return acc;
      },
  });
}

}  // namespace fdedtm

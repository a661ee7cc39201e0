#pragma once

// Truncated Taylor-coefficient arithmetic ("differential transforms").
//
// A series about center c stores U(k) = u^(k)(c) / k! for k = 0..N. Binary
// operations never zero-pad: the result order is the smaller operand order.
// Binomial coefficients are formed by multiplicative recurrence and stay exact
// in double precision for N <= 40, which is the supported envelope.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fdedtm/error.hpp"

namespace fdedtm {

template <std::floating_point T>
class BasicTaylorSeries {
 public:
  using value_type = T;

  BasicTaylorSeries() : coeffs_(1, T(0)) {}

  BasicTaylorSeries(T center, std::vector<T> coeffs) : center_(center), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw Error(ErrorKind::InvalidArgument, "series needs at least one coefficient");
  }

  static BasicTaylorSeries zero(T center, int order) {
    if (order < 0) throw Error(ErrorKind::InvalidArgument, "negative series order");
    return BasicTaylorSeries(center, std::vector<T>(static_cast<std::size_t>(order) + 1, T(0)));
  }

  T center() const noexcept { return center_; }
  int order() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const T> coeffs() const noexcept { return coeffs_; }
  std::vector<T>& mutable_coeffs() noexcept { return coeffs_; }

  T operator[](std::size_t k) const { return coeffs_[k]; }
  T& operator[](std::size_t k) { return coeffs_[k]; }

  /// Drops coefficients above `order`.
  BasicTaylorSeries truncated(int order) const {
    if (order < 0 || order > this->order())
      throw Error(ErrorKind::OrderUnderflow, "cannot truncate series of order " +
                                                 std::to_string(this->order()) + " to " +
                                                 std::to_string(order));
    return BasicTaylorSeries(center_, {coeffs_.begin(), coeffs_.begin() + order + 1});
  }

  /// Same coefficients attached to another expansion point.
  BasicTaylorSeries with_center(T center) const { return BasicTaylorSeries(center, coeffs_); }

  friend bool operator==(const BasicTaylorSeries&, const BasicTaylorSeries&) = default;

 private:
  T center_{0};
  std::vector<T> coeffs_;
};

using TaylorSeries = BasicTaylorSeries<double>;

namespace detail {

template <std::floating_point T>
void require_same_center(const BasicTaylorSeries<T>& a, const BasicTaylorSeries<T>& b) {
  if (a.center() != b.center())
    throw Error(ErrorKind::CenterMismatch, "series centered at " + std::to_string(a.center()) +
                                               " and " + std::to_string(b.center()));
}

/// (k+n)! / k! as a floating-point product.
template <std::floating_point T>
T rising_factor(int k, int n) {
  T f = 1;
  for (int i = 1; i <= n; ++i) f *= static_cast<T>(k + i);
  return f;
}

template <std::floating_point T>
T factorial(int n) {
  return rising_factor<T>(0, n);
}

/// Row i of Pascal's triangle, C(i, 0..i).
template <std::floating_point T>
std::vector<T> binomial_row(int i) {
  std::vector<T> row(static_cast<std::size_t>(i) + 1);
  row[0] = 1;
  for (int k = 1; k <= i; ++k) row[k] = row[k - 1] * static_cast<T>(i - k + 1) / static_cast<T>(k);
  return row;
}

}  // namespace detail

template <std::floating_point T>
BasicTaylorSeries<T> add(const BasicTaylorSeries<T>& a, const BasicTaylorSeries<T>& b) {
  detail::require_same_center(a, b);
  const int order = std::min(a.order(), b.order());
  auto out = BasicTaylorSeries<T>::zero(a.center(), order);
  for (int k = 0; k <= order; ++k) out[k] = a[k] + b[k];
  return out;
}

template <std::floating_point T>
BasicTaylorSeries<T> scale(const BasicTaylorSeries<T>& a, T c) {
  auto out = a;
  for (auto& x : out.mutable_coeffs()) x *= c;
  return out;
}

/// Transform of a product: F(k) = sum_{l<=k} G(l) H(k-l).
template <std::floating_point T>
BasicTaylorSeries<T> cauchy_product(const BasicTaylorSeries<T>& a, const BasicTaylorSeries<T>& b) {
  detail::require_same_center(a, b);
  const int order = std::min(a.order(), b.order());
  auto out = BasicTaylorSeries<T>::zero(a.center(), order);
  for (int k = 0; k <= order; ++k) {
    T acc = 0;
    for (int l = 0; l <= k; ++l) acc += a[l] * b[k - l];
    out[k] = acc;
  }
  return out;
}

/// Transform of the n-th derivative: F(k) = (k+n)!/k! G(k+n). Loses n orders.
template <std::floating_point T>
BasicTaylorSeries<T> differentiate_transform(const BasicTaylorSeries<T>& g, int n) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "negative derivative order");
  if (n > g.order())
    throw Error(ErrorKind::OrderUnderflow, "derivative of order " + std::to_string(n) +
                                               " exceeds series order " + std::to_string(g.order()));
  auto out = BasicTaylorSeries<T>::zero(g.center(), g.order() - n);
  for (int k = 0; k <= out.order(); ++k) out[k] = detail::rising_factor<T>(k, n) * g[k + n];
  return out;
}

/// Transform of f(t) = g(t - a) about the same center (truncated Taylor shift):
///   F(k) = sum_{i=k}^{N} (-1)^{i-k} C(i,k) a^{i-k} G(i).
/// Exact when g is a polynomial of degree <= N. Evaluated by repeated synthetic
/// division, which rounds less than summing the binomial terms.
template <std::floating_point T>
BasicTaylorSeries<T> recenter(const BasicTaylorSeries<T>& g, T a) {
  const int order = g.order();
  BasicTaylorSeries<T> out = g;
  if (a == T(0)) return out;
  auto& c = out.mutable_coeffs();
  for (int k = 0; k < order; ++k)
    for (int i = order - 1; i >= k; --i) c[i] -= a * c[i + 1];
  return out;
}

enum class ElementaryKind { Power, Exp, Sin, Cos };

/// Coefficients of t^n, exp(lt+m), sin(lt+m) or cos(lt+m) about `center`.
/// `power` is only read for ElementaryKind::Power.
template <std::floating_point T>
BasicTaylorSeries<T> elementary_series(ElementaryKind kind, T lambda, T mu, T center, int order,
                                       int power = 0) {
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "negative series order");
  auto out = BasicTaylorSeries<T>::zero(center, order);
  switch (kind) {
    case ElementaryKind::Power: {
      if (power < 0) throw Error(ErrorKind::InvalidArgument, "negative power " + std::to_string(power));
      // (center + s)^n = sum_k C(n,k) center^{n-k} s^k
      const auto binom = detail::binomial_row<T>(power);
      for (int k = 0; k <= std::min(order, power); ++k)
        out[k] = binom[k] * std::pow(center, static_cast<T>(power - k));
      break;
    }
    case ElementaryKind::Exp: {
      T c = std::exp(lambda * center + mu);
      for (int k = 0; k <= order; ++k) {
        out[k] = c;
        c *= lambda / static_cast<T>(k + 1);
      }
      break;
    }
    case ElementaryKind::Sin:
    case ElementaryKind::Cos: {
      // d^k/dt^k sin(theta) cycles through sin, cos, -sin, -cos
      const T theta = lambda * center + mu;
      const T s = std::sin(theta);
      const T c = std::cos(theta);
      const T cycle[4] = {s, c, -s, -c};
      const int phase = kind == ElementaryKind::Sin ? 0 : 1;
      T scale_k = 1;
      for (int k = 0; k <= order; ++k) {
        out[k] = scale_k * cycle[(k + phase) % 4];
        scale_k *= lambda / static_cast<T>(k + 1);
      }
      break;
    }
  }
  return out;
}

/// Inverse transform truncated at N, by Horner's scheme.
template <std::floating_point T>
T evaluate(const BasicTaylorSeries<T>& s, T t) {
  const T x = t - s.center();
  T acc = 0;
  for (int k = s.order(); k >= 0; --k) acc = acc * x + s[k];
  return acc;
}

/// u^(j)(center) = j! U(j).
template <std::floating_point T>
T derivative_values(const BasicTaylorSeries<T>& s, int j) {
  if (j < 0 || j > s.order())
    throw Error(ErrorKind::OrderUnderflow, "derivative " + std::to_string(j) +
                                               " requested from series of order " +
                                               std::to_string(s.order()));
  return detail::factorial<T>(j) * s[j];
}

/// u^(j)(t) of the truncated polynomial at an arbitrary point.
template <std::floating_point T>
T derivative_at(const BasicTaylorSeries<T>& s, int j, T t) {
  return evaluate(differentiate_transform(s, j), t);
}

}  // namespace fdedtm

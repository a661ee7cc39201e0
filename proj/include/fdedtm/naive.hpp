#pragma once

// The global ("classical") transform approach: expand the unknown once about
// t0, replace every delayed term by the truncated shift formula over
// U(0..N), and ignore the initial function entirely. What remains is a finite
// linear system whose rank decides whether the formulation pins down a
// unique series, an affine family, or nothing at all.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "fdedtm/analysis.hpp"
#include "fdedtm/error.hpp"
#include "fdedtm/expression.hpp"
#include "fdedtm/series.hpp"
#include "fdedtm/steps.hpp"

namespace fdedtm {

/// u^(deriv)(t) = value, transformed through the truncated inverse transform.
struct PointCondition {
  double t;
  int deriv;
  double value;
};

/// sum_k weights[k] U(k) = value.
struct LinearCondition {
  std::vector<double> weights;
  double value;
};

using SideCondition = std::variant<PointCondition, LinearCondition>;

struct GlobalSystem {
  int truncation = 0;                      ///< N; there are N+1 columns
  std::vector<std::vector<double>> matrix;  ///< rows of length N+1
  std::vector<double> rhs;

  std::size_t rows() const { return matrix.size(); }
  std::size_t cols() const { return static_cast<std::size_t>(truncation) + 1; }
};

namespace detail {

// A linear form over U(0..N) plus a constant (stored last).
using LinearForm = std::vector<double>;
using LinearStream = std::vector<LinearForm>;  // index k -> k-th transform coefficient

inline LinearStream linear_stream(const Expression& e, double center, int N) {
  const std::size_t width = static_cast<std::size_t>(N) + 2;
  LinearStream out(static_cast<std::size_t>(N) + 1, LinearForm(width, 0.0));

  if (!contains_unknown(e)) {
    const auto s = series_of_known(e, center, N);
    for (int k = 0; k <= N; ++k) out[k][width - 1] = s[k];
    return out;
  }

  auto combine = [&](const LinearStream& a, const LinearStream& b, double sign) {
    LinearStream r = a;
    for (std::size_t k = 0; k < r.size(); ++k)
      for (std::size_t c = 0; c < width; ++c) r[k][c] += sign * b[k][c];
    return r;
  };

  return e.visit(overloaded{
      [&](const ast::Unknown& u) {
        // transform of u^(j)(t - tau) truncated at N:
        //   (k+j)!/k! sum_{i=k+j}^{N} (-1)^{i-k-j} C(i, k+j) tau^{i-k-j} U(i)
        const double tau = is_undelayed(u.delay) ? 0.0 : u.delay;
        for (int k = 0; k + u.deriv <= N; ++k) {
          const int m = k + u.deriv;
          const double factor = rising_factor<double>(k, u.deriv);
          double power = 1.0;
          for (int i = m; i <= N; ++i) {
            const double binom = binomial_row<double>(i)[m];
            out[k][i] += factor * binom * power;
            power *= -tau;
            if (tau == 0.0) break;
          }
        }
        return out;
      },
      [&](const ast::Neg& n) {
        LinearStream r = linear_stream(wrap(n.arg), center, N);
        for (auto& f : r)
          for (auto& x : f) x = -x;
        return r;
      },
      [&](const ast::Add& n) {
        return combine(linear_stream(wrap(n.lhs), center, N), linear_stream(wrap(n.rhs), center, N), 1.0);
      },
      [&](const ast::Sub& n) {
        return combine(linear_stream(wrap(n.lhs), center, N), linear_stream(wrap(n.rhs), center, N), -1.0);
      },
      [&](const ast::Div& n) {
        LinearStream r = linear_stream(wrap(n.num), center, N);
        for (auto& f : r)
          for (auto& x : f) x /= n.denom;
        return r;
      },
      [&](const ast::Mul& n) {
        const Expression lhs = wrap(n.lhs);
        const Expression rhs = wrap(n.rhs);
        const bool lhs_known = !contains_unknown(lhs);
        const auto known = series_of_known(lhs_known ? lhs : rhs, center, N);
        const LinearStream lin = linear_stream(lhs_known ? rhs : lhs, center, N);
        LinearStream r(out.size(), LinearForm(width, 0.0));
        for (int k = 0; k <= N; ++k)
          for (int l = 0; l <= k; ++l)
            if (known[l] != 0.0)
              for (std::size_t c = 0; c < width; ++c) r[k][c] += known[l] * lin[k - l][c];
        return r;
      },
      [&](const ast::IntPow& n) {
        // degree <= 1 leaves only u^1 here
        return linear_stream(wrap(n.base), center, N);
      },
      [&](const auto&) -> LinearStream {
        throw Error(ErrorKind::NaiveModeUnsupported, "unexpected node in linear right-hand side");
      },
  });
}

}  // namespace detail

/// Rows k = 0..N-n of the transformed equation followed by the side conditions.
inline GlobalSystem build_global_system(const FDEProblem& p, const std::vector<SideCondition>& side, int N) {
  classify(p.rhs, p.order);
  if (unknown_degree(p.rhs) > 1)
    throw Error(ErrorKind::NaiveModeUnsupported, "the global transform system is only defined for linear equations");
  if (N < p.order)
    throw Error(ErrorKind::InvalidArgument, "truncation order must be at least the equation order");

  const int n = p.order;
  const std::size_t cols = static_cast<std::size_t>(N) + 1;
  GlobalSystem sys;
  sys.truncation = N;

  const auto stream = detail::linear_stream(p.rhs, p.t0, N);
  for (int k = 0; k + n <= N; ++k) {
    std::vector<double> row(cols, 0.0);
    for (std::size_t c = 0; c < cols; ++c) row[c] = -stream[k][c];
    row[k + n] += detail::rising_factor<double>(k, n);
    sys.matrix.push_back(std::move(row));
    sys.rhs.push_back(stream[k][cols]);
  }

  for (const auto& cond : side) {
    std::vector<double> row(cols, 0.0);
    double value = 0.0;
    if (const auto* pc = std::get_if<PointCondition>(&cond)) {
      if (pc->deriv < 0) throw Error(ErrorKind::InvalidArgument, "negative derivative in point condition");
      const double x = pc->t - p.t0;
      for (int k = pc->deriv; k <= N; ++k)
        row[k] = detail::rising_factor<double>(k - pc->deriv, pc->deriv) * std::pow(x, k - pc->deriv);
      value = pc->value;
    } else {
      const auto& lc = std::get<LinearCondition>(cond);
      for (std::size_t c = 0; c < lc.weights.size(); ++c) {
        if (c < cols) {
          row[c] = lc.weights[c];
        } else if (lc.weights[c] != 0.0) {
          throw Error(ErrorKind::InvalidArgument, "linear condition refers to U(" + std::to_string(c) +
                                                      ") beyond the truncation order");
        }
      }
      value = lc.value;
    }
    sys.matrix.push_back(std::move(row));
    sys.rhs.push_back(value);
  }
  return sys;
}

enum class NaiveClass { Unique, Family, Inconsistent };

constexpr std::string_view to_string(NaiveClass c) noexcept {
  switch (c) {
    case NaiveClass::Unique: return "Unique";
    case NaiveClass::Family: return "Family";
    case NaiveClass::Inconsistent: return "Inconsistent";
  }
  return "?";
}

struct NaiveReport {
  NaiveClass classification = NaiveClass::Unique;
  int truncation = 0;
  std::vector<double> solution;                 ///< unique solution, or particular with free columns at 0
  std::vector<int> free_columns;                ///< Family only
  std::vector<std::vector<double>> nullspace;   ///< one basis vector per free column
  std::vector<double> witness_row;              ///< Inconsistent: reduced coefficients ...
  double witness_rhs = 0.0;                     ///< ... and the nonzero right-hand side

  /// One-line human summary, e.g. "Inconsistent: 0 = 0.5".
  std::string summary() const {
    std::ostringstream os;
    os.precision(17);
    switch (classification) {
      case NaiveClass::Unique:
        os << "Unique";
        break;
      case NaiveClass::Family:
        os << "Family: free";
        for (int c : free_columns) os << " U(" << c << ")";
        break;
      case NaiveClass::Inconsistent:
        os << "Inconsistent: 0 = " << witness_rhs;
        break;
    }
    return os.str();
  }
};

/// Gauss-Jordan elimination with partial pivoting and rank detection.
inline NaiveReport solve_global(const GlobalSystem& sys) {
  const std::size_t m = sys.rows();
  const std::size_t n = sys.cols();
  auto a = sys.matrix;
  auto b = sys.rhs;

  double max_a = 0.0;
  double max_b = 0.0;
  for (const auto& row : a)
    for (double x : row) max_a = std::max(max_a, std::abs(x));
  for (double x : b) max_b = std::max(max_b, std::abs(x));
  const double pivot_tol = 1e-10 * max_a;
  const double rhs_tol = 1e-9 * (1.0 + max_b);

  std::vector<int> pivot_cols;
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < m; ++c) {
    std::size_t best = r;
    for (std::size_t i = r + 1; i < m; ++i)
      if (std::abs(a[i][c]) > std::abs(a[best][c])) best = i;
    if (std::abs(a[best][c]) <= pivot_tol) continue;
    std::swap(a[r], a[best]);
    std::swap(b[r], b[best]);
    const double inv = 1.0 / a[r][c];
    for (auto& x : a[r]) x *= inv;
    b[r] *= inv;
    a[r][c] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == r || a[i][c] == 0.0) continue;
      const double f = a[i][c];
      for (std::size_t j = 0; j < n; ++j) a[i][j] -= f * a[r][j];
      b[i] -= f * b[r];
      a[i][c] = 0.0;
    }
    pivot_cols.push_back(static_cast<int>(c));
    ++r;
  }

  NaiveReport rep;
  rep.truncation = sys.truncation;
  for (std::size_t i = r; i < m; ++i) {
    if (std::abs(b[i]) > rhs_tol) {
      rep.classification = NaiveClass::Inconsistent;
      rep.witness_row = a[i];
      for (auto& x : rep.witness_row)
        if (std::abs(x) <= pivot_tol) x = 0.0;
      rep.witness_rhs = b[i];
      return rep;
    }
  }

  rep.solution.assign(n, 0.0);
  for (std::size_t i = 0; i < pivot_cols.size(); ++i) rep.solution[pivot_cols[i]] = b[i];
  for (std::size_t c = 0; c < n; ++c) {
    if (std::find(pivot_cols.begin(), pivot_cols.end(), static_cast<int>(c)) != pivot_cols.end()) continue;
    rep.free_columns.push_back(static_cast<int>(c));
    std::vector<double> v(n, 0.0);
    v[c] = 1.0;
    for (std::size_t i = 0; i < pivot_cols.size(); ++i) v[pivot_cols[i]] = -a[i][c];
    rep.nullspace.push_back(std::move(v));
  }
  rep.classification = rep.free_columns.empty() ? NaiveClass::Unique : NaiveClass::Family;
  return rep;
}

}  // namespace fdedtm

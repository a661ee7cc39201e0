#pragma once

// Method of steps driven by differential-transform recurrences.
//
// On every segment [a, b) of the breakpoint lattice the delayed arguments of
// the right-hand side fall inside the initial function or an already solved
// segment. Substituting those known series turns the equation into an ODE
// whose Taylor coefficients about a follow from
//   (k+n)!/k! U(k+n) = F(k, U(0), ..., U(k+n-1)).
// Each segment is seeded with the derivatives 0..n-1 of its predecessor at
// the shared breakpoint (or with the initial conditions at t0).

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fdedtm/analysis.hpp"
#include "fdedtm/error.hpp"
#include "fdedtm/expression.hpp"
#include "fdedtm/series.hpp"
#include "fdedtm/transform.hpp"

namespace fdedtm {

struct Tolerances {
  double consistency = 1e-9;  ///< |u_j - phi^(j)(t0)| allowed for given initial conditions
  double continuity = 1e-9;   ///< derivative agreement at breakpoints
  double lattice = 1e-12;     ///< breakpoint deduplication
  std::size_t max_breakpoints = 10'000;
};

inline constexpr int kDefaultTruncationOrder = 16;

/// u^(n)(t) = rhs on [t0, horizon), u = history on [t0 - t*, t0].
struct FDEProblem {
  int order = 1;
  Expression rhs;
  Expression history;
  double t0 = 0.0;
  double horizon = 1.0;
  std::optional<std::vector<double>> conditions;  ///< u(t0), u'(t0), ..., u^(n-1)(t0)
  Tolerances tol{};
};

/// Classifies the right-hand side and checks well-posedness. Returns the
/// classification so callers need not recompute it.
inline RhsClassification validate(const FDEProblem& p) {
  const RhsClassification cls = classify(p.rhs, p.order);
  if (contains_unknown(p.history))
    throw Error(ErrorKind::NotKnownFunction, "initial function must not refer to u");
  if (!(p.horizon >= p.t0)) throw Error(ErrorKind::InvalidArgument, "horizon lies before t0");
  if (p.conditions) {
    if (static_cast<int>(p.conditions->size()) != p.order)
      throw Error(ErrorKind::InvalidArgument, "expected " + std::to_string(p.order) +
                                                  " initial conditions, got " +
                                                  std::to_string(p.conditions->size()));
    const auto phi = series_of_known(p.history, p.t0, p.order);
    for (int j = 0; j < p.order; ++j) {
      const double from_phi = derivative_values(phi, j);
      if (std::abs((*p.conditions)[j] - from_phi) > p.tol.consistency)
        throw Error(ErrorKind::InconsistentConditions,
                    "u^(" + std::to_string(j) + ")(t0) = " + std::to_string((*p.conditions)[j]) +
                        " but the initial function gives " + std::to_string(from_phi));
    }
  }
  return cls;
}

/// Sorted lattice {t0 + sum k_i tau_i} within [t0, horizon], plus horizon.
inline std::vector<double> breakpoints(const FDEProblem& p) {
  const RhsClassification cls = classify(p.rhs, p.order);
  if (!(p.horizon >= p.t0)) throw Error(ErrorKind::InvalidArgument, "horizon lies before t0");
  const double tol = p.tol.lattice;

  std::set<double> points{p.t0, p.horizon};
  auto insert = [&](double x) {
    auto it = points.lower_bound(x - tol);
    if (it != points.end() && *it <= x + tol) return false;
    points.insert(x);
    if (points.size() > p.tol.max_breakpoints)
      throw Error(ErrorKind::LatticeExplosion,
                  "more than " + std::to_string(p.tol.max_breakpoints) + " breakpoints before the horizon");
    return true;
  };

  std::vector<double> frontier{p.t0};
  while (!frontier.empty()) {
    std::vector<double> next;
    for (const double x : frontier)
      for (const double tau : cls.delays) {
        const double y = x + tau;
        if (y > p.horizon + tol) continue;
        if (insert(y)) next.push_back(y);
      }
    frontier = std::move(next);
  }
  return {points.begin(), points.end()};
}

struct Segment {
  double start;
  double end;
  TaylorSeries series;  ///< centered at start
};

struct PiecewiseSolution {
  int order = 1;
  Expression history;
  double t0 = 0.0;
  double history_start = 0.0;  ///< t0 - t*
  std::vector<Segment> segments;

  double end() const { return segments.empty() ? t0 : segments.back().end; }

  /// Segment whose half-open interval holds t; the last segment also owns its right end.
  const Segment* find(double t) const {
    if (segments.empty() || t < t0 || t > segments.back().end) return nullptr;
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double x, const Segment& s) { return x < s.start; });
    return &*std::prev(it);
  }

  double evaluate(double t) const {
    if (t < t0 || segments.empty()) {
      if (t < history_start || t > t0)
        throw Error(ErrorKind::InvalidArgument, "t = " + std::to_string(t) + " outside the solution domain");
      return fdedtm::evaluate(history, t);
    }
    const Segment* s = find(t);
    if (s == nullptr)
      throw Error(ErrorKind::InvalidArgument, "t = " + std::to_string(t) + " outside the solution domain");
    return fdedtm::evaluate(s->series, t);
  }

  double derivative(int j, double t) const {
    const Segment* s = find(t);
    if (s == nullptr)
      throw Error(ErrorKind::InvalidArgument, "t = " + std::to_string(t) + " outside the solved segments");
    return derivative_at(s->series, j, t);
  }
};

/// Binds every delayed term of the right-hand side to a known series about `a`
/// for the segment [a, b). Bound series have order >= N - n.
inline TransformContext reduce_segment(const FDEProblem& p, const PiecewiseSolution& sol, double a, double b,
                                       int N) {
  const RhsClassification cls = classify(p.rhs, p.order);
  const double tol = p.tol.lattice;
  const double lower = p.t0 - cls.max_delay();

  TransformContext ctx;
  ctx.center = a;
  for (const auto& term : delayed_terms(p.rhs)) {
    const double from = a - term.delay;
    const double to = b - term.delay;
    if (from < lower - tol)
      throw Error(ErrorKind::HistoryUnderflow,
                  "window starting at " + std::to_string(from) + " precedes t0 - t* = " + std::to_string(lower));

    TaylorSeries bound;
    if (to <= p.t0 + tol) {
      // phi^(j)(t - tau) about a is phi^(j) about a - tau
      bound = differentiate_transform(series_of_known(p.history, from, N + term.deriv), term.deriv);
    } else {
      if (from < p.t0 - tol)
        throw Error(ErrorKind::HistoryUnderflow, "window [" + std::to_string(from) + ", " + std::to_string(to) +
                                                     ") straddles t0; segment is not on the breakpoint lattice");
      auto it = std::find_if(sol.segments.begin(), sol.segments.end(), [&](const Segment& s) {
        return s.start <= from + tol && to <= s.end + tol;
      });
      if (it == sol.segments.end())
        throw Error(ErrorKind::MissingHistory, "no solved segment covers [" + std::to_string(from) + ", " +
                                                   std::to_string(to) + ")");
      const double offset = from - it->series.center();
      bound = recenter(differentiate_transform(it->series, term.deriv), -offset);
    }
    ctx.histories.push_back({term, bound.with_center(a)});
  }
  return ctx;
}

/// Coefficients of the reduced ODE's solution about ctx.center, order N.
inline TaylorSeries solve_segment(const FDEProblem& p, TransformContext ctx, const std::vector<double>& seeds,
                                  int N) {
  const int n = p.order;
  if (static_cast<int>(seeds.size()) != n)
    throw Error(ErrorKind::InvalidArgument, "expected " + std::to_string(n) + " seed derivatives");
  if (N < n) throw Error(ErrorKind::InvalidArgument, "truncation order must be at least the equation order");

  ctx.unknown.assign(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) ctx.unknown[j] = seeds[j] / detail::factorial<double>(j);

  CoefficientTape tape(p.rhs);
  for (int k = 0; k + n <= N; ++k) {
    const double f = tape.coefficient(k, ctx);
    ctx.unknown.push_back(f / detail::rising_factor<double>(k, n));
  }
  return TaylorSeries(ctx.center, std::move(ctx.unknown));
}

/// Residual coefficients (k+n)!/k! S(k+n) - F(k) for k = 0..N-n of a solved segment.
inline std::vector<double> segment_residual(const FDEProblem& p, const TransformContext& bound,
                                            const TaylorSeries& s) {
  const int n = p.order;
  TransformContext ctx = bound;
  ctx.center = s.center();
  ctx.unknown.assign(s.coeffs().begin(), s.coeffs().end());
  CoefficientTape tape(p.rhs);
  std::vector<double> out;
  for (int k = 0; k + n <= s.order(); ++k)
    out.push_back(detail::rising_factor<double>(k, n) * s[k + n] - tape.coefficient(k, ctx));
  return out;
}

/// Initial derivative values at t0: the given conditions, else those of phi.
inline std::vector<double> initial_seeds(const FDEProblem& p) {
  if (p.conditions) return *p.conditions;
  const auto phi = series_of_known(p.history, p.t0, p.order);
  std::vector<double> seeds(static_cast<std::size_t>(p.order));
  for (int j = 0; j < p.order; ++j) seeds[j] = derivative_values(phi, j);
  return seeds;
}

inline PiecewiseSolution solve(const FDEProblem& p, int N = kDefaultTruncationOrder) {
  const RhsClassification cls = validate(p);
  if (N < p.order)
    throw Error(ErrorKind::InvalidArgument, "truncation order " + std::to_string(N) +
                                                " is below the equation order " + std::to_string(p.order));
  PiecewiseSolution sol;
  sol.order = p.order;
  sol.history = p.history;
  sol.t0 = p.t0;
  sol.history_start = p.t0 - cls.max_delay();

  const auto points = breakpoints(p);
  std::vector<double> seeds = initial_seeds(p);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    try {
      if (i > 0) {
        const auto& prev = sol.segments.back().series;
        for (int j = 0; j < p.order; ++j) seeds[j] = derivative_at(prev, j, a);
      }
      auto ctx = reduce_segment(p, sol, a, b, N);
      sol.segments.push_back({a, b, solve_segment(p, std::move(ctx), seeds, N)});
    } catch (const Error& e) {
      throw Error(e.kind(), "segment " + std::to_string(i) + " [" + std::to_string(a) + ", " +
                                std::to_string(b) + "): " + e.what());
    }
  }
  return sol;
}

/// Jumps of the derivatives 0..n at t0 between the initial function and the solution.
struct SewingReport {
  double at = 0.0;
  std::vector<double> jumps;     ///< solution side minus history side, index = derivative order
  std::vector<bool> satisfied;   ///< |jump| <= continuity tolerance

  /// Lowest derivative order that jumps, or -1.
  int first_discontinuity() const {
    for (std::size_t j = 0; j < satisfied.size(); ++j)
      if (!satisfied[j]) return static_cast<int>(j);
    return -1;
  }
};

inline SewingReport sewing_check(const FDEProblem& p, const PiecewiseSolution& sol) {
  if (sol.segments.empty()) throw Error(ErrorKind::InvalidArgument, "no solved segment to compare against");
  const auto& first = sol.segments.front().series;
  const auto phi = series_of_known(p.history, p.t0, p.order);
  SewingReport report;
  report.at = p.t0;
  for (int j = 0; j <= p.order && j <= first.order(); ++j) {
    const double jump = derivative_values(first, j) - derivative_values(phi, j);
    report.jumps.push_back(jump);
    report.satisfied.push_back(std::abs(jump) <= p.tol.continuity);
  }
  return report;
}

}  // namespace fdedtm

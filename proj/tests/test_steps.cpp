#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "fdedtm/parser.hpp"
#include "fdedtm/steps.hpp"
#include "oracles.hpp"

using namespace fdedtm;
using Catch::Matchers::WithinAbs;

namespace {

FDEProblem make(int n, const char* rhs, const char* history, double horizon,
                std::optional<std::vector<double>> conditions = std::nullopt) {
  FDEProblem p;
  p.order = n;
  p.rhs = parse(rhs);
  p.history = parse(history);
  p.t0 = 0.0;
  p.horizon = horizon;
  p.conditions = std::move(conditions);
  return p;
}

FDEProblem example1(double horizon = 1.0) {
  return make(2, "t*u'(t-1) - u(t-2) - t^2 - 2*t + 5", "-t^2 - 4*t - 1", horizon, std::vector<double>{-1, -4});
}

FDEProblem example2(double a, double horizon) {
  FDEProblem p;
  p.order = 1;
  p.rhs = divide(unknown(), a) - divide(unknown(0, a), a) + constant(a);
  p.history = pow(time_var(), 2);
  p.horizon = horizon;
  return p;
}

FDEProblem example3(const char* history = "exp(-t)") {
  return make(3, "-u - u(t-0.3) + exp(-t+0.3)", history, 0.3, std::vector<double>{1, -1, 1});
}

FDEProblem example4(double horizon = 1.0) { return make(1, "u(t) + u(t-1) - (1/4)*u'(t-1)", "-t", horizon); }

template <class E>
ErrorKind error_kind(E&& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an fdedtm::Error");
  return ErrorKind::InvalidArgument;
}

void require_coeffs(const TaylorSeries& s, const std::vector<double>& expected, double tol) {
  REQUIRE(s.order() + 1 >= static_cast<int>(expected.size()));
  for (std::size_t k = 0; k < expected.size(); ++k) REQUIRE_THAT(s[k], WithinAbs(expected[k], tol));
}

// Runs the oracle over [a, b] and compares on 50 uniform points.
template <std::size_t Dim>
double rk4_deviation(const PiecewiseSolution& sol, double a, double b, oracle::State<Dim> y0,
                     const std::function<oracle::State<Dim>(double, const oracle::State<Dim>&)>& f) {
  const double h = (b - a) / 10'000.0;
  double worst = 0.0;
  long step = 0;
  oracle::rk4<Dim>(f, a, b, y0, h, [&](double t, const oracle::State<Dim>& y) {
    if (step++ % 200 == 0) worst = std::max(worst, std::abs(sol.evaluate(t) - y[0]));
  });
  return worst;
}

}  // namespace

TEST_CASE("breakpoints", "[steps][lattice]") {
  REQUIRE(breakpoints(example1(1.0)) == std::vector<double>{0, 1});
  REQUIRE(breakpoints(example1(3.0)) == std::vector<double>{0, 1, 2, 3});
  REQUIRE(breakpoints(example3()) == std::vector<double>{0, 0.3});
  REQUIRE(breakpoints(example4(2.5)) == std::vector<double>{0, 1, 2, 2.5});
  REQUIRE(breakpoints(example1(0.0)) == std::vector<double>{0});

  auto tiny = make(1, "u(t-0.01) + u(t-0.0141421356)", "1", 5.0);
  REQUIRE(error_kind([&] { breakpoints(tiny); }) == ErrorKind::LatticeExplosion);
}

TEST_CASE("lattice windows never straddle a breakpoint", "[steps][lattice][property]") {
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> base(0.1, 0.5);
  std::uniform_int_distribution<int> mult(1, 5), count(1, 3);
  std::uniform_real_distribution<double> horizon(0.5, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double unit = base(rng);
    Expression rhs = constant(0.0);
    const int r = count(rng);
    for (int i = 0; i < r; ++i) rhs = rhs + unknown(0, unit * mult(rng));
    FDEProblem p;
    p.order = 1;
    p.rhs = rhs;
    p.history = constant(1.0);
    p.horizon = horizon(rng);
    const auto cls = classify(p.rhs, 1);
    const auto pts = breakpoints(p);
    REQUIRE(pts.front() == 0.0);
    REQUIRE(pts.back() == p.horizon);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double a = pts[i], b = pts[i + 1];
      REQUIRE(b > a);
      for (double tau : cls.delays) {
        if (a - tau < -1e-12) continue;
        for (double x : pts) {
          INFO("window (" << a - tau << ", " << b - tau << ") holds " << x);
          REQUIRE_FALSE((x > a - tau + 1e-9 && x < b - tau - 1e-9));
        }
      }
    }
  }
}

TEST_CASE("reduce_segment binds delayed terms", "[steps][reduce]") {
  PiecewiseSolution empty;
  for (double a : {0.5, 1.0, 2.0}) {
    const auto ctx = reduce_segment(example2(a, a), empty, 0.0, a, 4);
    REQUIRE(ctx.histories.size() == 1);
    require_coeffs(ctx.histories[0].series, {a * a, -2 * a, 1, 0}, 1e-14);
  }

  const auto c4 = reduce_segment(example4(), empty, 0.0, 1.0, 5);
  const auto* slope = c4.find_history(1, 1.0);
  REQUIRE(slope != nullptr);
  require_coeffs(*slope, {-1, 0, 0, 0}, 0.0);

  const auto c3 = reduce_segment(example3(), empty, 0.0, 0.3, 10);
  const auto* shifted = c3.find_history(0, 0.3);
  REQUIRE(shifted != nullptr);
  for (int k = 0; k <= 10; ++k)
    REQUIRE_THAT((*shifted)[k], WithinAbs(std::exp(0.3) * std::pow(-1.0, k) / oracle::fact(k), 1e-14));

  SECTION("windows before the initial interval") {
    const auto p = example2(1.0, 3.0);
    REQUIRE(error_kind([&] { reduce_segment(p, empty, 0.5, 1.5, 4); }) == ErrorKind::HistoryUnderflow);
    REQUIRE(error_kind([&] { reduce_segment(p, empty, -0.5, 0.0, 4); }) == ErrorKind::HistoryUnderflow);
    REQUIRE(error_kind([&] { reduce_segment(p, empty, 1.0, 2.0, 4); }) == ErrorKind::MissingHistory);
  }
}

TEST_CASE("solve_segment recurrences", "[steps][segment]") {
  PiecewiseSolution empty;
  SECTION("first delay example") {
    const auto p = example1();
    const auto s = solve_segment(p, reduce_segment(p, empty, 0, 1, 5), {-1, -4}, 5);
    require_coeffs(s, {-1, -4, 1, -2.0 / 3, -1.0 / 6, 0}, 1e-12);
  }
  SECTION("second delay example") {
    for (double a : {0.5, 1.0, 2.0}) {
      const auto p = example2(a, a);
      const auto s = solve_segment(p, reduce_segment(p, empty, 0, a, 4), {0.0}, 4);
      require_coeffs(s, {0, 0, 1, 0, 0}, 1e-12);
    }
  }
  SECTION("neutral example") {
    const auto p = example4();
    const auto s = solve_segment(p, reduce_segment(p, empty, 0, 1, 5), {0.0}, 5);
    require_coeffs(s, {0, 5.0 / 4, 1.0 / 8, 1.0 / 24, 1.0 / 96, 1.0 / 480}, 1e-12);
  }
  SECTION("seeds survive bit-exactly") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> d(-3, 3);
    const auto p = example3("0");
    for (int trial = 0; trial < 50; ++trial) {
      const std::vector<double> seeds{d(rng), d(rng), d(rng)};
      const auto s = solve_segment(p, reduce_segment(p, empty, 0, 0.3, 8), seeds, 8);
      for (int j = 0; j < 3; ++j) REQUIRE(s[j] * detail::factorial<double>(j) == seeds[j]);
    }
  }
  SECTION("order below n") {
    const auto p = example3();
    REQUIRE(error_kind([&] { solve_segment(p, reduce_segment(p, empty, 0, 0.3, 4), {1, -1, 1}, 2); }) ==
            ErrorKind::InvalidArgument);
  }
}

TEST_CASE("solve", "[steps][solve]") {
  SECTION("third-order example with exponential history") {
    const auto sol = solve(example3(), 10);
    REQUIRE(sol.segments.size() == 1);
    for (int k = 0; k <= 10; ++k)
      REQUIRE_THAT(sol.segments[0].series[k], WithinAbs(std::pow(-1.0, k) / oracle::fact(k), 1e-12));
  }
  SECTION("first delay example with the polynomial solution as history") {
    auto p = example1();
    p.history = parse("-1 + t^2");
    p.conditions = std::vector<double>{-1, 0};
    const auto sol = solve(p, 8);
    require_coeffs(sol.segments[0].series, {-1, 0, 1, 0, 0, 0, 0, 0, 0}, 1e-12);
  }
  SECTION("three steps of the second example") {
    for (double a : {0.5, 1.0, 2.0}) {
      const auto sol = solve(example2(a, 3 * a), 16);
      REQUIRE(sol.segments.size() == 3);
      for (const auto& seg : sol.segments)
        for (int i = 0; i <= 50; ++i) {
          const double t = seg.start + (seg.end - seg.start) * i / 50.0;
          REQUIRE_THAT(sol.evaluate(t), WithinAbs(t * t, 1e-10));
        }
    }
  }
  SECTION("degenerate horizon") {
    const auto sol = solve(example4(0.0));
    REQUIRE(sol.segments.empty());
    REQUIRE(sol.evaluate(-0.5) == 0.5);
    REQUIRE(sol.evaluate(0.0) == 0.0);
  }
  SECTION("evaluation falls back to the initial function before t0") {
    const auto sol = solve(example1());
    REQUIRE(sol.history_start == -2.0);
    REQUIRE(sol.evaluate(-2.0) == 3.0);
    REQUIRE_THROWS_AS(sol.evaluate(-2.5), Error);
    REQUIRE_THROWS_AS(sol.evaluate(1.5), Error);
  }
  SECTION("ill-posed problems") {
    auto p = example1();
    p.conditions = std::vector<double>{0, -4};
    REQUIRE(error_kind([&] { solve(p); }) == ErrorKind::InconsistentConditions);
    p.conditions = std::vector<double>{-1};
    REQUIRE(error_kind([&] { solve(p); }) == ErrorKind::InvalidArgument);
    REQUIRE(error_kind([&] { solve(example1(), 1); }) == ErrorKind::InvalidArgument);
    REQUIRE(error_kind([&] { solve(make(1, "u'(t)", "0", 1.0)); }) == ErrorKind::NotExplicit);
    REQUIRE(error_kind([&] { solve(make(1, "u(t-1)", "u(t)", 1.0)); }) == ErrorKind::NotKnownFunction);
  }
}

TEST_CASE("segments join smoothly", "[steps][continuity]") {
  for (const auto& p : {example1(3.0), example2(0.5, 1.5), example4(3.0)}) {
    const auto sol = solve(p);
    for (std::size_t i = 1; i < sol.segments.size(); ++i) {
      const auto& left = sol.segments[i - 1].series;
      const auto& right = sol.segments[i].series;
      const double b = sol.segments[i].start;
      for (int j = 0; j < p.order; ++j)
        REQUIRE_THAT(derivative_at(left, j, b), WithinAbs(derivative_at(right, j, b), 1e-9));
    }
  }
}

TEST_CASE("residual and polynomial closure", "[steps][property]") {
  for (const auto& p : {example1(2.0), example2(1.0, 3.0), example3(), example3("0.5*t^2 - t + 1"), example4(2.0)}) {
    const int N = 16;
    const auto sol = solve(p, N);
    PiecewiseSolution partial = sol;
    for (std::size_t i = 0; i < sol.segments.size(); ++i) {
      partial.segments.assign(sol.segments.begin(), sol.segments.begin() + static_cast<long>(i));
      const auto& seg = sol.segments[i];
      const auto ctx = reduce_segment(p, partial, seg.start, seg.end, N);
      const auto r = segment_residual(p, ctx, seg.series);
      REQUIRE(static_cast<int>(r.size()) == N - p.order + 1);
      for (double x : r) REQUIRE(std::abs(x) <= 1e-9);
    }
  }
  const auto s1 = solve(example1(), 16).segments[0].series;
  for (int k = 5; k <= 16; ++k) REQUIRE(std::abs(s1[k]) <= 1e-10);
  for (const auto& seg : solve(example2(0.5, 1.5), 16).segments)
    for (int k = 3; k <= 16; ++k) REQUIRE(std::abs(seg.series[k]) <= 1e-10);
}

TEST_CASE("agreement with a Runge-Kutta integration of the reduced equations", "[steps][oracle]") {
  using S2 = oracle::State<2>;
  using S3 = oracle::State<3>;
  using S1 = oracle::State<1>;

  SECTION("first delay example") {
    const auto sol = solve(example1(), 16);
    auto phi = [](double s) { return -s * s - 4 * s - 1; };
    auto dphi = [](double s) { return -2 * s - 4; };
    const double dev = rk4_deviation<2>(sol, 0.0, 1.0, S2{-1, -4}, [&](double t, const S2& y) {
      return S2{y[1], t * dphi(t - 1) - phi(t - 2) - t * t - 2 * t + 5};
    });
    REQUIRE(dev <= 1e-6);
  }
  SECTION("second delay example") {
    for (double a : {0.5, 1.0, 2.0}) {
      const auto sol = solve(example2(a, a), 16);
      const double dev = rk4_deviation<1>(sol, 0.0, a, S1{0.0}, [&](double t, const S1& y) {
        return S1{y[0] / a - (t - a) * (t - a) / a + a};
      });
      REQUIRE(dev <= 1e-6);
    }
  }
  SECTION("third-order example, both histories") {
    const auto exp_sol = solve(example3(), 16);
    const double d1 = rk4_deviation<3>(exp_sol, 0.0, 0.3, S3{1, -1, 1}, [](double t, const S3& y) {
      return S3{y[1], y[2], -y[0] - std::exp(-(t - 0.3)) + std::exp(-t + 0.3)};
    });
    REQUIRE(d1 <= 1e-6);

    const auto poly_sol = solve(example3("0.5*t^2 - t + 1"), 16);
    const double d2 = rk4_deviation<3>(poly_sol, 0.0, 0.3, S3{1, -1, 1}, [](double t, const S3& y) {
      const double s = t - 0.3;
      return S3{y[1], y[2], -y[0] - (0.5 * s * s - s + 1) + std::exp(-t + 0.3)};
    });
    REQUIRE(d2 <= 1e-6);
  }
  SECTION("neutral example over two steps") {
    const auto sol = solve(example4(2.0), 16);
    const double d1 = rk4_deviation<1>(sol, 0.0, 1.0, S1{0.0}, [](double t, const S1& y) {
      return S1{y[0] - (t - 1) + 0.25};
    });
    REQUIRE(d1 <= 1e-6);
    // on [1, 2) the delayed arguments see the first-step solution s - 1/4 + e^s/4
    const double u1 = 1 - 0.25 + std::exp(1.0) / 4;
    const double d2 = rk4_deviation<1>(sol, 1.0, 2.0, S1{u1}, [](double t, const S1& y) {
      const double s = t - 1;
      return S1{y[0] + (s - 0.25 + std::exp(s) / 4) - 0.25 * (1 + std::exp(s) / 4)};
    });
    REQUIRE(d2 <= 1e-6);
  }
}

TEST_CASE("sewing_check", "[steps][sewing]") {
  SECTION("neutral example jumps in the first derivative") {
    const auto p = example4();
    const auto rep = sewing_check(p, solve(p));
    REQUIRE(rep.jumps.size() == 2);
    REQUIRE(rep.satisfied[0]);
    REQUIRE_FALSE(rep.satisfied[1]);
    REQUIRE_THAT(rep.jumps[1], WithinAbs(9.0 / 4, 1e-9));
    REQUIRE(rep.first_discontinuity() == 1);
  }
  SECTION("smooth continuation") {
    const auto p3 = example3();
    const auto r3 = sewing_check(p3, solve(p3, 10));
    REQUIRE(r3.jumps.size() == 4);
    for (double j : r3.jumps) REQUIRE(std::abs(j) <= 1e-9);
    REQUIRE(r3.first_discontinuity() == -1);

    const auto p2 = example2(1.0, 1.0);
    const auto r2 = sewing_check(p2, solve(p2));
    REQUIRE(r2.satisfied[0]);
    REQUIRE(r2.satisfied[1]);
  }
  SECTION("needs a segment") {
    const auto p = example4(0.0);
    REQUIRE(error_kind([&] { sewing_check(p, solve(p)); }) == ErrorKind::InvalidArgument);
  }
}

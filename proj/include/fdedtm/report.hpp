#pragma once

// Evaluation grids, comparison against a reference expression, and the CSV
// form of comparison tables (t, computed, reference, abs_error; 17 significant
// digits so values survive a text round trip).

#include <algorithm>
#include <charconv>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fdedtm/error.hpp"
#include "fdedtm/expression.hpp"

namespace fdedtm {

/// Points a, a+h, a+2h, ... up to b (b included when it is hit within rounding).
inline std::vector<double> make_grid(double a, double b, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid step must be positive");
  std::vector<double> grid;
  if (b < a) return grid;
  const double slack = 1e-9 * h;
  for (long i = 0;; ++i) {
    const double t = a + static_cast<double>(i) * h;
    if (t > b + slack) break;
    grid.push_back(std::min(t, b));
  }
  return grid;
}

/// Parses "a:b:step".
inline std::vector<double> parse_grid(std::string_view spec) {
  double parts[3];
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t stop = i < 2 ? spec.find(':', start) : spec.size();
    if (stop == std::string_view::npos) throw Error(ErrorKind::InvalidArgument, "grid must look like a:b:step");
    const auto field = spec.substr(start, stop - start);
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), parts[i]);
    if (ec != std::errc{} || end != field.data() + field.size())
      throw Error(ErrorKind::InvalidArgument, "bad number '" + std::string(field) + "' in grid");
    start = stop + 1;
  }
  return make_grid(parts[0], parts[1], parts[2]);
}

struct ComparisonRow {
  double t;
  double computed;
  double reference;  ///< NaN without a reference
  double abs_error;  ///< NaN without a reference
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  double max_error = std::numeric_limits<double>::quiet_NaN();
  double max_error_at = std::numeric_limits<double>::quiet_NaN();
};

template <typename F>
concept PointwiseSolution = requires(const F& f, double t) {
  { f(t) } -> std::convertible_to<double>;
};

/// Evaluates `solution` on the (sorted) grid and, if given, the reference.
template <PointwiseSolution F>
ComparisonTable compare(const F& solution, const std::optional<Expression>& reference,
                        std::vector<double> grid) {
  std::sort(grid.begin(), grid.end());
  ComparisonTable table;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const double t : grid) {
    ComparisonRow row{t, solution(t), nan, nan};
    if (reference) {
      row.reference = evaluate(*reference, t);
      row.abs_error = std::abs(row.computed - row.reference);
      if (std::isnan(table.max_error) || row.abs_error > table.max_error) {
        table.max_error = row.abs_error;
        table.max_error_at = t;
      }
    }
    table.rows.push_back(row);
  }
  return table;
}

inline std::string format_g17(double v) {
  char buf[40];
  if (v == 0.0) v = 0.0;  // no "-0"
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const ComparisonTable& table) {
  os << "t,computed,reference,abs_error\n";
  for (const auto& r : table.rows)
    os << format_g17(r.t) << ',' << format_g17(r.computed) << ',' << format_g17(r.reference) << ','
       << format_g17(r.abs_error) << '\n';
}

}  // namespace fdedtm

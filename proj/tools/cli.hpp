#pragma once

// `fdedtm solve <file>` front end. Kept in a header so the tests can drive it
// with string streams.
//
// Exit codes: 0 success, 2 ill-posed or invalid problem, 3 naive-mode system
// inconsistent, 64 usage error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fdedtm/fdedtm.hpp"

namespace fdedtm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIllPosed = 2;
inline constexpr int kExitInconsistent = 3;
inline constexpr int kExitUsage = 64;

struct Options {
  std::string file;
  std::optional<int> order;
  std::optional<std::string> mode;
  std::optional<std::string> eval;
  std::optional<std::string> compare;
  std::string format = "csv";
  std::optional<std::string> out;
  bool coeffs = false;
  bool sewing = false;
};

namespace detail {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string join(std::span<const double> xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += format_g17(xs[i]);
  }
  return s;
}

inline nlohmann::json table_json(const ComparisonTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"t", r.t}, {"computed", r.computed}, {"reference", r.reference}, {"abs_error", r.abs_error}});
  return {{"rows", rows}, {"maxError", table.max_error}, {"maxErrorAt", table.max_error_at}};
}

class Emitter {
 public:
  Emitter(const Options& opt, std::ostream& out, std::ostream& err) : opt_(opt), out_(out), err_(err) {}

  bool json() const { return opt_.format == "json"; }

  /// Human-readable report lines; they go to stderr only when a CSV table owns stdout.
  std::ostream& report(bool table_pending) {
    return !json() && table_pending && !opt_.out ? err_ : out_;
  }

  nlohmann::json& doc() { return doc_; }

  void table(const ComparisonTable& t) {
    if (json()) {
      doc_["table"] = table_json(t);
      return;
    }
    if (opt_.out) {
      std::ofstream f(*opt_.out);
      if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + *opt_.out);
      write_csv(f, t);
    } else {
      write_csv(out_, t);
    }
  }

  void finish() {
    if (!json()) return;
    if (opt_.out) {
      std::ofstream f(*opt_.out);
      if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + *opt_.out);
      f << doc_.dump(2) << '\n';
    } else {
      out_ << doc_.dump(2) << '\n';
    }
  }

 private:
  const Options& opt_;
  std::ostream& out_;
  std::ostream& err_;
  nlohmann::json doc_ = nlohmann::json::object();
};

inline std::optional<ComparisonTable> comparison(const Options& opt, const PointwiseSolution auto& solution,
                                                 double lo, double hi, const std::vector<double>& grid) {
  if (!opt.eval && !opt.compare) return std::nullopt;
  for (double t : grid)
    if (t < lo - 1e-12 || t > hi + 1e-12)
      throw UsageError("evaluation point " + format_g17(t) + " outside [" + format_g17(lo) + ", " +
                       format_g17(hi) + "]");
  std::optional<Expression> ref;
  if (opt.compare) ref = parse(*opt.compare);
  return compare(solution, ref, grid);
}

inline void print_summary(std::ostream& os, const ComparisonTable& t) {
  if (std::isnan(t.max_error)) return;
  os << "max abs error = " << format_g17(t.max_error) << " at t = " << format_g17(t.max_error_at) << '\n';
}

inline int run_steps(const Options& opt, const FDEProblem& p, int N,
                     const std::vector<double>& grid, Emitter& emit) {
  const PiecewiseSolution sol = solve(p, N);
  auto table = comparison(opt, [&](double t) { return sol.evaluate(t); }, sol.history_start, p.horizon, grid);
  std::ostream& rep = emit.report(table.has_value());

  if (emit.json()) {
    emit.doc()["mode"] = "steps";
    emit.doc()["N"] = N;
    emit.doc()["segmentCount"] = sol.segments.size();
  } else {
    rep << "steps: " << sol.segments.size() << " segment(s) on [" << format_g17(p.t0) << ", "
        << format_g17(p.horizon) << "], N = " << N << '\n';
  }

  if (opt.coeffs) {
    nlohmann::json segs = nlohmann::json::array();
    for (std::size_t i = 0; i < sol.segments.size(); ++i) {
      const auto& s = sol.segments[i];
      if (emit.json()) {
        segs.push_back({{"start", s.start}, {"end", s.end}, {"coeffs", std::vector<double>(s.series.coeffs().begin(), s.series.coeffs().end())}});
      } else {
        rep << "segment " << i << " [" << format_g17(s.start) << ", " << format_g17(s.end)
            << "): U = " << join(s.series.coeffs()) << '\n';
      }
    }
    if (emit.json()) emit.doc()["segments"] = segs;
  }

  if (opt.sewing && !sol.segments.empty()) {
    const SewingReport sew = sewing_check(p, sol);
    if (emit.json()) {
      emit.doc()["sewing"] = {{"at", sew.at}, {"jumps", sew.jumps}, {"satisfied", sew.satisfied}};
    } else {
      for (std::size_t j = 0; j < sew.jumps.size(); ++j) {
        rep << "sewing order " << j << ": jump = " << format_g17(sew.jumps[j])
            << (sew.satisfied[j] ? " (continuous)" : " (discontinuous)") << '\n';
        if (!sew.satisfied[j])
          rep << (j == 0 ? "value" : "derivative") << " jump at t=" << format_g17(sew.at) << ", order " << j
              << '\n';
      }
    }
  }

  if (table) {
    if (!emit.json()) print_summary(rep, *table);
    emit.table(*table);
  }
  emit.finish();
  return kExitOk;
}

inline int run_naive(const Options& opt, const ProblemFile& file, const FDEProblem& p, int N,
                     const std::vector<double>& grid, Emitter& emit) {
  const GlobalSystem sys = build_global_system(p, naive_side_conditions(file), N);
  const NaiveReport rep = solve_global(sys);

  std::optional<ComparisonTable> table;
  if (rep.classification != NaiveClass::Inconsistent) {
    const TaylorSeries series(p.t0, rep.solution);
    table = comparison(opt, [&](double t) { return evaluate(series, t); }, -1e300, 1e300, grid);
  }
  std::ostream& os = emit.report(table.has_value());

  if (emit.json()) {
    emit.doc()["mode"] = "naive";
    emit.doc()["N"] = N;
    emit.doc()["classification"] = std::string(to_string(rep.classification));
    emit.doc()["summary"] = rep.summary();
    if (rep.classification == NaiveClass::Inconsistent) {
      emit.doc()["witnessRow"] = rep.witness_row;
      emit.doc()["witnessRhs"] = rep.witness_rhs;
    } else {
      emit.doc()["solution"] = rep.solution;
      emit.doc()["freeColumns"] = rep.free_columns;
      emit.doc()["nullspace"] = rep.nullspace;
    }
  } else {
    os << "naive: N = " << N << ", " << sys.rows() << " equations in " << sys.cols() << " coefficients\n";
    os << rep.summary() << '\n';
    if (opt.coeffs && rep.classification != NaiveClass::Inconsistent) {
      os << (rep.classification == NaiveClass::Unique ? "U = " : "particular U = ") << join(rep.solution) << '\n';
      for (std::size_t i = 0; i < rep.nullspace.size(); ++i)
        os << "null vector for U(" << rep.free_columns[i] << ") = " << join(rep.nullspace[i]) << '\n';
    }
  }

  if (table) {
    if (!emit.json()) print_summary(os, *table);
    emit.table(*table);
  }
  emit.finish();
  return rep.classification == NaiveClass::Inconsistent ? kExitInconsistent : kExitOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Delay and neutral differential equations by the method of steps with differential transforms"};
  app.require_subcommand(1);
  Options opt;
  auto* solve_cmd = app.add_subcommand("solve", "Solve the problem described by a JSON file");
  solve_cmd->add_option("file", opt.file, "Problem file")->required();
  solve_cmd->add_option("--order", opt.order, "Truncation order N (default 16)")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--mode", opt.mode, "steps or naive")->check(CLI::IsMember({"steps", "naive"}));
  solve_cmd->add_option("--eval", opt.eval, "Evaluation grid a:b:step");
  solve_cmd->add_option("--compare", opt.compare, "Reference expression in t");
  solve_cmd->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  solve_cmd->add_option("--out", opt.out, "Write the table (csv) or document (json) here");
  solve_cmd->add_flag("--coeffs", opt.coeffs, "Print per-segment coefficient vectors");
  solve_cmd->add_flag("--sewing", opt.sewing, "Report derivative jumps at t0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  ProblemFile file;
  FDEProblem problem;
  try {
    file = load_problem_file(opt.file);
    if (opt.mode) file.mode = *opt.mode == "naive" ? SolveMode::Naive : SolveMode::Steps;
    problem = to_problem(file);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIllPosed;
  }
  const int N = opt.order.value_or(file.truncation.value_or(kDefaultTruncationOrder));

  std::vector<double> grid;
  try {
    if (opt.eval) {
      grid = parse_grid(*opt.eval);
    } else if (opt.compare && problem.horizon > problem.t0) {
      grid = make_grid(problem.t0, problem.horizon, (problem.horizon - problem.t0) / 20.0);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  detail::Emitter emit(opt, out, err);
  try {
    return file.mode == SolveMode::Naive ? detail::run_naive(opt, file, problem, N, grid, emit)
                                         : detail::run_steps(opt, problem, N, grid, emit);
  } catch (const detail::UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIllPosed;
  }
}

}  // namespace fdedtm::cli

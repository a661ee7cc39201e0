#pragma once

// JSON problem files.
//
//   {
//     "order": 2,
//     "rhs": "t*u'(t-1) - u(t-2) - t^2 - 2*t + 5",
//     "history": "-t^2 - 4*t - 1",
//     "t0": 0, "horizon": 1,
//     "conditions": [-1, -4],                  // optional, u(t0)..u^(n-1)(t0)
//     "mode": "steps",                         // or "naive"
//     "naiveConditions": [                     // optional, naive mode only
//       {"t": 0, "order": 0, "value": -1},
//       {"linear": [0, 1, -2], "value": 0}
//     ],
//     "N": 16                                  // optional truncation order
//   }

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fdedtm/error.hpp"
#include "fdedtm/naive.hpp"
#include "fdedtm/parser.hpp"
#include "fdedtm/steps.hpp"

namespace fdedtm {

enum class SolveMode { Steps, Naive };

struct ProblemFile {
  int order = 1;
  std::string rhs;
  std::string history;
  double t0 = 0.0;
  double horizon = 1.0;
  std::optional<std::vector<double>> conditions;
  SolveMode mode = SolveMode::Steps;
  std::optional<std::vector<SideCondition>> naive_conditions;
  std::optional<int> truncation;
};

namespace detail {

template <typename T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::ProblemFormat, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ProblemFormat, std::string("field '") + key + "': " + e.what());
  }
}

inline SideCondition side_condition_from_json(const nlohmann::json& j) {
  if (j.contains("linear"))
    return LinearCondition{required<std::vector<double>>(j, "linear"), required<double>(j, "value")};
  return PointCondition{required<double>(j, "t"), j.value("order", 0), required<double>(j, "value")};
}

}  // namespace detail

inline ProblemFile problem_file_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ProblemFormat, "problem file must be a JSON object");
  ProblemFile f;
  f.order = detail::required<int>(j, "order");
  f.rhs = detail::required<std::string>(j, "rhs");
  f.history = detail::required<std::string>(j, "history");
  f.t0 = j.contains("t0") ? detail::required<double>(j, "t0") : 0.0;
  f.horizon = detail::required<double>(j, "horizon");
  if (j.contains("conditions")) f.conditions = detail::required<std::vector<double>>(j, "conditions");
  const std::string mode = j.contains("mode") ? detail::required<std::string>(j, "mode") : "steps";
  if (mode == "steps") {
    f.mode = SolveMode::Steps;
  } else if (mode == "naive") {
    f.mode = SolveMode::Naive;
  } else {
    throw Error(ErrorKind::ProblemFormat, "mode must be \"steps\" or \"naive\", got \"" + mode + "\"");
  }
  if (j.contains("naiveConditions")) {
    std::vector<SideCondition> side;
    for (const auto& c : j.at("naiveConditions")) side.push_back(detail::side_condition_from_json(c));
    f.naive_conditions = std::move(side);
  }
  if (j.contains("N")) f.truncation = detail::required<int>(j, "N");
  return f;
}

inline ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ProblemFormat, "cannot open " + path);
  try {
    return problem_file_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ProblemFormat, path + ": " + e.what());
  }
}

inline FDEProblem to_problem(const ProblemFile& f) {
  FDEProblem p;
  p.order = f.order;
  p.rhs = parse(f.rhs);
  p.history = parse(f.history);
  p.t0 = f.t0;
  p.horizon = f.horizon;
  p.conditions = f.conditions;
  return p;
}

/// Side conditions for naive mode: explicit ones, else the point conditions at t0.
inline std::vector<SideCondition> naive_side_conditions(const ProblemFile& f) {
  if (f.naive_conditions) return *f.naive_conditions;
  std::vector<SideCondition> side;
  if (f.conditions)
    for (int j = 0; j < static_cast<int>(f.conditions->size()); ++j)
      side.push_back(PointCondition{f.t0, j, (*f.conditions)[j]});
  return side;
}

}  // namespace fdedtm

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pimpgp/expr.hpp"
#include "pimpgp/rng.hpp"

namespace pimpgp {

enum class ProblemId { Koza1, Nguyen6, Pagie1, Diabetes };

constexpr const char* problem_name(ProblemId id) {
  switch (id) {
    case ProblemId::Koza1: return "koza1";
    case ProblemId::Nguyen6: return "nguyen6";
    case ProblemId::Pagie1: return "pagie1";
    case ProblemId::Diabetes: return "diabetes";
  }
  return "?";
}

// Fitness cases stored column-major: columns[v][c] is variable v in case c.
// Column layout feeds the batch evaluator directly.
struct FitnessCases {
  std::vector<std::vector<double>> columns;
  std::vector<double> targets;

  std::size_t size() const { return targets.size(); }
  std::size_t arity() const { return columns.size(); }

  std::vector<double> row(std::size_t c) const {
    std::vector<double> out(columns.size());
    for (std::size_t v = 0; v < columns.size(); ++v) out[v] = columns[v][c];
    return out;
  }
};

// Mean of squared differences; the fitness measure and also the
// preference-to-candidate distance.  Inputs are protected-finite, so with
// values capped at 1e150 the sum never overflows for any realistic case
// count.
inline double mean_squared_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("mean squared error needs two equal-length non-empty vectors");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.size());
}

// Where a problem's fitness cases come from.
struct SampledUniform {
  std::size_t count = 20;
  double low = -1.0;
  double high = 1.0;
};
struct Grid {
  double low = -5.0;
  double high = 5.0;
  double step = 0.4;
};
struct Dataset {
  std::string path;
};
using CaseSource = std::variant<SampledUniform, Grid, Dataset>;

struct Problem {
  ProblemId id;
  int arity;
  FunctionSet function_set;
  CaseSource case_source;
};

inline const std::vector<Op>& core_operators() {
  static const std::vector<Op> ops = {Op::Add, Op::Sub, Op::Mul, Op::Div,
                                      Op::Sin, Op::Cos, Op::Exp, Op::Log};
  return ops;
}

inline const std::vector<Op>& extended_operators() {
  static const std::vector<Op> ops = {Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Sin,
                                      Op::Cos, Op::Exp, Op::Log, Op::Sqrt, Op::Abs};
  return ops;
}

// Benchmark definitions: Koza-1 and Nguyen-6 sample 20 uniform points from
// [-1,1]; Pagie-1 uses the [-5,5] step-0.4 grid; Diabetes reads a CSV of 442
// rows with 10 features, adds sqrt/abs to the operator set, and enables
// integer constants in [-10,10].
inline Problem make_problem(ProblemId id, std::string dataset_path = {}) {
  switch (id) {
    case ProblemId::Koza1:
      return Problem{id, 1, FunctionSet(core_operators(), 1), SampledUniform{20, -1.0, 1.0}};
    case ProblemId::Nguyen6:
      return Problem{id, 1, FunctionSet(core_operators(), 1), SampledUniform{20, -1.0, 1.0}};
    case ProblemId::Pagie1:
      return Problem{id, 2, FunctionSet(core_operators(), 2), Grid{-5.0, 5.0, 0.4}};
    case ProblemId::Diabetes:
      if (dataset_path.empty())
        throw std::invalid_argument("the diabetes problem needs a dataset path");
      return Problem{id, 10, FunctionSet(extended_operators(), 10, ConstantRange{-10, 10}),
                     Dataset{std::move(dataset_path)}};
  }
  throw std::invalid_argument("unknown problem id");
}

// Closed-form target functions.  The reciprocal terms of Pagie-1 extend
// continuously to 0 at a zero coordinate (x^-4 grows without bound).
inline double objective(ProblemId id, std::span<const double> inputs) {
  switch (id) {
    case ProblemId::Koza1: {
      const double x = inputs[0];
      return x * x * x * x + x * x * x + x * x + x;
    }
    case ProblemId::Nguyen6: {
      const double x = inputs[0];
      return std::sin(x) + std::sin(x + x * x);
    }
    case ProblemId::Pagie1: {
      const auto term = [](double v) {
        return v == 0.0 ? 0.0 : 1.0 / (1.0 + std::pow(v, -4.0));
      };
      return term(inputs[0]) + term(inputs[1]);
    }
    case ProblemId::Diabetes:
      throw std::invalid_argument("the diabetes problem has no closed-form objective");
  }
  throw std::invalid_argument("unknown problem id");
}

inline FitnessCases load_diabetes(const std::string& path);

// Builds the fitness cases for one run.  Sampled and grid sources take their
// targets from the closed-form objective; dataset targets are min-max
// normalized to [0,1] (run metadata records this).
template <RandomSource R>
FitnessCases make_cases(const Problem& problem, R& rng) {
  FitnessCases cases;
  if (const auto* s = std::get_if<SampledUniform>(&problem.case_source)) {
    cases.columns.assign(static_cast<std::size_t>(problem.arity), {});
    for (std::size_t i = 0; i < s->count; ++i)
      for (auto& column : cases.columns)
        column.push_back(s->low + (s->high - s->low) * rng.uniform_real());
  } else if (const auto* g = std::get_if<Grid>(&problem.case_source)) {
    std::vector<double> axis;
    const auto steps = static_cast<std::size_t>(std::llround((g->high - g->low) / g->step));
    for (std::size_t i = 0; i <= steps; ++i) axis.push_back(g->low + static_cast<double>(i) * g->step);
    cases.columns.assign(static_cast<std::size_t>(problem.arity), {});
    // Odometer over arity dimensions; last axis varies fastest.
    std::vector<std::size_t> idx(static_cast<std::size_t>(problem.arity), 0);
    bool done = false;
    while (!done) {
      for (std::size_t v = 0; v < idx.size(); ++v) cases.columns[v].push_back(axis[idx[v]]);
      done = true;
      for (std::size_t v = idx.size(); v-- > 0;) {
        if (++idx[v] <= steps) {
          done = false;
          break;
        }
        idx[v] = 0;
      }
    }
  } else {
    cases = load_diabetes(std::get<Dataset>(problem.case_source).path);
    const auto [lo_it, hi_it] = std::minmax_element(cases.targets.begin(), cases.targets.end());
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi) throw std::runtime_error("dataset targets are constant; cannot normalize");
    for (double& t : cases.targets) t = (t - lo) / (hi - lo);
    return cases;
  }
  const std::size_t n = cases.columns.front().size();
  cases.targets.resize(n);
  std::vector<double> row(static_cast<std::size_t>(problem.arity));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t v = 0; v < row.size(); ++v) row[v] = cases.columns[v][c];
    cases.targets[c] = objective(problem.id, row);
  }
  return cases;
}

namespace detail {

inline bool parse_cell(const std::string& text, double& out) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(end[-1]))) --end;
  if (begin == end) return false;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace detail

// Reads the diabetes CSV: 11 numeric columns (10 features then the target),
// exactly 442 data rows, one optional header line.  Errors name the
// offending row and column.  Targets are returned raw; normalization happens
// in make_cases.
inline FitnessCases load_diabetes(const std::string& path) {
  constexpr std::size_t kFeatures = 10;
  constexpr std::size_t kRows = 442;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  FitnessCases cases;
  cases.columns.assign(kFeatures, {});
  std::string line;
  std::size_t line_no = 0;
  bool saw_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    std::vector<double> values(cells.size());
    bool numeric = true;
    std::size_t bad_column = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!detail::parse_cell(cells[i], values[i])) {
        numeric = false;
        bad_column = i + 1;
        break;
      }
    }
    if (!numeric) {
      // A single leading non-numeric line is the header.
      if (!saw_data && line_no == 1) continue;
      throw std::runtime_error("dataset row " + std::to_string(line_no) + " column " +
                               std::to_string(bad_column) + " is not numeric");
    }
    if (cells.size() != kFeatures + 1)
      throw std::runtime_error("dataset row " + std::to_string(line_no) + " has " +
                               std::to_string(cells.size()) + " columns, expected " +
                               std::to_string(kFeatures + 1));
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]))
        throw std::runtime_error("dataset row " + std::to_string(line_no) + " column " +
                                 std::to_string(i + 1) + " is not finite");
    }
    saw_data = true;
    for (std::size_t v = 0; v < kFeatures; ++v) cases.columns[v].push_back(values[v]);
    cases.targets.push_back(values[kFeatures]);
  }
  if (cases.targets.empty()) throw std::runtime_error("dataset file holds no data rows: " + path);
  if (cases.targets.size() != kRows)
    throw std::runtime_error("dataset has " + std::to_string(cases.targets.size()) +
                             " data rows, expected " + std::to_string(kRows));
  return cases;
}

}  // namespace pimpgp

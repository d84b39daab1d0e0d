#pragma once

// Sparse linear programs and a bounded-variable revised simplex solver.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dbnd {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation : std::uint8_t { kLessEqual, kEqual, kGreaterEqual };

struct LPRow {
  std::vector<std::pair<std::int32_t, double>> terms;  // (variable, coefficient)
  Relation relation = Relation::kEqual;
  double rhs = 0.0;
  std::string name;
};

// min objective . x  subject to rows and lower <= x <= upper.
struct LPModel {
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> names;
  std::vector<LPRow> rows;

  std::int32_t add_variable(double cost, double lo, double hi, std::string name = {});
  void add_row(std::vector<std::pair<std::int32_t, double>> terms, Relation relation, double rhs,
               std::string name = {});
  std::int32_t variable_count() const { return static_cast<std::int32_t>(objective.size()); }
  std::int32_t row_count() const { return static_cast<std::int32_t>(rows.size()); }
  // Throws Error(kInvalidArgument): non-finite data, lo > hi, no finite
  // bound on a variable, or a term naming a missing variable.
  void validate() const;
};

enum class LPStatus : std::uint8_t { kOptimal, kInfeasible, kUnbounded };

const char* to_string(LPStatus status);

struct LPSolution {
  LPStatus status = LPStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::int64_t iterations = 0;
};

struct LPOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::int64_t max_iterations = 0;  // 0: 50 * (rows + columns) + 10000
  std::int32_t refactor_every = 64;
  // Consecutive degenerate pivots after which pricing switches to Bland's rule.
  std::int32_t degenerate_switch = 50;
};

// Throws Error(kSolverFailure) on the iteration limit or a singular basis.
LPSolution solve_lp(const LPModel& model, const LPOptions& options = {});

struct LPViolation {
  double amount = 0.0;
  std::int32_t row = -1;       // -1: a bound
  std::int32_t variable = -1;  // set for bound violations
};

// Largest constraint or bound violation of x, computed directly from the rows.
LPViolation max_violation(const LPModel& model, std::span<const double> x);

double evaluate_objective(const LPModel& model, std::span<const double> x);

// Free-format MPS text.
std::string dump_mps(const LPModel& model, const std::string& name);

}  // namespace dbnd

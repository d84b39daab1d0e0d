#include <algorithm>
#include <cmath>
#include <sstream>

#include "dbnd/error.hpp"
#include "dbnd/lp.hpp"

namespace dbnd {

std::int32_t LPModel::add_variable(double cost, double lo, double hi, std::string name) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  names.push_back(std::move(name));
  return variable_count() - 1;
}

void LPModel::add_row(std::vector<std::pair<std::int32_t, double>> terms, Relation relation, double rhs,
                      std::string name) {
  rows.push_back(LPRow{std::move(terms), relation, rhs, std::move(name)});
}

void LPModel::validate() const {
  const auto n = objective.size();
  require(lower.size() == n && upper.size() == n, ErrorCode::kInvalidArgument, "LP bound arrays size mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    require(std::isfinite(objective[j]), ErrorCode::kInvalidArgument, "non-finite objective coefficient");
    require(!std::isnan(lower[j]) && !std::isnan(upper[j]) && lower[j] <= upper[j], ErrorCode::kInvalidArgument,
            "variable " + std::to_string(j) + " has lower > upper");
    require(std::isfinite(lower[j]) || std::isfinite(upper[j]), ErrorCode::kInvalidArgument,
            "free variables are not supported");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(std::isfinite(rows[i].rhs), ErrorCode::kInvalidArgument, "non-finite right-hand side");
    for (auto [j, a] : rows[i].terms) {
      require(j >= 0 && static_cast<std::size_t>(j) < n, ErrorCode::kInvalidArgument,
              "row " + std::to_string(i) + " names a missing variable");
      require(std::isfinite(a), ErrorCode::kInvalidArgument, "non-finite coefficient");
    }
  }
}

const char* to_string(LPStatus status) {
  switch (status) {
    case LPStatus::kOptimal: return "optimal";
    case LPStatus::kInfeasible: return "infeasible";
    case LPStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

LPViolation max_violation(const LPModel& model, std::span<const double> x) {
  require(x.size() == model.objective.size(), ErrorCode::kInvalidArgument, "assignment size mismatch");
  LPViolation worst;
  auto consider = [&](double amount, std::int32_t row, std::int32_t var) {
    if (amount > worst.amount) worst = {amount, row, var};
  };
  for (std::size_t j = 0; j < x.size(); ++j) {
    consider(model.lower[j] - x[j], -1, static_cast<std::int32_t>(j));
    consider(x[j] - model.upper[j], -1, static_cast<std::int32_t>(j));
  }
  for (std::size_t i = 0; i < model.rows.size(); ++i) {
    const auto& row = model.rows[i];
    double lhs = 0.0;
    for (auto [j, a] : row.terms) lhs += a * x[static_cast<std::size_t>(j)];
    const double diff = lhs - row.rhs;
    double amount = 0.0;
    switch (row.relation) {
      case Relation::kLessEqual: amount = diff; break;
      case Relation::kGreaterEqual: amount = -diff; break;
      case Relation::kEqual: amount = std::abs(diff); break;
    }
    consider(amount, static_cast<std::int32_t>(i), -1);
  }
  return worst;
}

double evaluate_objective(const LPModel& model, std::span<const double> x) {
  double total = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) total += model.objective[j] * x[j];
  return total;
}

std::string dump_mps(const LPModel& model, const std::string& name) {
  auto var = [&](std::size_t j) {
    return j < model.names.size() && !model.names[j].empty() ? model.names[j] : "x" + std::to_string(j);
  };
  auto row_name = [&](std::size_t i) {
    return model.rows[i].name.empty() ? "c" + std::to_string(i) : model.rows[i].name;
  };
  std::vector<std::vector<std::pair<std::size_t, double>>> columns(model.objective.size());
  for (std::size_t i = 0; i < model.rows.size(); ++i)
    for (auto [j, a] : model.rows[i].terms) columns[static_cast<std::size_t>(j)].push_back({i, a});
  std::ostringstream os;
  os.precision(17);
  os << "NAME " << name << "\nROWS\n N obj\n";
  for (std::size_t i = 0; i < model.rows.size(); ++i) {
    const char* kind = model.rows[i].relation == Relation::kLessEqual ? "L"
                       : model.rows[i].relation == Relation::kEqual   ? "E"
                                                                      : "G";
    os << ' ' << kind << ' ' << row_name(i) << '\n';
  }
  os << "COLUMNS\n";
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (model.objective[j] != 0.0) os << ' ' << var(j) << " obj " << model.objective[j] << '\n';
    for (auto [i, a] : columns[j]) os << ' ' << var(j) << ' ' << row_name(i) << ' ' << a << '\n';
  }
  os << "RHS\n";
  for (std::size_t i = 0; i < model.rows.size(); ++i)
    if (model.rows[i].rhs != 0.0) os << " rhs " << row_name(i) << ' ' << model.rows[i].rhs << '\n';
  os << "BOUNDS\n";
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const double lo = model.lower[j], hi = model.upper[j];
    if (lo == hi) {
      os << " FX bnd " << var(j) << ' ' << lo << '\n';
      continue;
    }
    if (std::isinf(lo)) os << " MI bnd " << var(j) << '\n';
    else if (lo != 0.0) os << " LO bnd " << var(j) << ' ' << lo << '\n';
    if (!std::isinf(hi)) os << " UP bnd " << var(j) << ' ' << hi << '\n';
  }
  os << "ENDATA\n";
  return os.str();
}

}  // namespace dbnd

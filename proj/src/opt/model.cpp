#include "restore/opt/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace restore::opt {

int Model::add_variable(double lower, double upper, double cost, VarType type,
                        std::string name) {
  if (!std::isfinite(lower)) {
    throw std::invalid_argument("variable '" + name + "' needs a finite lower bound");
  }
  vars_.push_back(Variable{lower, upper, cost, type, std::move(name)});
  return static_cast<int>(vars_.size()) - 1;
}

void Model::add_row(std::vector<Term> terms, RowSense sense, double rhs,
                    std::string name) {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_variables()) {
      throw std::out_of_range("row '" + name + "' references unknown variable");
    }
  }
  rows_.push_back(Row{std::move(terms), sense, rhs, std::move(name)});
}

bool Model::has_integers() const {
  return std::any_of(vars_.begin(), vars_.end(),
                     [](const Variable& v) { return v.type == VarType::Integer; });
}

double Model::objective_value(std::span<const double> x) const {
  double obj = offset_;
  for (std::size_t j = 0; j < vars_.size(); ++j) obj += vars_[j].cost * x[j];
  return obj;
}

double Model::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max(worst, vars_[j].lower - x[j]);
    if (std::isfinite(vars_[j].upper)) worst = std::max(worst, x[j] - vars_[j].upper);
  }
  for (const auto& row : rows_) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * x[t.var];
    switch (row.sense) {
      case RowSense::LessEqual: worst = std::max(worst, lhs - row.rhs); break;
      case RowSense::GreaterEqual: worst = std::max(worst, row.rhs - lhs); break;
      case RowSense::Equal: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
    }
  }
  return worst;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NodeLimit: return "node_limit";
  }
  return "unknown";
}

double Solution::relative_gap() const {
  if (!std::isfinite(objective) || !std::isfinite(bound)) return kInfinity;
  return std::abs(objective - bound) / std::max(1.0, std::abs(objective));
}

}  // namespace restore::opt

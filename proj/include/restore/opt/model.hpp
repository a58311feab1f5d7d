#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace restore::opt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarType { Continuous, Integer };
enum class RowSense { LessEqual, GreaterEqual, Equal };

struct Term {
  int var;
  double coef;
};

struct Variable {
  double lower = 0.0;
  double upper = kInfinity;
  double cost = 0.0;
  VarType type = VarType::Continuous;
  std::string name;
};

struct Row {
  std::vector<Term> terms;
  RowSense sense = RowSense::Equal;
  double rhs = 0.0;
  std::string name;
};

// Canonical mixed-integer linear program: minimize cost'x + offset subject to
// rows and variable bounds. Every variable needs a finite lower bound.
class Model {
 public:
  int add_variable(double lower, double upper, double cost,
                   VarType type = VarType::Continuous, std::string name = {});
  int add_binary(double cost, std::string name = {}) {
    return add_variable(0.0, 1.0, cost, VarType::Integer, std::move(name));
  }
  void add_row(std::vector<Term> terms, RowSense sense, double rhs,
               std::string name = {});

  void set_cost(int var, double cost) { vars_.at(var).cost = cost; }
  void set_objective_offset(double offset) { offset_ = offset; }
  double objective_offset() const { return offset_; }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }
  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  bool has_integers() const;

  double objective_value(std::span<const double> x) const;
  // Largest absolute violation of any row or bound (integrality excluded).
  double max_violation(std::span<const double> x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  double offset_ = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, NodeLimit };

const char* to_string(SolveStatus status);

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = kInfinity;
  // Best proven lower bound on the optimum (equals objective when optimal).
  double bound = -kInfinity;
  std::vector<double> values;
  std::int64_t nodes = 0;
  std::int64_t iterations = 0;

  bool has_solution() const {
    return status == SolveStatus::Optimal ||
           (status == SolveStatus::NodeLimit && !values.empty());
  }
  double relative_gap() const;
};

struct LpOptions {
  double optimality_tol = 1e-9;
  double feasibility_tol = 1e-7;
  double pivot_tol = 1e-7;
  std::int64_t iteration_limit = 200000;
};

// Solves the LP relaxation with the given bound overrides.
Solution solve_lp(const Model& model, std::span<const double> lower,
                  std::span<const double> upper, const LpOptions& options = {});
Solution solve_lp(const Model& model, const LpOptions& options = {});

struct MilpOptions {
  double relative_gap = 1e-6;
  double absolute_gap = 1e-9;
  double integrality_tol = 1e-6;
  std::int64_t node_limit = 200000;
  LpOptions lp;
};

// Abstract backend. Implementations must be safe to use from several threads
// as long as each call works on its own Model.
class MilpSolver {
 public:
  virtual ~MilpSolver() = default;
  virtual Solution solve(const Model& model) const = 0;
};

// Depth-first branch-and-bound over the dense simplex relaxation.
class BranchAndBoundSolver final : public MilpSolver {
 public:
  explicit BranchAndBoundSolver(MilpOptions options = {}) : options_(options) {}
  Solution solve(const Model& model) const override;
  const MilpOptions& options() const { return options_; }

 private:
  MilpOptions options_;
};

}  // namespace restore::opt

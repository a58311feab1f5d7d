#include <algorithm>
#include <cmath>
#include <vector>

#include "restore/opt/model.hpp"

namespace restore::opt {

namespace {

struct Node {
  std::vector<double> lower;
  std::vector<double> upper;
  double parent_bound;
};

}  // namespace

Solution BranchAndBoundSolver::solve(const Model& model) const {
  const int n = model.num_variables();
  Solution best;
  best.status = SolveStatus::Infeasible;

  Node root{{}, {}, -kInfinity};
  root.lower.reserve(n);
  root.upper.reserve(n);
  for (const auto& v : model.variables()) {
    const bool integer = v.type == VarType::Integer;
    root.lower.push_back(integer ? std::ceil(v.lower - options_.integrality_tol) : v.lower);
    root.upper.push_back(integer && std::isfinite(v.upper)
                             ? std::floor(v.upper + options_.integrality_tol)
                             : v.upper);
  }

  auto cutoff = [&](double incumbent) {
    if (!std::isfinite(incumbent)) return kInfinity;
    return incumbent - std::max(options_.absolute_gap,
                                options_.relative_gap * std::abs(incumbent));
  };

  std::vector<Node> stack;
  stack.push_back(std::move(root));
  std::int64_t nodes = 0;
  std::int64_t iterations = 0;
  bool limit_hit = false;

  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    if (node.parent_bound >= cutoff(best.objective)) continue;
    if (nodes >= options_.node_limit) {
      stack.push_back(std::move(node));
      limit_hit = true;
      break;
    }
    ++nodes;
    Solution lp = solve_lp(model, node.lower, node.upper, options_.lp);
    iterations += lp.iterations;
    if (lp.status == SolveStatus::Infeasible) continue;
    if (lp.status == SolveStatus::Unbounded) {
      best.status = SolveStatus::Unbounded;
      best.nodes = nodes;
      return best;
    }
    if (lp.status != SolveStatus::Optimal) continue;
    if (lp.objective >= cutoff(best.objective)) continue;

    int branch = -1;
    double most_fractional = options_.integrality_tol;
    for (int j = 0; j < n; ++j) {
      if (model.variables()[j].type != VarType::Integer) continue;
      const double v = lp.values[j];
      const double frac = std::abs(v - std::round(v));
      if (frac > most_fractional) {
        most_fractional = frac;
        branch = j;
      }
    }
    if (branch < 0) {
      for (int j = 0; j < n; ++j)
        if (model.variables()[j].type == VarType::Integer) lp.values[j] = std::round(lp.values[j]);
      best.objective = model.objective_value(lp.values);
      best.values = std::move(lp.values);
      best.status = SolveStatus::Optimal;
      continue;
    }

    const double v = lp.values[branch];
    Node down{node.lower, node.upper, lp.objective};
    down.upper[branch] = std::floor(v);
    Node up{std::move(node.lower), std::move(node.upper), lp.objective};
    up.lower[branch] = std::ceil(v);
    // Explore the nearer rounding first.
    if (v - std::floor(v) < 0.5) {
      stack.push_back(std::move(up));
      stack.push_back(std::move(down));
    } else {
      stack.push_back(std::move(down));
      stack.push_back(std::move(up));
    }
  }

  best.nodes = nodes;
  best.iterations = iterations;
  if (limit_hit) {
    double bound = best.objective;
    for (const auto& open : stack) bound = std::min(bound, open.parent_bound);
    best.bound = bound;
    best.status = SolveStatus::NodeLimit;
  } else if (best.status == SolveStatus::Optimal) {
    best.bound = best.objective;
  }
  return best;
}

}  // namespace restore::opt

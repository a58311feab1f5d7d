#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "restore/belief.hpp"
#include "restore/sim.hpp"

namespace restore::plan {

struct TreeConfig {
  int scenarios = 500;
  int depth = 2;
  // Exploration constant; negative means factor * (all-faulty step cost * horizon).
  double exploration = -1.0;
  double exploration_factor = 0.3;
  double k_pw = 2.0;
  double alpha_pw = 0.5;
  std::uint64_t seed = 1;
  int horizon = 0;                // 0: the case horizon
  double deadline_seconds = 0.0;  // 0: unlimited
};

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ActionStat {
  int component = -1;
  double q = 0.0;
  int n = 0;
};

struct PlanResult {
  int crew = -1;
  int target = -1;
  std::vector<ActionStat> root;  // candidate order
  int scenarios_used = 0;
  double exploration = 0.0;
  double seconds = 0.0;
};

// What every rollout shares.
struct PlanContext {
  const CaseModel* c = nullptr;
  const belief::Belief* belief = nullptr;
  const dynamics::WorldView* view = nullptr;
  const belief::ScenarioSet* scenarios = nullptr;
  std::shared_ptr<const flow::FlowEvaluator> rollout_eval;
  std::vector<std::vector<int>> power_routes;  // per crew; empty for gas crews
  std::vector<int> committed;                  // per crew, -1 when free to choose
};

double ucb_score(double q, int n, int parent_visits, double c);
// Index of the chosen entry; entries with n == 0 are taken first in order.
int ucb_select(const std::vector<ActionStat>& stats, int parent_visits, double c);

struct PathEntry {
  ActionStat* stat = nullptr;
  int start = 0;  // step at which the action begins
};
// Incremental-mean update with each entry's cost counted from its own start.
void backpropagate(const std::vector<PathEntry>& path, const std::vector<double>& step_costs,
                   int first_step);

// Rollout rule: best (shed reduction if done) / (work steps it needs), ties to
// the shorter job, then the shorter trip, then the lower id; -1 when nothing is left.
int base_policy_target(const Simulator& s, int crew);
Policy base_policy();

PlanResult plan_action(const PlanContext& ctx, int crew, const TreeConfig& cfg);

// Crews are planned in the given order; each commitment is frozen for the
// crews planned after it. A crew with nothing left to take gets target -1.
std::vector<PlanResult> plan_all_gas_crews(PlanContext ctx, const TreeConfig& cfg,
                                           const std::vector<int>& order);

// Simulator for one scenario with every other crew following its frozen plan.
Simulator scenario_simulator(const PlanContext& ctx, int scenario, int planning_crew, int horizon);

}  // namespace restore::plan

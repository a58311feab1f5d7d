#pragma once

#include <climits>
#include <functional>
#include <memory>
#include <vector>

#include "restore/belief.hpp"
#include "restore/bts.hpp"
#include "restore/sim.hpp"

namespace restore::plan {

// ---------------------------------------------------------------- routing core

// Crews working through jobs from given start states. Each job is done once,
// completing at free_at + max(travel, 1) + duration; the component counts as
// up from that step. Cost is sum over steps [start, horizon) of rate * dt.
struct RouteProblem {
  const CaseModel* c = nullptr;
  int start = 0;
  int horizon = 0;
  std::vector<int> crews;               // crew indices taking part
  std::vector<LocationSlot> position;   // per participating crew
  std::vector<int> free_at;             // per participating crew
  std::vector<int> pinned;              // per participating crew: job in progress or -1
  std::vector<int> jobs;                // components to schedule
  std::vector<int> duration;            // per component
  Topology base;                        // up/down at start; jobs and pinned jobs down
  RateFn rate;
  std::vector<int> rate_breaks;         // steps where rate may change for a fixed topology
  double relative_gap = 1e-6;
  long node_limit = 2'000'000;
};

struct RouteSolution {
  std::vector<std::vector<int>> routes;  // per participating crew, pinned job first
  std::vector<int> completion;           // per component; -1 if not done before the horizon
  double cost = 0.0;
  double bound = 0.0;
  bool optimal = false;
  long nodes = 0;
};

// Depth-first branch and bound over route sequences: the earliest free crew
// takes its next job or stops; the bound lets every remaining job finish at
// its earliest possible step.
RouteSolution solve_routes(const RouteProblem& p);

// Cost of given routes under the problem's rate (no optimization).
double route_cost(const RouteProblem& p, const std::vector<std::vector<int>>& routes,
                  std::vector<int>* completion = nullptr);

// ---------------------------------------------------------------- gas profile

// Gas each generator may draw over time: zero before available_from, then amount.
struct GasProfile {
  std::vector<int> available_from;  // per generator; INT_MAX when never
  std::vector<double> amount;       // per generator

  double at(int g, int t) const { return t >= available_from[g] ? amount[g] : 0.0; }
  std::vector<double> at(int t) const;
  std::vector<int> breaks() const;
};

// Units whose node is reachable now get gas from t; the rest never do.
GasProfile current_gas_profile(const CaseModel& c, const Topology& up, int t);

// Expected step at which each unit's gas node becomes reachable when gas crews
// follow the committed targets and then gas_policy (the base policy if
// empty), averaged over the scenario set and rounded.
GasProfile expected_gas_profile(const PlanContext& ctx, const std::vector<int>& gas_targets,
                                Policy gas_policy = {});

// ---------------------------------------------------------------- schedules

struct Schedule {
  std::vector<int> crews;                // crew indices
  std::vector<std::vector<int>> routes;  // per listed crew
  std::vector<int> completion;           // per component
  double objective = 0.0;
  double bound = 0.0;
  bool optimal = false;
  long nodes = 0;

  // Routes indexed by crew (empty for crews not listed).
  std::vector<std::vector<int>> by_crew(int num_crews) const;
};

struct ScheduleOptions {
  double relative_gap = 1e-6;
  long node_limit = 2'000'000;
  int horizon = 0;  // 0: the case horizon
};

// Power crews from the current view: crews already under way keep their job,
// everything after it is re-optimized against the power-only model.
Schedule rolling_power_schedule(const CaseModel& c, const dynamics::WorldView& v, const GasProfile& gas,
                                const ScheduleOptions& o = {});

// Joint routes for every crew with every pipeline's state known up front:
// intact pipelines need no visit, damaged ones only their repair.
Schedule hindsight_schedule(const CaseModel& c, const GroundTruth& truth,
                            std::shared_ptr<const flow::FlowEvaluator> ev, ScheduleOptions o = {});

// ---------------------------------------------------------------- baselines

class NoCandidate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unresolved pipelines no other crew is on.
std::vector<int> free_pipelines(const CaseModel& c, const dynamics::WorldView& v);

// Nearest free pipeline; ties to the lower id.
int nfh_target(const CaseModel& c, const dynamics::WorldView& v, int crew);
// Most probably damaged free pipeline; ties to the shorter trip, then the lower id.
int pbh_target(const CaseModel& c, const belief::Belief& b, const dynamics::WorldView& v, int crew);

// The same rules inside a simulator, for rollouts of the baselines.
Policy nfh_policy();
Policy pbh_policy(const belief::Belief& b);

}  // namespace restore::plan

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "restore/dynamics.hpp"
#include "restore/flow.hpp"

namespace restore::plan {

// Shed cost rate ($/h) of a topology during step t.
using RateFn = std::function<double(const Topology& up, int t)>;

RateFn constant_rate(std::shared_ptr<const flow::FlowEvaluator> ev);

class Simulator;

// Picks the next component for an idle crew, or -1 to stand down for good.
using Policy = std::function<int(const Simulator&, int crew)>;

struct SimOptions {
  int horizon = 0;
  // Times at which the rate function may change for a fixed topology.
  std::vector<int> rate_breaks;
  // Perfect information: unknown pipelines that are intact need no visit and
  // faulty ones need repair only.
  bool skip_inspection = false;
};

// Completion-event simulator with the same timing rules as dynamics::World:
// a crew that departs at t finishes at t + max(travel, 1) + work, and the
// component is up from that step on.
class Simulator {
 public:
  // `damaged` holds the (scenario) truth per component: down until repaired.
  Simulator(const CaseModel& c, const dynamics::WorldView& v, std::vector<char> damaged,
            RateFn rate, SimOptions options);

  void set_policy(int crew, Policy p) { policy_.at(crew) = std::move(p); }
  // Sends an idle crew to a component.
  void assign(int crew, int component);
  // Advances until `stop_crew` is idle with no decision, or nothing is left to
  // happen before the horizon. Returns true when stopped for the crew.
  bool run(int stop_crew = -1);

  const CaseModel& model() const { return c_; }
  int now() const { return now_; }
  int horizon() const { return opt_.horizon; }
  const Topology& topology() const { return up_; }
  bool damaged(int comp) const { return damaged_[comp] != 0; }
  bool resolved(int comp) const { return resolved_[comp] != 0; }
  bool claimed(int comp) const { return claimed_[comp] != 0; }
  bool idle(int crew) const { return crews_[crew].current < 0; }
  LocationSlot position(int crew) const { return crews_[crew].position; }
  CrewType crew_type(int crew) const { return crews_[crew].type; }
  int num_crews() const { return static_cast<int>(crews_.size()); }
  // Work steps still needed on a component under the scenario.
  int remaining(int comp) const;
  // Steps from the crew's current position until the component would be done.
  int time_to_finish(int crew, int comp) const;
  // Unresolved, unclaimed components a crew of this type may take.
  std::vector<int> open(CrewType type) const;

  double rate_now() const;
  double rate_with(const Topology& t) const { return rate_(t, now_); }
  // Cost over all simulated steps, and over steps >= t.
  double cost() const;
  double cost_from(int t) const;
  const std::vector<double>& step_costs() const { return step_cost_; }
  int start() const { return start_; }
  // Step from which each component is resolved (-1 if not yet).
  const std::vector<int>& completion() const { return completion_; }
  // Components each crew was sent to, in order.
  const std::vector<std::vector<int>>& routes() const { return routes_; }

 private:
  struct Crew {
    CrewType type;
    LocationSlot position;
    int current = -1;
    int free_at = 0;
    bool retired = false;
  };
  void price_until(int t);
  void complete(int crew);

  const CaseModel& c_;
  RateFn rate_;
  SimOptions opt_;
  int start_ = 0;
  int now_ = 0;
  int priced_ = 0;
  std::vector<char> damaged_, resolved_, claimed_;
  std::vector<int> work_;
  std::vector<int> completion_;
  Topology up_;
  std::vector<Crew> crews_;
  std::vector<Policy> policy_;
  std::vector<double> step_cost_;  // index t - start_
  std::vector<std::vector<int>> routes_;
};

// Observable state at episode start.
dynamics::WorldView initial_view(const CaseModel& c);

// Per-component truth for a simulator: lines from the known status, pipelines
// from the given per-pipeline damage (already net of completed repairs).
std::vector<char> component_damage(const CaseModel& c, const dynamics::WorldView& v,
                                   const std::vector<char>& pipe_damaged);

// Replays fixed routes; components already resolved or taken are skipped.
Policy route_policy(std::vector<int> route);

}  // namespace restore::plan

#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "restore/belief.hpp"
#include "restore/case_model.hpp"
#include "restore/flow.hpp"
#include "restore/topology.hpp"

namespace restore::dynamics {

enum class EventKind { FaultDiscovered, RepairComplete, InspectionComplete, ServiceChange };

const char* to_string(EventKind kind);

struct EventRecord {
  int step = 0;
  EventKind kind = EventKind::RepairComplete;
  int component = -1;
  int crew = -1;
  bool faulty = false;            // inspection result
  std::vector<int> unserved;      // service change: signalling nodes
  std::vector<int> served;
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

// Per crew: component to head for next, or -1 to hold. Entries for crews that
// are already busy must be -1 or repeat their current commitment.
struct DispatchAction {
  std::vector<int> target;
};

class InvalidAction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Steps of work a crew spends on a component: inspection plus repair when the
// component turns out faulty.
int occupancy(const CaseModel& c, int component, bool faulty);

// Travel charged for a move: arrival needs at least one step.
int move_steps(const CaseModel& c, LocationSlot from, int component);

// Single-crew update of (alpha, u, tau). `next_travel` seeds tau when the crew
// completes its work this step and already has its next target.
CrewState transition_crew(const CrewState& crew, int assignment, bool work_done,
                          int next_travel = 0);

// What a planner may see: no hidden truth.
struct WorldView {
  int t = 0;
  std::vector<Condition> condition;  // per component, as currently known
  std::vector<int> work;             // accumulated work per component
  std::vector<CrewState> crews;
  double cost = 0.0;                 // cumulative, $
  belief::ServiceChange reading;     // latest signal reading

  bool resolved(int component) const { return condition[component] == Condition::Operational; }
  // Components still needing a visit by a crew of the given type.
  std::vector<int> open_components(const CaseModel& c, CrewType type) const;
  // Components claimed by a crew (working on or heading to).
  std::vector<char> claimed() const;
};

struct StepRecord {
  int t = 0;
  double rate = 0.0;            // shed $/h at the start of the step
  double cost = 0.0;            // rate * dt
  double served_fraction = 1.0; // value-weighted
  std::vector<EventRecord> events;
};

class World {
 public:
  // `truth` may be null for interactive sessions; unknown outcomes are then
  // supplied with reveal() and unrevealed pipelines are priced as down.
  World(std::shared_ptr<const CaseModel> c, std::shared_ptr<const flow::FlowEvaluator> flow,
        const GroundTruth* truth);

  const CaseModel& model() const { return *case_; }
  WorldView view() const;
  int t() const { return t_; }
  double cost() const { return cost_; }
  bool interactive() const { return interactive_; }

  // Advances one step under the action.
  StepRecord step(const DispatchAction& action);

  // Every component operational as far as the operator knows.
  bool finished() const;

  void reveal(int pipe, bool faulty);
  const belief::ServiceChange& initial_reading() const { return initial_reading_; }
  Topology true_topology() const;

 private:
  belief::ServiceChange read() const;

  std::shared_ptr<const CaseModel> case_;
  std::shared_ptr<const flow::FlowEvaluator> flow_;
  bool interactive_ = false;
  std::vector<std::optional<bool>> faulty_;  // per component, hidden
  std::vector<char> up_;                     // per component, physical
  std::vector<Condition> known_;
  std::vector<int> work_;
  std::vector<CrewState> crews_;
  int t_ = 0;
  double cost_ = 0.0;
  belief::ServiceChange reading_;
  belief::ServiceChange initial_reading_;
};

// Value-weighted served fraction: 1 - shed rate / full-outage shed rate.
double served_fraction(const CaseModel& c, double shed_rate);

double episode_cost(const std::vector<StepRecord>& steps);

}  // namespace restore::dynamics

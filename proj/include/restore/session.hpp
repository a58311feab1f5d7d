#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "restore/belief.hpp"
#include "restore/bts.hpp"
#include "restore/dispatch.hpp"
#include "restore/dynamics.hpp"

namespace restore::run {

enum class GasPolicy { Bts, Nfh, Pbh, Hindsight };
std::string to_string(GasPolicy p);
GasPolicy parse_gas_policy(const std::string& s);

struct SessionConfig {
  std::string case_path;
  std::string truth_path;  // empty with interactive
  bool interactive = false;
  GasPolicy gas_policy = GasPolicy::Bts;
  int scenarios = 500;
  int depth = 2;
  double exploration = -1.0;  // negative: scaled default
  double exploration_factor = 0.3;
  std::uint64_t seed = 1;
  double deadline_seconds = 0.0;
  bool reverse_gas_order = false;
  long node_limit = 5'000;
  int segments = 8;  // Weymouth segments in the ground-truth flow model

  void validate() const;
};

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Plan computed at one decision point.
struct Decision {
  int t = 0;
  std::vector<int> targets;  // per crew, -1 for no new assignment
  std::vector<plan::PlanResult> gas_plans;
  std::vector<std::vector<int>> power_routes;  // per crew
  double power_objective = 0.0;
  bool power_optimal = true;
  std::vector<int> gas_available_from;  // per generator
  double seconds = 0.0;
};

// One episode: the world, the belief and the planners, stepped one period at
// a time. Re-planning happens at t = 0 and after any step that produced events.
class Session {
 public:
  Session(SessionConfig cfg, std::shared_ptr<const CaseModel> c, std::optional<GroundTruth> truth);
  explicit Session(SessionConfig cfg);
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const SessionConfig& config() const { return cfg_; }
  const CaseModel& model() const { return *case_; }
  std::shared_ptr<const CaseModel> shared_case() const { return case_; }
  const dynamics::World& world() const { return *world_; }
  const belief::Belief& belief() const { return belief_; }
  int t() const { return world_->t(); }
  // All components operational, or the horizon reached.
  bool done() const;

  // Current recommendation; planned on demand.
  const Decision& plan();
  bool needs_plan() const { return replan_; }
  // Fixes the next step's action: the recommendation with overrides (crew id -> component id).
  void dispatch(const std::vector<std::pair<std::string, std::string>>& overrides = {});
  // Operator-reported observations.
  void observe_inspection(const std::string& pipe, bool faulty);
  void observe_service(const std::vector<std::string>& unserved, const std::vector<std::string>& served);
  // Steps the world; each step uses the dispatched action or the recommendation.
  void advance(int steps = 1);
  // Runs to completion.
  void run();

  const std::vector<dynamics::StepRecord>& steps() const { return steps_; }
  const std::vector<Decision>& decisions() const { return decisions_; }
  double total_cost() const { return world_->cost(); }
  std::vector<double> decision_seconds() const;

  // JSON-Lines log: config, decisions and steps, and a summary trailer. No
  // timing fields, so a replay reproduces it byte for byte.
  std::string log_jsonl() const;
  // Timing sidecar.
  std::string timing_json() const;

 private:
  void init();
  void absorb(const std::vector<dynamics::EventRecord>& events);
  void apply(const belief::BeliefEvent& e);
  Decision make_decision();
  std::vector<int> gas_targets(const dynamics::WorldView& v, const std::vector<int>& idle_gas,
                               const plan::Schedule& power, const belief::ScenarioSet* scenarios,
                               std::vector<plan::PlanResult>& plans);
  std::uint64_t decision_seed() const;

  SessionConfig cfg_;
  std::shared_ptr<const CaseModel> case_;
  std::optional<GroundTruth> truth_;
  std::shared_ptr<const flow::FlowEvaluator> exact_;
  std::shared_ptr<const flow::FlowEvaluator> rollout_;
  std::unique_ptr<dynamics::World> world_;
  belief::Belief belief_;
  bool replan_ = true;
  std::optional<Decision> current_;
  std::optional<dynamics::DispatchAction> pending_;
  std::vector<Decision> decisions_;
  std::vector<dynamics::StepRecord> steps_;
  std::optional<plan::Schedule> hindsight_;
  std::vector<std::string> log_;  // decision and step lines in order
};

struct EpisodeResult {
  double total_cost = 0.0;
  int steps = 0;
  bool finished = false;
  std::vector<double> curve;  // served fraction per step
  std::vector<double> decision_seconds;
  std::string log;
};

EpisodeResult run_episode(const SessionConfig& cfg);

// Cost of the perfect-information schedule evaluated with the exact flow model.
plan::Schedule hindsight_for(const SessionConfig& cfg);

}  // namespace restore::run

#pragma once

#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

#include "restore/case_model.hpp"

namespace restore::belief {

// Poisson repair-rate model: 1 - exp(-0.00003 * pgv^2.25 * length).
double prior_failure_prob(double pgv, double length_km);

enum class Knowledge : signed char { Unknown = -1, Intact = 0, Faulty = 1 };

struct Inspection {
  int pipe = -1;
  bool faulty = false;
};

// A reading of the outage signals. `repaired` lists the pipelines that were
// already back in service when the reading was taken.
struct ServiceObservation {
  std::vector<int> unserved;  // gas node indices
  std::vector<int> served;
  std::vector<Inspection> inspections;
  std::vector<int> repaired;
};

enum class InferenceMode { Exact, MonteCarlo };

struct InferenceOptions {
  InferenceMode mode = InferenceMode::Exact;
  int samples = 100000;  // accepted Monte Carlo samples; draws capped at 100x
  std::uint64_t seed = 1;
  bool condition_on_served = true;
  int max_exact_unknowns = 20;
};

class BeliefError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Immutable snapshot; updates return a new Belief.
struct Belief {
  std::vector<double> prior;         // per pipeline
  std::vector<Knowledge> known;      // per pipeline, pinned once set
  std::vector<char> repaired;        // per pipeline
  // Per pipeline: probability the pipeline is damaged and not yet repaired.
  std::vector<double> phi;
  std::vector<ServiceObservation> record;
  InferenceOptions options;

  // Pipelines whose damage state is still uncertain.
  std::vector<int> free_pipes() const;
  bool needs_work(int pipe) const { return phi[pipe] > 1e-12; }
};

// Damage pattern (per pipeline, true = damaged at episode start) agrees with
// every pinned value and every recorded reading.
bool consistent(const CaseModel& c, const Belief& b, const std::vector<char>& damaged);

// Prior belief: case priors, confirmed statuses pinned, empty record.
Belief initial_belief(const CaseModel& c, InferenceOptions options = {});

// Posterior of the case's unknown pipelines given one reading.
Belief posterior_infer(const CaseModel& c, const std::vector<double>& priors,
                       const ServiceObservation& obs, InferenceOptions options = {});

// Recomputes phi from priors, pins and the record.
Belief reinfer(const CaseModel& c, Belief b);

struct RepairDone {
  int pipe = -1;
};
struct ServiceChange {
  std::vector<int> unserved;
  std::vector<int> served;
};
using BeliefEvent = std::variant<Inspection, RepairDone, ServiceChange>;

Belief apply_observation(const CaseModel& c, const Belief& b, const BeliefEvent& event);

struct ScenarioSet {
  std::uint64_t seed = 0;
  // Per scenario, per pipeline: still damaged now.
  std::vector<std::vector<char>> damaged;
  std::int64_t draws = 0;

  int size() const { return static_cast<int>(damaged.size()); }
};

ScenarioSet sample_scenarios(const CaseModel& c, const Belief& b, int count, std::uint64_t seed);

// Signal reading of a topology: nodes with an outage signal split by gas
// reachability from the wells.
ServiceChange read_signals(const CaseModel& c, const std::vector<char>& node_served);

// Uniform double in [0,1) from a counter; stateless so draws can be split.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

}  // namespace restore::belief

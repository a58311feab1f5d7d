#pragma once

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "restore/case_model.hpp"
#include "restore/opt/model.hpp"
#include "restore/topology.hpp"

namespace restore::flow {

struct FlowSnapshot {
  std::vector<double> p_served;   // per bus
  std::vector<double> q_served;   // per bus
  std::vector<double> line_p;     // per line, from -> to
  std::vector<double> line_q;
  std::vector<double> p_gen;      // per generator
  std::vector<double> q_gen;
  std::vector<double> gas_draw;   // per generator (zero when not gas fired)
  std::vector<double> gas_served; // per gas node
  std::vector<double> well_out;   // per well
  std::vector<double> pipe_flow;  // per pipeline, from -> to
  std::vector<double> compressor_load;  // per pipeline, zero for passive
  // Filled by exact_flow only.
  std::vector<double> voltage;
  std::vector<double> pressure;
  double power_shed = 0.0;  // C^P, $/h
  double gas_shed = 0.0;    // C^W, $/h

  double shed_rate() const { return power_shed + gas_shed; }
};

struct IslandPartition {
  std::vector<int> bus_island;
  std::vector<int> node_island;
  std::vector<std::vector<int>> power_islands;
  std::vector<std::vector<int>> gas_islands;
  std::vector<std::vector<int>> island_generators;  // per power island
  std::vector<std::vector<int>> island_wells;       // per gas island
};

IslandPartition detect_islands(const CaseModel& c, const Topology& up);

// Gas nodes reachable from a well along up pipelines in flow direction.
std::vector<char> gas_reachable(const CaseModel& c, const Topology& up);

// Shed cost rates recomputed from served quantities.
void price(const CaseModel& c, FlowSnapshot& s);
double period_cost(const CaseModel& c, const FlowSnapshot& s);

FlowSnapshot vpfa_evaluate(const CaseModel& c, const Topology& up);

struct ExactFlowOptions {
  int segments = 8;
  opt::MilpOptions milp;
};

class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

FlowSnapshot exact_flow(const CaseModel& c, const Topology& up,
                        const ExactFlowOptions& options = {});

// Largest output of a unit given the gas it can draw (its own p_max if not
// gas fired).
double gas_unit_cap(const Generator& g, double gas_available);

// Power network alone, compressor loads left out. gas_available holds the gas
// each generator may draw (ignored for units that are not gas fired). Only the
// power fields, voltage and power_shed are filled.
FlowSnapshot power_flow(const CaseModel& c, const Topology& up, const std::vector<double>& gas_available,
                        const opt::LpOptions& lp = {});

// Power shed rate of power_flow, memoized per island so topologies that share
// islands share solves. Not thread safe.
class PowerShedCache {
 public:
  explicit PowerShedCache(const CaseModel& c, opt::LpOptions lp = {}) : c_(&c), lp_(lp) {}
  double rate(const Topology& up, const std::vector<double>& gas_available);
  std::size_t size() const { return memo_.size(); }

 private:
  struct VecHash {
    std::size_t operator()(const std::vector<double>& v) const;
  };
  const CaseModel* c_;
  opt::LpOptions lp_;
  std::unordered_map<std::vector<double>, double, VecHash> memo_;
};

// Evaluators bind a case and price topologies. Implementations are safe to
// call concurrently.
class FlowEvaluator {
 public:
  virtual ~FlowEvaluator() = default;
  virtual FlowSnapshot evaluate(const Topology& up) const = 0;
  // Shed cost rate in $/h.
  virtual double rate(const Topology& up) const { return evaluate(up).shed_rate(); }
  const CaseModel& model() const { return *case_; }
  std::shared_ptr<const CaseModel> shared_case() const { return case_; }

 protected:
  explicit FlowEvaluator(std::shared_ptr<const CaseModel> c) : case_(std::move(c)) {}
  std::shared_ptr<const CaseModel> case_;
};

class VpfaEvaluator final : public FlowEvaluator {
 public:
  explicit VpfaEvaluator(std::shared_ptr<const CaseModel> c) : FlowEvaluator(std::move(c)) {}
  FlowSnapshot evaluate(const Topology& up) const override { return vpfa_evaluate(*case_, up); }
};

class ExactEvaluator final : public FlowEvaluator {
 public:
  explicit ExactEvaluator(std::shared_ptr<const CaseModel> c, ExactFlowOptions o = {})
      : FlowEvaluator(std::move(c)), options_(o) {}
  FlowSnapshot evaluate(const Topology& up) const override {
    return exact_flow(*case_, up, options_);
  }

 private:
  ExactFlowOptions options_;
};

// Memoizes another evaluator by topology.
class CachedEvaluator final : public FlowEvaluator {
 public:
  explicit CachedEvaluator(std::shared_ptr<const FlowEvaluator> inner)
      : FlowEvaluator(inner->shared_case()), inner_(std::move(inner)) {}
  FlowSnapshot evaluate(const Topology& up) const override;
  double rate(const Topology& up) const override;
  std::size_t size() const;

 private:
  std::shared_ptr<const FlowEvaluator> inner_;
  mutable std::mutex mu_;
  mutable std::unordered_map<Topology, std::shared_ptr<const FlowSnapshot>, TopologyHash> memo_;
};

}  // namespace restore::flow

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace restore {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// ---------------------------------------------------------------- power side

struct Bus {
  std::string id;
  double p_demand = 0.0;  // MW
  double q_demand = 0.0;  // MVAr
  double shed_cost = 0.0; // $/MWh
  double v_min = 0.9;
  double v_max = 1.1;
  Point pos;
  friend bool operator==(const Bus&, const Bus&) = default;
};

struct Line {
  std::string id;
  int from = -1;
  int to = -1;
  double resistance = 0.0;
  double reactance = 0.0;
  double p_max = 0.0;
  double q_max = 0.0;
  std::optional<Point> pos;
  friend bool operator==(const Line&, const Line&) = default;
};

// Gas-fired unit: gas draw = beta * p + gamma.
struct GasLink {
  int node = -1;
  double beta = 1.0;
  double gamma = 0.0;
  friend bool operator==(const GasLink&, const GasLink&) = default;
};

struct Generator {
  std::string id;
  int bus = -1;
  double p_max = 0.0;
  double q_max = 0.0;
  std::optional<GasLink> gas;
  friend bool operator==(const Generator&, const Generator&) = default;
};

struct PowerNetwork {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  double base_voltage = 1.0;
  friend bool operator==(const PowerNetwork&, const PowerNetwork&) = default;
};

// ------------------------------------------------------------------ gas side

// Which outage reports a gas node produces for the operator.
enum class OutageSignal { None, UserReport, GeneratorFlag };

struct GasNode {
  std::string id;
  double demand = 0.0;
  double shed_cost = 0.0;
  double pressure_min = 1.0;
  double pressure_max = 2.0;
  Point pos;
  OutageSignal signal = OutageSignal::None;
  friend bool operator==(const GasNode&, const GasNode&) = default;
};

struct Well {
  std::string id;
  int node = -1;
  double w_min = 0.0;
  double w_max = 0.0;
  friend bool operator==(const Well&, const Well&) = default;
};

enum class PipeClass { Passive, Compressor };

struct Pipeline {
  std::string id;
  int from = -1;
  int to = -1;
  double length_km = 1.0;
  PipeClass kind = PipeClass::Passive;
  double weymouth = 0.0;         // passive only
  double f_max = 0.0;
  double ratio = 1.0;            // compressor only
  double compressor_rate = 0.0;  // MW per unit flow, compressor only
  int host_bus = -1;             // compressor only
  std::optional<Point> pos;
  friend bool operator==(const Pipeline&, const Pipeline&) = default;
};

struct GasNetwork {
  std::vector<GasNode> nodes;
  std::vector<Well> wells;
  std::vector<Pipeline> pipelines;
  friend bool operator==(const GasNetwork&, const GasNetwork&) = default;
};

// ------------------------------------------------------------------- status

enum class Condition { Operational, Faulty, Unknown };

struct ComponentStatus {
  Condition condition = Condition::Operational;
  int repair_steps = 0;   // work needed once a fault is confirmed
  int inspect_steps = 1;  // Unknown only
  std::optional<double> prior;  // Unknown only; derived from hazard when absent
  friend bool operator==(const ComponentStatus&, const ComponentStatus&) = default;
};

enum class CrewType { Power, Gas };

struct CrewSpec {
  std::string id;
  CrewType type = CrewType::Gas;
  Point depot;
  friend bool operator==(const CrewSpec&, const CrewSpec&) = default;
};

// Slot in the travel table: components first, then one depot per crew.
using LocationSlot = int;

// Crew state (alpha, u, tau) plus bookkeeping.
struct CrewState {
  int crew = -1;
  CrewType type = CrewType::Gas;
  int target = -1;        // alpha: component being worked on, -1 when none
  bool working = false;   // u
  int travel = 0;         // tau: remaining travel steps
  int destination = -1;   // committed next target while en route, -1 when idle
  int work = 0;           // accumulated work on the current target
  LocationSlot position = -1;
  friend bool operator==(const CrewState&, const CrewState&) = default;

  bool idle() const { return !working && destination < 0; }
};

// ------------------------------------------------------------------- travel

class TravelModel {
 public:
  enum class Mode { Euclidean, Matrix };

  TravelModel() = default;
  static TravelModel euclidean(double speed);
  static TravelModel matrix(std::vector<std::string> labels,
                            std::vector<std::vector<int>> steps);

  Mode mode() const { return mode_; }
  double speed() const { return speed_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::vector<int>>& table() const { return table_; }

  // Resolves Euclidean distances for the given labelled points. In matrix
  // mode this only checks which labels the table covers.
  void bind(const std::vector<std::pair<std::string, Point>>& points);

  int slot(std::string_view label) const;
  int steps(std::string_view from, std::string_view to) const;
  int steps_between(int from_slot, int to_slot) const;
  bool bound() const { return bound_; }

 private:
  Mode mode_ = Mode::Euclidean;
  double speed_ = 1.0;
  std::vector<std::string> labels_;
  std::vector<std::vector<int>> table_;
  std::unordered_map<std::string, int> index_;
  bool bound_ = false;
};

// Whole-step travel time for a Euclidean distance.
int euclidean_steps(Point a, Point b, double speed);

int travel_time(const TravelModel& model, std::string_view from, std::string_view to);

// ---------------------------------------------------------------- the case

struct TimeConfig {
  double dt_hours = 0.5;
  int horizon_steps = 1;
  friend bool operator==(const TimeConfig&, const TimeConfig&) = default;
};

class CaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Violation {
  std::string component;
  std::string rule;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct CaseModel {
  std::string name;
  PowerNetwork power;
  GasNetwork gas;
  // Indexed by component: lines [0, L), then pipelines [L, L + P).
  std::vector<ComponentStatus> status;
  std::vector<CrewSpec> crews;
  TravelModel travel;
  TimeConfig time;
  double pgv = 0.0;
  std::map<std::string, std::string> notes;

  int num_lines() const { return static_cast<int>(power.lines.size()); }
  int num_pipes() const { return static_cast<int>(gas.pipelines.size()); }
  int num_components() const { return num_lines() + num_pipes(); }
  bool is_line(int c) const { return c < num_lines(); }
  bool is_pipe(int c) const { return c >= num_lines() && c < num_components(); }
  int pipe_component(int pipe) const { return num_lines() + pipe; }
  int pipe_of(int c) const { return c - num_lines(); }
  const std::string& component_id(int c) const;
  int component_index(std::string_view id) const;  // -1 when absent
  int crew_index(std::string_view id) const;       // -1 when absent
  int bus_index(std::string_view id) const;
  int node_index(std::string_view id) const;

  LocationSlot component_slot(int c) const { return c; }
  LocationSlot depot_slot(int crew) const { return num_components() + crew; }
  std::string slot_label(LocationSlot s) const;
  Point component_position(int c) const;
  int travel_steps(LocationSlot from, LocationSlot to) const;

  // Components that are not operational at episode start.
  std::vector<int> damaged_components() const;
  double prior_of(int c) const;
  std::vector<CrewState> initial_crews() const;

  // Rebuilds lookup tables and binds the travel model; call after edits.
  void finalize();

 private:
  std::unordered_map<std::string, int> component_lookup_;
  std::unordered_map<std::string, int> crew_lookup_;
  std::unordered_map<std::string, int> bus_lookup_;
  std::unordered_map<std::string, int> node_lookup_;
  std::vector<int> slot_to_travel_;
};

std::vector<Violation> validate_case(const CaseModel& c);

// Parses and validates a case document; throws CaseError on failure.
CaseModel load_case(const std::string& path);
CaseModel parse_case(const std::string& json_text);
std::string serialize_case(const CaseModel& c);

// Ground truth for Unknown pipelines: true = faulty.
using GroundTruth = std::map<std::string, bool>;
GroundTruth load_truth(const std::string& path);
GroundTruth parse_truth(const std::string& json_text);

}  // namespace restore

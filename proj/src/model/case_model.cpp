#include "restore/case_model.hpp"

#include <cmath>
#include <set>

namespace restore {

TravelModel TravelModel::euclidean(double speed) {
  TravelModel m;
  m.mode_ = Mode::Euclidean;
  m.speed_ = speed;
  return m;
}

TravelModel TravelModel::matrix(std::vector<std::string> labels,
                                std::vector<std::vector<int>> steps) {
  if (steps.size() != labels.size()) throw CaseError("travel matrix size mismatch");
  for (const auto& row : steps)
    if (row.size() != labels.size()) throw CaseError("travel matrix size mismatch");
  TravelModel m;
  m.mode_ = Mode::Matrix;
  m.labels_ = std::move(labels);
  m.table_ = std::move(steps);
  for (std::size_t i = 0; i < m.labels_.size(); ++i)
    m.index_[m.labels_[i]] = static_cast<int>(i);
  m.bound_ = true;
  return m;
}

int euclidean_steps(Point a, Point b, double speed) {
  const double d = std::hypot(a.x - b.x, a.y - b.y);
  if (d == 0.0) return 0;
  return static_cast<int>(std::ceil(d / speed - 1e-9));
}

void TravelModel::bind(const std::vector<std::pair<std::string, Point>>& points) {
  if (mode_ == Mode::Matrix) return;
  labels_.clear();
  index_.clear();
  const std::size_t n = points.size();
  table_.assign(n, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    labels_.push_back(points[i].first);
    index_[points[i].first] = static_cast<int>(i);
    for (std::size_t j = 0; j < i; ++j) {
      const int s = euclidean_steps(points[i].second, points[j].second, speed_);
      table_[i][j] = table_[j][i] = s;
    }
  }
  bound_ = true;
}

int TravelModel::slot(std::string_view label) const {
  auto it = index_.find(std::string(label));
  return it == index_.end() ? -1 : it->second;
}

int TravelModel::steps_between(int a, int b) const {
  if (a < 0 || b < 0 || a >= static_cast<int>(table_.size()) ||
      b >= static_cast<int>(table_.size()))
    throw CaseError("unknown location");
  return table_[a][b];
}

int TravelModel::steps(std::string_view from, std::string_view to) const {
  const int a = slot(from);
  const int b = slot(to);
  if (a < 0) throw CaseError("unknown location '" + std::string(from) + "'");
  if (b < 0) throw CaseError("unknown location '" + std::string(to) + "'");
  if (a == b) return 0;
  return table_[a][b];
}

int travel_time(const TravelModel& model, std::string_view from, std::string_view to) {
  return model.steps(from, to);
}

// ------------------------------------------------------------------ CaseModel

const std::string& CaseModel::component_id(int c) const {
  if (is_line(c)) return power.lines.at(c).id;
  return gas.pipelines.at(pipe_of(c)).id;
}

int CaseModel::component_index(std::string_view id) const {
  auto it = component_lookup_.find(std::string(id));
  return it == component_lookup_.end() ? -1 : it->second;
}

int CaseModel::crew_index(std::string_view id) const {
  auto it = crew_lookup_.find(std::string(id));
  return it == crew_lookup_.end() ? -1 : it->second;
}

int CaseModel::bus_index(std::string_view id) const {
  auto it = bus_lookup_.find(std::string(id));
  return it == bus_lookup_.end() ? -1 : it->second;
}

int CaseModel::node_index(std::string_view id) const {
  auto it = node_lookup_.find(std::string(id));
  return it == node_lookup_.end() ? -1 : it->second;
}

std::string CaseModel::slot_label(LocationSlot s) const {
  if (s >= 0 && s < num_components()) return component_id(s);
  const int crew = s - num_components();
  if (crew >= 0 && crew < static_cast<int>(crews.size())) return "depot:" + crews[crew].id;
  throw CaseError("unknown location slot " + std::to_string(s));
}

Point CaseModel::component_position(int c) const {
  auto mid = [](Point a, Point b) { return Point{(a.x + b.x) / 2, (a.y + b.y) / 2}; };
  if (is_line(c)) {
    const Line& l = power.lines[c];
    if (l.pos) return *l.pos;
    if (l.from < 0 || l.to < 0) return {};
    return mid(power.buses[l.from].pos, power.buses[l.to].pos);
  }
  const Pipeline& p = gas.pipelines[pipe_of(c)];
  if (p.pos) return *p.pos;
  if (p.from < 0 || p.to < 0) return {};
  return mid(gas.nodes[p.from].pos, gas.nodes[p.to].pos);
}

int CaseModel::travel_steps(LocationSlot from, LocationSlot to) const {
  if (from == to) return 0;
  const int a = slot_to_travel_.at(from);
  const int b = slot_to_travel_.at(to);
  if (a < 0 || b < 0) throw CaseError("no travel entry between " + slot_label(from) + " and " + slot_label(to));
  return travel.steps_between(a, b);
}

std::vector<int> CaseModel::damaged_components() const {
  std::vector<int> out;
  for (int c = 0; c < num_components(); ++c)
    if (status[c].condition != Condition::Operational) out.push_back(c);
  return out;
}

double CaseModel::prior_of(int c) const {
  const ComponentStatus& s = status.at(c);
  switch (s.condition) {
    case Condition::Operational: return 0.0;
    case Condition::Faulty: return 1.0;
    case Condition::Unknown: break;
  }
  if (s.prior) return *s.prior;
  const double len = is_pipe(c) ? gas.pipelines[pipe_of(c)].length_km : 1.0;
  return 1.0 - std::exp(-0.00003 * std::pow(pgv, 2.25) * len);
}

std::vector<CrewState> CaseModel::initial_crews() const {
  std::vector<CrewState> out;
  for (int k = 0; k < static_cast<int>(crews.size()); ++k) {
    CrewState s;
    s.crew = k;
    s.type = crews[k].type;
    s.position = depot_slot(k);
    out.push_back(s);
  }
  return out;
}

void CaseModel::finalize() {
  component_lookup_.clear();
  crew_lookup_.clear();
  bus_lookup_.clear();
  node_lookup_.clear();
  for (int c = 0; c < num_components(); ++c) component_lookup_.emplace(component_id(c), c);
  for (int k = 0; k < static_cast<int>(crews.size()); ++k) crew_lookup_.emplace(crews[k].id, k);
  for (int b = 0; b < static_cast<int>(power.buses.size()); ++b)
    bus_lookup_.emplace(power.buses[b].id, b);
  for (int n = 0; n < static_cast<int>(gas.nodes.size()); ++n)
    node_lookup_.emplace(gas.nodes[n].id, n);
  if (status.size() < static_cast<std::size_t>(num_components()))
    status.resize(num_components());

  const int slots = num_components() + static_cast<int>(crews.size());
  if (travel.mode() == TravelModel::Mode::Euclidean) {
    std::vector<std::pair<std::string, Point>> pts;
    pts.reserve(slots);
    for (int c = 0; c < num_components(); ++c) pts.emplace_back(component_id(c), component_position(c));
    for (int k = 0; k < static_cast<int>(crews.size()); ++k)
      pts.emplace_back("depot:" + crews[k].id, crews[k].depot);
    travel.bind(pts);
  }
  slot_to_travel_.assign(slots, -1);
  for (int s = 0; s < slots; ++s) slot_to_travel_[s] = travel.slot(slot_label(s));
}

// ----------------------------------------------------------------- validation

std::vector<Violation> validate_case(const CaseModel& c) {
  std::vector<Violation> out;
  auto add = [&](const std::string& who, const char* rule) { out.push_back({who, rule}); };

  std::set<std::string> seen;
  auto unique = [&](const std::string& id) {
    if (!seen.insert(id).second) add(id, "duplicate id");
  };

  const int nb = static_cast<int>(c.power.buses.size());
  const int nn = static_cast<int>(c.gas.nodes.size());
  for (const auto& b : c.power.buses) {
    unique(b.id);
    if (b.p_demand < 0 || b.q_demand < 0 || b.shed_cost < 0) add(b.id, "negative value");
    if (!(b.v_min < b.v_max)) add(b.id, "voltage bounds");
  }
  if (!(c.power.base_voltage > 0)) add("power", "nonpositive base voltage");
  for (const auto& l : c.power.lines) {
    unique(l.id);
    if (l.from < 0 || l.from >= nb || l.to < 0 || l.to >= nb) add(l.id, "unknown endpoint");
    else if (l.from == l.to) add(l.id, "self loop");
    if (l.p_max < 0 || l.q_max < 0 || l.resistance < 0 || l.reactance < 0)
      add(l.id, "negative value");
  }
  for (const auto& g : c.power.generators) {
    unique(g.id);
    if (g.bus < 0 || g.bus >= nb) add(g.id, "unknown bus");
    if (g.p_max < 0 || g.q_max < 0) add(g.id, "negative value");
    if (g.gas) {
      if (g.gas->node < 0 || g.gas->node >= nn) add(g.id, "unknown gas node");
      if (!(g.gas->beta > 0) || g.gas->gamma < 0) add(g.id, "conversion coefficients");
    }
  }
  for (const auto& n : c.gas.nodes) {
    unique(n.id);
    if (n.demand < 0 || n.shed_cost < 0) add(n.id, "negative value");
    if (!(n.pressure_min > 0) || n.pressure_min > n.pressure_max) add(n.id, "pressure bounds");
  }
  for (const auto& w : c.gas.wells) {
    unique(w.id);
    if (w.node < 0 || w.node >= nn) add(w.id, "unknown gas node");
    if (w.w_min < 0 || w.w_min > w.w_max) add(w.id, "well bounds");
  }
  for (const auto& p : c.gas.pipelines) {
    unique(p.id);
    if (p.from < 0 || p.from >= nn || p.to < 0 || p.to >= nn) add(p.id, "unknown endpoint");
    else if (p.from == p.to) add(p.id, "self loop");
    if (!(p.f_max > 0)) add(p.id, "nonpositive capacity");
    if (!(p.length_km > 0)) add(p.id, "nonpositive length");
    if (p.kind == PipeClass::Passive) {
      if (!(p.weymouth > 0)) add(p.id, "nonpositive weymouth coefficient");
    } else {
      if (p.ratio < 1.0) add(p.id, "compression ratio below one");
      if (p.compressor_rate < 0) add(p.id, "negative value");
      if (p.host_bus < 0 || p.host_bus >= nb) add(p.id, "unknown host bus");
    }
  }

  std::set<std::string> crew_ids;
  for (const auto& k : c.crews)
    if (!crew_ids.insert(k.id).second) add(k.id, "duplicate id");

  if (c.status.size() != static_cast<std::size_t>(c.num_components()))
    add("status", "status size mismatch");
  for (int i = 0; i < c.num_components() && i < static_cast<int>(c.status.size()); ++i) {
    const auto& s = c.status[i];
    const std::string& id = c.component_id(i);
    if (s.condition == Condition::Operational) continue;
    if (s.condition == Condition::Unknown && c.is_line(i))
      add(id, "power faults must be identified");
    if (s.repair_steps < 1) add(id, "repair duration below one");
    if (s.condition == Condition::Unknown) {
      if (s.inspect_steps < 1) add(id, "inspection duration below one");
      if (s.prior && !(*s.prior >= 0.0 && *s.prior <= 1.0)) add(id, "prior outside [0,1]");
    }
  }

  if (c.time.horizon_steps < 1) add("time", "horizon below one");
  if (!(c.time.dt_hours > 0)) add("time", "nonpositive time step");
  if (c.pgv < 0) add("hazard", "negative value");

  if (c.travel.mode() == TravelModel::Mode::Euclidean) {
    if (!(c.travel.speed() > 0)) add("travel", "nonpositive speed");
  } else {
    const auto& t = c.travel.table();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i][i] != 0) add(c.travel.labels()[i], "travel diagonal");
      for (std::size_t j = 0; j < t.size(); ++j) {
        if (t[i][j] < 0) add(c.travel.labels()[i], "negative travel time");
        if (t[i][j] != t[j][i]) add(c.travel.labels()[i], "asymmetric travel time");
      }
    }
    auto covered = [&](const std::string& label) { return c.travel.slot(label) >= 0; };
    for (const auto& k : c.crews)
      if (!covered("depot:" + k.id)) add(k.id, "unreachable depot");
    for (int i = 0; i < c.num_components() && i < static_cast<int>(c.status.size()); ++i) {
      if (c.status[i].condition == Condition::Operational) continue;
      if (!covered(c.component_id(i))) add(c.component_id(i), "unreachable fault");
    }
  }

  bool gas_crew = false, power_crew = false;
  for (const auto& k : c.crews) (k.type == CrewType::Gas ? gas_crew : power_crew) = true;
  for (int i = 0; i < c.num_components() && i < static_cast<int>(c.status.size()); ++i) {
    if (c.status[i].condition == Condition::Operational) continue;
    if (!(c.is_line(i) ? power_crew : gas_crew)) add(c.component_id(i), "no crew of matching type");
  }
  return out;
}

}  // namespace restore

#include <algorithm>

#include "restore/dynamics.hpp"

namespace restore::dynamics {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::FaultDiscovered: return "fault-discovered";
    case EventKind::RepairComplete: return "repair-complete";
    case EventKind::InspectionComplete: return "inspection-complete";
    case EventKind::ServiceChange: return "service-change";
  }
  return "?";
}

int occupancy(const CaseModel& c, int component, bool faulty) {
  const ComponentStatus& s = c.status.at(component);
  switch (s.condition) {
    case Condition::Operational: return 0;
    case Condition::Faulty: return s.repair_steps;
    case Condition::Unknown: return s.inspect_steps + (faulty ? s.repair_steps : 0);
  }
  return 0;
}

int move_steps(const CaseModel& c, LocationSlot from, int component) {
  return std::max(1, c.travel_steps(from, c.component_slot(component)));
}

CrewState transition_crew(const CrewState& crew, int assignment, bool work_done, int next_travel) {
  CrewState s = crew;
  if (s.working) {
    if (!work_done) return s;
    s.working = false;
    s.target = -1;
    s.work = 0;
    if (assignment >= 0) {
      s.destination = assignment;
      s.travel = std::max(1, next_travel);
    }
    return s;
  }
  if (s.destination < 0) {
    if (assignment >= 0) {
      s.destination = assignment;
      s.travel = std::max(1, next_travel);
    }
    return s;
  }
  s.travel = std::max(0, s.travel - 1);
  if (s.travel == 0) {
    s.target = s.destination;
    s.destination = -1;
    s.working = true;
    s.position = s.target;
  }
  return s;
}

std::vector<int> WorldView::open_components(const CaseModel& c, CrewType type) const {
  std::vector<int> out;
  for (int i = 0; i < c.num_components(); ++i) {
    if (condition[i] == Condition::Operational) continue;
    if ((type == CrewType::Power) == c.is_line(i)) out.push_back(i);
  }
  return out;
}

std::vector<char> WorldView::claimed() const {
  std::vector<char> out(condition.size(), 0);
  for (const auto& k : crews) {
    if (k.working && k.target >= 0) out[k.target] = 1;
    if (k.destination >= 0) out[k.destination] = 1;
  }
  return out;
}

World::World(std::shared_ptr<const CaseModel> c, std::shared_ptr<const flow::FlowEvaluator> flow,
             const GroundTruth* truth)
    : case_(std::move(c)), flow_(std::move(flow)), interactive_(truth == nullptr) {
  const CaseModel& m = *case_;
  const int n = m.num_components();
  faulty_.resize(n);
  up_.resize(n);
  known_.resize(n);
  work_.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    known_[i] = m.status[i].condition;
    switch (known_[i]) {
      case Condition::Operational: faulty_[i] = false; break;
      case Condition::Faulty: faulty_[i] = true; break;
      case Condition::Unknown:
        if (truth) {
          auto it = truth->find(m.component_id(i));
          if (it == truth->end())
            throw CaseError("truth is missing unknown pipeline '" + m.component_id(i) + "'");
          faulty_[i] = it->second;
        }
        break;
    }
    up_[i] = faulty_[i].has_value() && !*faulty_[i];
  }
  crews_ = m.initial_crews();
  if (!interactive_) reading_ = read();
  initial_reading_ = reading_;
}

Topology World::true_topology() const {
  Topology t(case_->num_components());
  for (int i = 0; i < case_->num_components(); ++i) t.set(i, up_[i]);
  return t;
}

belief::ServiceChange World::read() const {
  return belief::read_signals(*case_, flow::gas_reachable(*case_, true_topology()));
}

WorldView World::view() const {
  WorldView v;
  v.t = t_;
  v.condition = known_;
  v.work = work_;
  v.crews = crews_;
  v.cost = cost_;
  v.reading = reading_;
  return v;
}

bool World::finished() const {
  return std::all_of(known_.begin(), known_.end(),
                     [](Condition k) { return k == Condition::Operational; });
}

void World::reveal(int pipe, bool faulty) {
  const int comp = case_->pipe_component(pipe);
  if (faulty_[comp] && *faulty_[comp] != faulty)
    throw InvalidAction("pipeline " + case_->component_id(comp) + " outcome already fixed");
  faulty_[comp] = faulty;
  if (known_[comp] != Condition::Faulty || !faulty) up_[comp] = !faulty;
}

StepRecord World::step(const DispatchAction& action) {
  const CaseModel& m = *case_;
  StepRecord rec;
  rec.t = t_;

  std::vector<char> claimed = view().claimed();
  for (int k = 0; k < static_cast<int>(crews_.size()); ++k) {
    const int a = k < static_cast<int>(action.target.size()) ? action.target[k] : -1;
    if (a < 0) continue;
    CrewState& crew = crews_[k];
    const std::string who = m.crews[k].id;
    if (!crew.idle()) {
      if (a == crew.target || a == crew.destination) continue;
      throw InvalidAction(who + " is busy and cannot be redirected");
    }
    if (a >= m.num_components()) throw InvalidAction(who + ": no such component");
    if ((crew.type == CrewType::Power) != m.is_line(a))
      throw InvalidAction(who + " cannot work on " + m.component_id(a));
    if (known_[a] == Condition::Operational)
      throw InvalidAction(m.component_id(a) + " is already operational");
    if (claimed[a]) throw InvalidAction(m.component_id(a) + " is already claimed by another crew");
    claimed[a] = 1;
    crew = transition_crew(crew, a, false, move_steps(m, crew.position, a));
  }

  rec.rate = flow_->rate(true_topology());
  rec.cost = rec.rate * m.time.dt_hours;
  rec.served_fraction = served_fraction(m, rec.rate);
  cost_ += rec.cost;

  std::vector<EventRecord> events;
  for (int k = 0; k < static_cast<int>(crews_.size()); ++k) {
    CrewState& crew = crews_[k];
    if (!crew.working) {
      if (crew.destination >= 0) crew = transition_crew(crew, -1, false);
      continue;
    }
    const int comp = crew.target;
    const int w = ++work_[comp];
    crew.work = w;
    const ComponentStatus& st = m.status[comp];
    bool done = false;
    if (known_[comp] == Condition::Unknown) {
      if (w < st.inspect_steps) continue;
      if (!faulty_[comp]) {
        // Waiting for the operator to report the outcome.
        --work_[comp];
        crew.work = work_[comp];
        continue;
      }
      const bool bad = *faulty_[comp];
      events.push_back({t_, EventKind::InspectionComplete, comp, k, bad, {}, {}});
      if (bad) {
        known_[comp] = Condition::Faulty;
        events.push_back({t_, EventKind::FaultDiscovered, comp, k, true, {}, {}});
      } else {
        known_[comp] = Condition::Operational;
        up_[comp] = 1;
        done = true;
      }
    }
    if (!done && known_[comp] == Condition::Faulty && w >= occupancy(m, comp, true)) {
      known_[comp] = Condition::Operational;
      up_[comp] = 1;
      events.push_back({t_, EventKind::RepairComplete, comp, k, false, {}, {}});
      done = true;
    }
    if (done) crew = transition_crew(crew, -1, true);
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.component < b.component; });

  if (!interactive_) {
    belief::ServiceChange now = read();
    if (now.unserved != reading_.unserved || now.served != reading_.served) {
      events.push_back({t_, EventKind::ServiceChange, -1, -1, false, now.unserved, now.served});
      reading_ = std::move(now);
    }
  }
  rec.events = std::move(events);
  ++t_;
  return rec;
}

double served_fraction(const CaseModel& c, double shed_rate) {
  double full = 0.0;
  for (const auto& b : c.power.buses) full += b.shed_cost * b.p_demand;
  for (const auto& n : c.gas.nodes) full += n.shed_cost * n.demand;
  if (full <= 0.0) return 1.0;
  return std::clamp(1.0 - shed_rate / full, 0.0, 1.0);
}

double episode_cost(const std::vector<StepRecord>& steps) {
  double total = 0.0;
  for (const auto& s : steps) total += s.cost;
  return total;
}

}  // namespace restore::dynamics

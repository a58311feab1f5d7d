#include "restore/sim.hpp"

#include <algorithm>

namespace restore::plan {

RateFn constant_rate(std::shared_ptr<const flow::FlowEvaluator> ev) {
  return [ev = std::move(ev)](const Topology& up, int) { return ev->rate(up); };
}

Simulator::Simulator(const CaseModel& c, const dynamics::WorldView& v, std::vector<char> damaged,
                     RateFn rate, SimOptions options)
    : c_(c), rate_(std::move(rate)), opt_(std::move(options)), start_(v.t), now_(v.t), priced_(v.t),
      damaged_(std::move(damaged)) {
  const int n = c.num_components();
  if (opt_.horizon <= 0) opt_.horizon = c.time.horizon_steps;
  resolved_.assign(n, 0);
  claimed_.assign(n, 0);
  completion_.assign(n, -1);
  work_ = v.work;
  up_ = Topology(n);
  for (int i = 0; i < n; ++i) {
    resolved_[i] = v.condition[i] == Condition::Operational;
    if (opt_.skip_inspection && v.condition[i] == Condition::Unknown && !damaged_[i]) resolved_[i] = 1;
    if (resolved_[i]) completion_[i] = start_;
    up_.set(i, !damaged_[i]);
  }
  step_cost_.assign(std::max(0, opt_.horizon - start_), 0.0);
  policy_.resize(v.crews.size());
  routes_.resize(v.crews.size());
  for (const auto& k : v.crews) {
    Crew s{k.type, k.position};
    s.free_at = now_;
    if (k.working && k.target >= 0) {
      s.current = k.target;
      s.free_at = now_ + remaining(k.target);
    } else if (k.destination >= 0) {
      s.current = k.destination;
      s.free_at = now_ + k.travel + remaining(k.destination);
    }
    if (s.current >= 0) {
      claimed_[s.current] = 1;
      routes_[crews_.size()].push_back(s.current);
    }
    crews_.push_back(s);
  }
}

int Simulator::remaining(int comp) const {
  if (resolved_[comp]) return 0;
  const ComponentStatus& st = c_.status[comp];
  int need = 0;
  switch (st.condition) {
    case Condition::Operational: need = 0; break;
    case Condition::Faulty: need = st.repair_steps; break;
    case Condition::Unknown:
      need = (opt_.skip_inspection ? 0 : st.inspect_steps) + (damaged_[comp] ? st.repair_steps : 0);
      break;
  }
  return std::max(0, need - work_[comp]);
}

int Simulator::time_to_finish(int crew, int comp) const {
  return dynamics::move_steps(c_, crews_[crew].position, comp) + remaining(comp);
}

std::vector<int> Simulator::open(CrewType type) const {
  std::vector<int> out;
  for (int i = 0; i < c_.num_components(); ++i)
    if (!resolved_[i] && !claimed_[i] && (type == CrewType::Power) == c_.is_line(i)) out.push_back(i);
  return out;
}

void Simulator::assign(int crew, int component) {
  Crew& k = crews_.at(crew);
  k.current = component;
  k.free_at = now_ + dynamics::move_steps(c_, k.position, component) + remaining(component);
  claimed_[component] = 1;
  routes_[crew].push_back(component);
}

void Simulator::complete(int crew) {
  Crew& k = crews_[crew];
  const int j = k.current;
  resolved_[j] = 1;
  damaged_[j] = 0;
  up_.set(j, true);
  completion_[j] = k.free_at;
  claimed_[j] = 0;
  k.position = c_.component_slot(j);
  k.current = -1;
}

double Simulator::rate_now() const { return rate_(up_, now_); }

void Simulator::price_until(int t) {
  t = std::min(t, opt_.horizon);
  if (priced_ >= t) return;
  const double dt = c_.time.dt_hours;
  double r = rate_(up_, priced_);
  for (int s = priced_; s < t; ++s) {
    if (s != priced_ && std::binary_search(opt_.rate_breaks.begin(), opt_.rate_breaks.end(), s))
      r = rate_(up_, s);
    step_cost_[s - start_] = r * dt;
  }
  priced_ = t;
}

bool Simulator::run(int stop_crew) {
  for (;;) {
    for (int k = 0; k < num_crews(); ++k) {
      Crew& crew = crews_[k];
      if (k == stop_crew || crew.current >= 0 || crew.retired) continue;
      const int target = policy_[k] ? policy_[k](*this, k) : -1;
      if (target < 0) crew.retired = true;
      else assign(k, target);
    }
    if (stop_crew >= 0 && crews_[stop_crew].current < 0 && !crews_[stop_crew].retired) return true;

    int next = -1;
    for (const auto& k : crews_)
      if (k.current >= 0 && (next < 0 || k.free_at < next)) next = k.free_at;
    if (next < 0 || next >= opt_.horizon) {
      price_until(opt_.horizon);
      return false;
    }
    price_until(next);
    now_ = next;
    std::vector<std::pair<int, int>> done;
    for (int k = 0; k < num_crews(); ++k)
      if (crews_[k].current >= 0 && crews_[k].free_at == next) done.emplace_back(crews_[k].current, k);
    std::sort(done.begin(), done.end());
    for (auto [comp, k] : done) complete(k);
  }
}

double Simulator::cost() const { return cost_from(start_); }

double Simulator::cost_from(int t) const {
  double total = 0.0;
  for (int s = std::max(t, start_); s < priced_; ++s) total += step_cost_[s - start_];
  return total;
}

dynamics::WorldView initial_view(const CaseModel& c) {
  dynamics::WorldView v;
  v.t = 0;
  v.condition.resize(c.num_components());
  for (int i = 0; i < c.num_components(); ++i) v.condition[i] = c.status[i].condition;
  v.work.assign(c.num_components(), 0);
  v.crews = c.initial_crews();
  return v;
}

std::vector<char> component_damage(const CaseModel& c, const dynamics::WorldView& v,
                                   const std::vector<char>& pipe_damaged) {
  std::vector<char> d(c.num_components(), 0);
  for (int i = 0; i < c.num_lines(); ++i) d[i] = v.condition[i] == Condition::Faulty;
  for (int p = 0; p < c.num_pipes(); ++p) d[c.pipe_component(p)] = pipe_damaged.at(p);
  return d;
}

Policy route_policy(std::vector<int> route) {
  return [route = std::move(route)](const Simulator& s, int) {
    for (int j : route)
      if (!s.resolved(j) && !s.claimed(j)) return j;
    return -1;
  };
}

}  // namespace restore::plan

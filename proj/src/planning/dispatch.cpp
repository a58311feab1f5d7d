#include <algorithm>
#include <cmath>

#include "restore/dispatch.hpp"

namespace restore::plan {

std::vector<double> GasProfile::at(int t) const {
  std::vector<double> out(amount.size());
  for (std::size_t g = 0; g < amount.size(); ++g) out[g] = at(static_cast<int>(g), t);
  return out;
}

std::vector<int> GasProfile::breaks() const {
  std::vector<int> out;
  for (int t : available_from)
    if (t != INT_MAX) out.push_back(t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

GasProfile empty_profile(const CaseModel& c) {
  GasProfile p;
  p.available_from.assign(c.power.generators.size(), INT_MAX);
  p.amount.assign(c.power.generators.size(), 0.0);
  for (std::size_t g = 0; g < c.power.generators.size(); ++g) {
    const Generator& gen = c.power.generators[g];
    if (gen.gas) p.amount[g] = gen.gas->beta * gen.p_max + gen.gas->gamma;
  }
  return p;
}

Topology view_topology(const CaseModel& c, const dynamics::WorldView& v) {
  Topology up(c.num_components());
  for (int i = 0; i < c.num_components(); ++i) up.set(i, v.condition[i] == Condition::Operational);
  return up;
}

// Steps of work left on a component assuming it is damaged.
int work_left(const CaseModel& c, const dynamics::WorldView& v, int comp) {
  const ComponentStatus& st = c.status[comp];
  int need = st.repair_steps;
  if (v.condition[comp] == Condition::Unknown) need += st.inspect_steps;
  return std::max(0, need - v.work[comp]);
}

Schedule to_schedule(const RouteProblem& p, const RouteSolution& s) {
  Schedule out;
  out.crews = p.crews;
  out.routes = s.routes;
  out.completion = s.completion;
  out.objective = s.cost;
  out.bound = s.bound;
  out.optimal = s.optimal;
  out.nodes = s.nodes;
  return out;
}

}  // namespace

std::vector<std::vector<int>> Schedule::by_crew(int num_crews) const {
  std::vector<std::vector<int>> out(num_crews);
  for (std::size_t i = 0; i < crews.size(); ++i) out.at(crews[i]) = routes[i];
  return out;
}

GasProfile current_gas_profile(const CaseModel& c, const Topology& up, int t) {
  GasProfile p = empty_profile(c);
  const std::vector<char> reach = flow::gas_reachable(c, up);
  for (std::size_t g = 0; g < c.power.generators.size(); ++g) {
    const Generator& gen = c.power.generators[g];
    if (gen.gas && reach[gen.gas->node]) p.available_from[g] = t;
  }
  return p;
}

GasProfile expected_gas_profile(const PlanContext& ctx, const std::vector<int>& gas_targets,
                                Policy gas_policy) {
  const CaseModel& c = *ctx.c;
  const int horizon = c.time.horizon_steps;
  const int t0 = ctx.view->t;
  const int nn = static_cast<int>(c.gas.nodes.size());
  PlanContext run = ctx;
  run.committed = gas_targets;
  run.committed.resize(c.crews.size(), -1);
  std::vector<double> total(nn, 0.0);
  const int count = ctx.scenarios->size();
  for (int s = 0; s < count; ++s) {
    Simulator sim = scenario_simulator(run, s, -1, horizon);
    if (gas_policy)
      for (int k = 0; k < sim.num_crews(); ++k)
        if (c.crews[k].type == CrewType::Gas) sim.set_policy(k, gas_policy);
    const std::vector<char> damage =
        component_damage(c, *ctx.view, ctx.scenarios->damaged[s]);
    sim.run();
    // Pipeline up-times in this scenario, then first reachable step per node.
    std::vector<std::pair<int, int>> ups;
    Topology up(c.num_components());
    for (int i = 0; i < c.num_components(); ++i) up.set(i, !damage[i]);
    for (int p = 0; p < c.num_pipes(); ++p) {
      const int comp = c.pipe_component(p);
      if (damage[comp] && sim.completion()[comp] >= 0) ups.emplace_back(sim.completion()[comp], comp);
    }
    std::sort(ups.begin(), ups.end());
    std::vector<int> first(nn, horizon);
    auto mark = [&](int t) {
      const auto reach = flow::gas_reachable(c, up);
      for (int j = 0; j < nn; ++j)
        if (reach[j] && first[j] > t) first[j] = t;
    };
    mark(t0);
    for (std::size_t i = 0; i < ups.size();) {
      const int t = ups[i].first;
      while (i < ups.size() && ups[i].first == t) up.set(ups[i++].second, true);
      mark(t);
    }
    for (int j = 0; j < nn; ++j) total[j] += first[j];
  }
  GasProfile p = empty_profile(c);
  for (std::size_t g = 0; g < c.power.generators.size(); ++g) {
    const Generator& gen = c.power.generators[g];
    if (!gen.gas) continue;
    const int t = static_cast<int>(std::lround(total[gen.gas->node] / std::max(1, count)));
    p.available_from[g] = t >= horizon ? INT_MAX : std::max(t, t0);
  }
  return p;
}

Schedule rolling_power_schedule(const CaseModel& c, const dynamics::WorldView& v, const GasProfile& gas,
                                const ScheduleOptions& o) {
  RouteProblem p;
  p.c = &c;
  p.start = v.t;
  p.horizon = o.horizon > 0 ? o.horizon : c.time.horizon_steps;
  p.relative_gap = o.relative_gap;
  p.node_limit = o.node_limit;
  p.base = view_topology(c, v);
  std::vector<char> taken(c.num_components(), 0);
  for (std::size_t k = 0; k < c.crews.size(); ++k) {
    if (c.crews[k].type != CrewType::Power) continue;
    const CrewState& s = v.crews[k];
    p.crews.push_back(static_cast<int>(k));
    int job = -1, free = v.t;
    if (s.working && s.target >= 0) {
      job = s.target;
      free = v.t + work_left(c, v, job);
    } else if (s.destination >= 0) {
      job = s.destination;
      free = v.t + s.travel + work_left(c, v, job);
    }
    p.pinned.push_back(job);
    p.free_at.push_back(free);
    p.position.push_back(job >= 0 ? c.component_slot(job) : s.position);
    if (job >= 0) taken[job] = 1;
  }
  p.duration.assign(c.num_components(), 0);
  for (int l = 0; l < c.num_lines(); ++l) {
    if (v.condition[l] == Condition::Operational || taken[l]) continue;
    p.jobs.push_back(l);
    p.duration[l] = work_left(c, v, l);
  }
  p.rate_breaks = gas.breaks();
  auto cache = std::make_shared<flow::PowerShedCache>(c);
  p.rate = [cache, &gas](const Topology& up, int t) { return cache->rate(up, gas.at(t)); };
  return to_schedule(p, solve_routes(p));
}

Schedule hindsight_schedule(const CaseModel& c, const GroundTruth& truth,
                            std::shared_ptr<const flow::FlowEvaluator> ev, ScheduleOptions o) {
  RouteProblem p;
  p.c = &c;
  p.start = 0;
  p.horizon = o.horizon > 0 ? o.horizon : c.time.horizon_steps;
  p.relative_gap = o.relative_gap;
  p.node_limit = o.node_limit;
  p.base = Topology(c.num_components(), true);
  p.duration.assign(c.num_components(), 0);
  for (int i = 0; i < c.num_components(); ++i) {
    const ComponentStatus& st = c.status[i];
    bool damaged = st.condition == Condition::Faulty;
    if (st.condition == Condition::Unknown) {
      auto it = truth.find(c.slot_label(i));
      if (it == truth.end()) throw PlanError("hindsight: no truth for " + c.slot_label(i));
      damaged = it->second;
    }
    if (!damaged) continue;
    p.base.set(i, false);
    p.jobs.push_back(i);
    p.duration[i] = st.repair_steps;
  }
  for (std::size_t k = 0; k < c.crews.size(); ++k) {
    p.crews.push_back(static_cast<int>(k));
    p.position.push_back(c.depot_slot(static_cast<int>(k)));
    p.free_at.push_back(0);
    p.pinned.push_back(-1);
  }
  p.rate = [ev](const Topology& up, int) { return ev->rate(up); };
  return to_schedule(p, solve_routes(p));
}

std::vector<int> free_pipelines(const CaseModel& c, const dynamics::WorldView& v) {
  std::vector<int> out;
  const std::vector<char> claimed = v.claimed();
  for (int p = 0; p < c.num_pipes(); ++p) {
    const int comp = c.pipe_component(p);
    if (v.condition[comp] != Condition::Operational && !claimed[comp]) out.push_back(comp);
  }
  return out;
}

int nfh_target(const CaseModel& c, const dynamics::WorldView& v, int crew) {
  int best = -1, best_d = 0;
  for (int comp : free_pipelines(c, v)) {
    const int d = c.travel_steps(v.crews.at(crew).position, c.component_slot(comp));
    if (best < 0 || d < best_d) {
      best = comp;
      best_d = d;
    }
  }
  if (best < 0) throw NoCandidate("nfh: no unresolved pipeline for " + c.crews.at(crew).id);
  return best;
}

int pbh_target(const CaseModel& c, const belief::Belief& b, const dynamics::WorldView& v, int crew) {
  int best = -1, best_d = 0;
  double best_phi = 0.0;
  for (int comp : free_pipelines(c, v)) {
    const double phi = b.phi.at(c.pipe_of(comp));
    const int d = c.travel_steps(v.crews.at(crew).position, c.component_slot(comp));
    if (best < 0 || phi > best_phi + 1e-12 || (std::abs(phi - best_phi) <= 1e-12 && d < best_d)) {
      best = comp;
      best_phi = phi;
      best_d = d;
    }
  }
  if (best < 0) throw NoCandidate("pbh: no unresolved pipeline for " + c.crews.at(crew).id);
  return best;
}

Policy nfh_policy() {
  return [](const Simulator& s, int crew) {
    const CaseModel& c = s.model();
    int best = -1, best_d = 0;
    for (int comp : s.open(CrewType::Gas)) {
      const int d = c.travel_steps(s.position(crew), c.component_slot(comp));
      if (best < 0 || d < best_d) {
        best = comp;
        best_d = d;
      }
    }
    return best;
  };
}

Policy pbh_policy(const belief::Belief& b) {
  return [phi = b.phi](const Simulator& s, int crew) {
    const CaseModel& c = s.model();
    int best = -1, best_d = 0;
    double best_phi = 0.0;
    for (int comp : s.open(CrewType::Gas)) {
      const double p = phi[c.pipe_of(comp)];
      const int d = c.travel_steps(s.position(crew), c.component_slot(comp));
      if (best < 0 || p > best_phi + 1e-12 || (std::abs(p - best_phi) <= 1e-12 && d < best_d)) {
        best = comp;
        best_phi = p;
        best_d = d;
      }
    }
    return best;
  };
}

}  // namespace restore::plan

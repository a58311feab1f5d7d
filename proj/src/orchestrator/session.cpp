#include "restore/session.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <sstream>

#include "restore/serialize.hpp"

namespace restore::run {

std::string to_string(GasPolicy p) {
  switch (p) {
    case GasPolicy::Bts: return "bts";
    case GasPolicy::Nfh: return "nfh";
    case GasPolicy::Pbh: return "pbh";
    case GasPolicy::Hindsight: return "hindsight";
  }
  return "?";
}

GasPolicy parse_gas_policy(const std::string& s) {
  if (s == "bts") return GasPolicy::Bts;
  if (s == "nfh") return GasPolicy::Nfh;
  if (s == "pbh") return GasPolicy::Pbh;
  if (s == "hindsight") return GasPolicy::Hindsight;
  throw SessionError("unknown gas policy '" + s + "' (bts, nfh, pbh, hindsight)");
}

void SessionConfig::validate() const {
  if (scenarios < 1) throw SessionError("scenarios must be at least 1");
  if (depth < 1) throw SessionError("depth must be at least 1");
  if (exploration_factor < 0) throw SessionError("exploration factor must be non-negative");
  if (deadline_seconds < 0) throw SessionError("deadline must be non-negative");
  if (node_limit < 1) throw SessionError("node limit must be positive");
  if (segments < 1) throw SessionError("segments must be positive");
  if (interactive && !truth_path.empty()) throw SessionError("interactive sessions take no truth file");
  if (interactive && gas_policy == GasPolicy::Hindsight)
    throw SessionError("hindsight needs the ground truth");
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string line(const io::Json& j) { return j.dump(); }

}  // namespace

Session::Session(SessionConfig cfg, std::shared_ptr<const CaseModel> c, std::optional<GroundTruth> truth)
    : cfg_(std::move(cfg)), case_(std::move(c)), truth_(std::move(truth)) {
  init();
}

Session::Session(SessionConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  case_ = std::make_shared<const CaseModel>(load_case(cfg_.case_path));
  if (!cfg_.interactive) {
    if (cfg_.truth_path.empty()) throw SessionError("a truth file is required unless interactive");
    truth_ = load_truth(cfg_.truth_path);
  }
  init();
}

void Session::init() {
  cfg_.validate();
  if (!case_) throw SessionError("no case");
  if (cfg_.interactive) truth_.reset();
  else if (!truth_) throw SessionError("a truth is required unless interactive");
  exact_ = std::make_shared<flow::CachedEvaluator>(
      std::make_shared<flow::ExactEvaluator>(case_, flow::ExactFlowOptions{cfg_.segments, {}}));
  rollout_ = std::make_shared<flow::CachedEvaluator>(std::make_shared<flow::VpfaEvaluator>(case_));
  world_ = std::make_unique<dynamics::World>(case_, exact_, truth_ ? &*truth_ : nullptr);

  belief::InferenceOptions bo;
  bo.seed = mix(cfg_.seed);
  int unknown = 0;
  for (int p = 0; p < case_->num_pipes(); ++p)
    unknown += case_->status[case_->pipe_component(p)].condition == Condition::Unknown;
  bo.mode = unknown <= bo.max_exact_unknowns ? belief::InferenceMode::Exact : belief::InferenceMode::MonteCarlo;
  belief_ = belief::initial_belief(*case_, bo);
  if (!cfg_.interactive) {
    const belief::ServiceChange& r = world_->initial_reading();
    apply(belief::ServiceChange{r.unserved, r.served});
  }
  if (cfg_.gas_policy == GasPolicy::Hindsight) {
    plan::ScheduleOptions so;
    so.node_limit = cfg_.node_limit;
    hindsight_ = plan::hindsight_schedule(*case_, *truth_, exact_, so);
  }
  replan_ = true;
}

bool Session::done() const { return world_->finished() || world_->t() >= case_->time.horizon_steps; }

void Session::apply(const belief::BeliefEvent& e) { belief_ = belief::apply_observation(*case_, belief_, e); }

void Session::absorb(const std::vector<dynamics::EventRecord>& events) {
  for (const auto& e : events) {
    switch (e.kind) {
      case dynamics::EventKind::InspectionComplete:
        if (case_->is_pipe(e.component)) apply(belief::Inspection{case_->pipe_of(e.component), e.faulty});
        break;
      case dynamics::EventKind::RepairComplete:
        if (case_->is_pipe(e.component)) apply(belief::RepairDone{case_->pipe_of(e.component)});
        break;
      case dynamics::EventKind::ServiceChange:
        apply(belief::ServiceChange{e.unserved, e.served});
        break;
      case dynamics::EventKind::FaultDiscovered:
        break;
    }
  }
}

std::uint64_t Session::decision_seed() const {
  return mix(cfg_.seed ^ mix(static_cast<std::uint64_t>(world_->t()) + 0x5eed));
}

std::vector<int> Session::gas_targets(const dynamics::WorldView& v, const std::vector<int>& idle_gas,
                                      const plan::Schedule& power, const belief::ScenarioSet* scenarios,
                                      std::vector<plan::PlanResult>& plans) {
  const CaseModel& c = *case_;
  std::vector<int> targets(c.crews.size(), -1);
  if (idle_gas.empty()) return targets;

  if (cfg_.gas_policy == GasPolicy::Bts) {
    plan::PlanContext ctx{&c, &belief_, &v, scenarios, rollout_, power.by_crew(static_cast<int>(c.crews.size())), {}};
    plan::TreeConfig tc;
    tc.scenarios = cfg_.scenarios;
    tc.depth = cfg_.depth;
    tc.exploration = cfg_.exploration;
    tc.exploration_factor = cfg_.exploration_factor;
    tc.seed = decision_seed();
    tc.deadline_seconds = cfg_.deadline_seconds;
    std::vector<int> order = idle_gas;
    if (cfg_.reverse_gas_order) std::reverse(order.begin(), order.end());
    plans = plan::plan_all_gas_crews(ctx, tc, order);
    for (const auto& r : plans) targets[r.crew] = r.target;
    return targets;
  }

  // Rule-based crews choose one after another; each choice is claimed first.
  dynamics::WorldView w = v;
  for (int k : idle_gas) {
    int pick = -1;
    if (cfg_.gas_policy == GasPolicy::Hindsight) {
      const auto claimed = w.claimed();
      for (std::size_t i = 0; i < hindsight_->crews.size() && pick < 0; ++i)
        if (hindsight_->crews[i] == k)
          for (int j : hindsight_->routes[i])
            if (!w.resolved(j) && !claimed[j]) {
              pick = j;
              break;
            }
      // Intact pipelines never appear in the schedule; they are left to the
      // nearest-first rule once the scheduled work is done.
    }
    try {
      if (pick < 0 && cfg_.gas_policy == GasPolicy::Pbh) pick = plan::pbh_target(c, belief_, w, k);
      else if (pick < 0) pick = plan::nfh_target(c, w, k);
    } catch (const plan::NoCandidate&) {
      pick = -1;
    }
    if (pick < 0) continue;
    targets[k] = pick;
    w.crews[k].destination = pick;
  }
  return targets;
}

Decision Session::make_decision() {
  const auto t_begin = std::chrono::steady_clock::now();
  const CaseModel& c = *case_;
  const int n = static_cast<int>(c.crews.size());
  const dynamics::WorldView v = world_->view();
  Decision d;
  d.t = v.t;
  d.targets.assign(n, -1);

  plan::ScheduleOptions so;
  so.node_limit = cfg_.node_limit;

  std::vector<int> idle_gas, idle_power;
  for (int k = 0; k < n; ++k) {
    if (!v.crews[k].idle()) continue;
    (c.crews[k].type == CrewType::Gas ? idle_gas : idle_power).push_back(k);
  }

  // Power routes the gas planner assumes: the last plan, or a first cut with
  // only the gas reachable now.
  Topology up(c.num_components());
  for (int i = 0; i < c.num_components(); ++i) up.set(i, v.condition[i] == Condition::Operational);
  plan::Schedule power;
  if (!decisions_.empty()) {
    power.crews.clear();
    for (int k = 0; k < n; ++k)
      if (c.crews[k].type == CrewType::Power) {
        power.crews.push_back(k);
        power.routes.push_back(decisions_.back().power_routes[k]);
      }
  } else {
    power = plan::rolling_power_schedule(c, v, plan::current_gas_profile(c, up, v.t), so);
  }

  bool open_pipes = false;
  for (int p = 0; p < c.num_pipes(); ++p) open_pipes = open_pipes || !v.resolved(c.pipe_component(p));

  std::optional<belief::ScenarioSet> scenarios;
  if (open_pipes) scenarios = belief::sample_scenarios(c, belief_, cfg_.scenarios, decision_seed());

  std::vector<int> gas = gas_targets(v, idle_gas, power, scenarios ? &*scenarios : nullptr, d.gas_plans);
  for (int k : idle_gas) d.targets[k] = gas[k];

  plan::GasProfile profile = plan::current_gas_profile(c, up, v.t);
  if (scenarios) {
    plan::PlanContext ctx{&c, &belief_, &v, &*scenarios, rollout_, power.by_crew(n), {}};
    std::vector<int> committed(n, -1);
    for (int k = 0; k < n; ++k) {
      if (c.crews[k].type != CrewType::Gas) continue;
      committed[k] = gas[k] >= 0 ? gas[k] : (v.crews[k].working ? v.crews[k].target : v.crews[k].destination);
    }
    plan::Policy rule;
    switch (cfg_.gas_policy) {
      case GasPolicy::Bts: break;
      case GasPolicy::Nfh: rule = plan::nfh_policy(); break;
      case GasPolicy::Pbh: rule = plan::pbh_policy(belief_); break;
      case GasPolicy::Hindsight: {
        auto routes = hindsight_->by_crew(n);
        rule = [routes, nfh = plan::nfh_policy()](const plan::Simulator& s, int k) {
          for (int j : routes[k])
            if (!s.resolved(j) && !s.claimed(j)) return j;
          return nfh(s, k);
        };
        break;
      }
    }
    profile = plan::expected_gas_profile(ctx, committed, rule);
  }
  d.gas_available_from = profile.available_from;

  plan::Schedule rolling = plan::rolling_power_schedule(c, v, profile, so);
  d.power_routes = rolling.by_crew(n);
  d.power_objective = rolling.objective;
  d.power_optimal = rolling.optimal;
  const std::vector<char> claimed = v.claimed();
  for (int k : idle_power)
    for (int j : d.power_routes[k])
      if (!v.resolved(j) && !claimed[j]) {
        d.targets[k] = j;
        break;
      }

  d.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return d;
}

const Decision& Session::plan() {
  if (!current_ || replan_) {
    current_ = make_decision();
    decisions_.push_back(*current_);
    log_.push_back(line(io::to_json(*case_, *current_)));
    replan_ = false;
  }
  return *current_;
}

void Session::dispatch(const std::vector<std::pair<std::string, std::string>>& overrides) {
  const CaseModel& c = *case_;
  const Decision& d = plan();
  dynamics::DispatchAction a;
  a.target = d.t == t() ? d.targets : std::vector<int>(c.crews.size(), -1);
  for (const auto& [crew, comp] : overrides) {
    const int k = c.crew_index(crew);
    if (k < 0) throw SessionError("no crew '" + crew + "'");
    if (comp.empty() || comp == "hold") {
      a.target[k] = -1;
      continue;
    }
    const int j = c.component_index(comp);
    if (j < 0) throw SessionError("no component '" + comp + "'");
    a.target[k] = j;
  }
  // Validate against a copy so a rejected override leaves the session intact.
  dynamics::World probe = *world_;
  probe.step(a);
  pending_ = std::move(a);
}

void Session::observe_inspection(const std::string& pipe, bool faulty) {
  const int comp = case_->component_index(pipe);
  if (comp < 0 || !case_->is_pipe(comp)) throw SessionError("no pipeline '" + pipe + "'");
  if (!world_->interactive()) throw SessionError("inspection outcomes come from the ground truth");
  world_->reveal(case_->pipe_of(comp), faulty);
  apply(belief::Inspection{case_->pipe_of(comp), faulty});
  replan_ = true;
}

void Session::observe_service(const std::vector<std::string>& unserved, const std::vector<std::string>& served) {
  belief::ServiceChange sc;
  for (const auto& id : unserved) {
    const int n = case_->node_index(id);
    if (n < 0) throw SessionError("no gas node '" + id + "'");
    sc.unserved.push_back(n);
  }
  for (const auto& id : served) {
    const int n = case_->node_index(id);
    if (n < 0) throw SessionError("no gas node '" + id + "'");
    sc.served.push_back(n);
  }
  apply(sc);
  replan_ = true;
}

void Session::advance(int steps) {
  for (int i = 0; i < steps && !done(); ++i) {
    if (!pending_) {
      const Decision& d = plan();
      pending_ = dynamics::DispatchAction{d.t == t() ? d.targets : std::vector<int>(case_->crews.size(), -1)};
    }
    dynamics::StepRecord rec = world_->step(*pending_);
    pending_.reset();
    absorb(rec.events);
    if (!rec.events.empty()) replan_ = true;
    log_.push_back(line(io::to_json(*case_, rec)));
    steps_.push_back(std::move(rec));
  }
}

void Session::run() {
  while (!done()) advance(1);
}

std::vector<double> Session::decision_seconds() const {
  std::vector<double> out;
  for (const auto& d : decisions_) out.push_back(d.seconds);
  return out;
}

std::string Session::log_jsonl() const {
  std::ostringstream os;
  os << line(io::to_json(cfg_)) << '\n';
  for (const auto& l : log_) os << l << '\n';
  io::Json s;
  s["type"] = "summary";
  s["total_cost"] = total_cost();
  s["steps"] = static_cast<int>(steps_.size());
  s["finished"] = world_->finished();
  io::Json curve = io::Json::array();
  for (const auto& r : steps_) curve.push_back(r.served_fraction);
  s["curve"] = curve;
  os << line(s) << '\n';
  return os.str();
}

std::string Session::timing_json() const {
  io::Json j;
  io::Json arr = io::Json::array();
  for (const auto& d : decisions_) arr.push_back({{"t", d.t}, {"seconds", d.seconds}});
  j["decisions"] = arr;
  return j.dump(2);
}

EpisodeResult run_episode(const SessionConfig& cfg) {
  Session s(cfg);
  s.run();
  EpisodeResult r;
  r.total_cost = s.total_cost();
  r.steps = static_cast<int>(s.steps().size());
  r.finished = s.world().finished();
  for (const auto& st : s.steps()) r.curve.push_back(st.served_fraction);
  r.decision_seconds = s.decision_seconds();
  r.log = s.log_jsonl();
  return r;
}

plan::Schedule hindsight_for(const SessionConfig& cfg) {
  cfg.validate();
  auto c = std::make_shared<const CaseModel>(load_case(cfg.case_path));
  const GroundTruth truth = load_truth(cfg.truth_path);
  auto ev = std::make_shared<flow::CachedEvaluator>(
      std::make_shared<flow::ExactEvaluator>(c, flow::ExactFlowOptions{cfg.segments, {}}));
  plan::ScheduleOptions so;
  so.node_limit = cfg.node_limit;
  return plan::hindsight_schedule(*c, truth, ev, so);
}

}  // namespace restore::run

#include "restore/serialize.hpp"

namespace restore::io {

namespace {

const char* condition_name(Condition c) {
  switch (c) {
    case Condition::Operational: return "operational";
    case Condition::Faulty: return "faulty";
    case Condition::Unknown: return "unknown";
  }
  return "?";
}

const char* knowledge_name(belief::Knowledge k) {
  switch (k) {
    case belief::Knowledge::Unknown: return "unknown";
    case belief::Knowledge::Intact: return "intact";
    case belief::Knowledge::Faulty: return "faulty";
  }
  return "?";
}

Json node_ids(const CaseModel& c, const std::vector<int>& nodes) {
  Json out = Json::array();
  for (int n : nodes) out.push_back(c.gas.nodes[n].id);
  return out;
}

}  // namespace

Json component_ids(const CaseModel& c, const std::vector<int>& comps) {
  Json out = Json::array();
  for (int j : comps) out.push_back(c.component_id(j));
  return out;
}

Json to_json(const CaseModel& c, const dynamics::EventRecord& e) {
  Json j;
  j["step"] = e.step;
  j["kind"] = dynamics::to_string(e.kind);
  if (e.kind == dynamics::EventKind::ServiceChange) {
    j["unserved"] = node_ids(c, e.unserved);
    j["served"] = node_ids(c, e.served);
    return j;
  }
  j["component"] = c.component_id(e.component);
  if (e.crew >= 0) j["crew"] = c.crews[e.crew].id;
  if (e.kind == dynamics::EventKind::InspectionComplete) j["faulty"] = e.faulty;
  return j;
}

Json to_json(const CaseModel& c, const dynamics::StepRecord& s) {
  Json j;
  j["type"] = "step";
  j["t"] = s.t;
  j["rate"] = s.rate;
  j["cost"] = s.cost;
  j["served_fraction"] = s.served_fraction;
  j["events"] = Json::array();
  for (const auto& e : s.events) j["events"].push_back(to_json(c, e));
  return j;
}

Json to_json(const CaseModel& c, const dynamics::WorldView& v) {
  Json j;
  j["t"] = v.t;
  j["cost"] = v.cost;
  Json comps = Json::array();
  for (int i = 0; i < c.num_components(); ++i)
    comps.push_back({{"id", c.component_id(i)},
                     {"kind", c.is_line(i) ? "line" : "pipeline"},
                     {"condition", condition_name(v.condition[i])},
                     {"work", v.work[i]}});
  j["components"] = comps;
  Json crews = Json::array();
  for (std::size_t k = 0; k < v.crews.size(); ++k) {
    const CrewState& s = v.crews[k];
    Json cj;
    cj["id"] = c.crews[k].id;
    cj["type"] = c.crews[k].type == CrewType::Power ? "power" : "gas";
    cj["position"] = c.slot_label(s.position);
    cj["working"] = s.working;
    cj["target"] = s.target >= 0 ? Json(c.component_id(s.target)) : Json(nullptr);
    cj["destination"] = s.destination >= 0 ? Json(c.component_id(s.destination)) : Json(nullptr);
    cj["travel"] = s.travel;
    crews.push_back(cj);
  }
  j["crews"] = crews;
  return j;
}

Json to_json(const CaseModel& c, const belief::Belief& b) {
  Json phi, known;
  for (int p = 0; p < c.num_pipes(); ++p) {
    const std::string& id = c.gas.pipelines[p].id;
    phi[id] = b.phi[p];
    known[id] = b.repaired[p] ? "repaired" : knowledge_name(b.known[p]);
  }
  Json j;
  j["phi"] = phi;
  j["known"] = known;
  j["readings"] = static_cast<int>(b.record.size());
  return j;
}

Json to_json(const CaseModel& c, const plan::PlanResult& r) {
  Json j;
  j["crew"] = c.crews[r.crew].id;
  j["target"] = r.target >= 0 ? Json(c.component_id(r.target)) : Json(nullptr);
  j["scenarios"] = r.scenarios_used;
  j["exploration"] = r.exploration;
  Json root = Json::array();
  for (const auto& s : r.root) root.push_back({{"component", c.component_id(s.component)}, {"q", s.q}, {"n", s.n}});
  j["root"] = root;
  return j;
}

Json to_json(const CaseModel& c, const plan::Schedule& s) {
  Json j;
  Json routes;
  for (std::size_t i = 0; i < s.crews.size(); ++i) routes[c.crews[s.crews[i]].id] = component_ids(c, s.routes[i]);
  j["routes"] = routes;
  Json done;
  for (int i = 0; i < c.num_components(); ++i)
    if (i < static_cast<int>(s.completion.size()) && s.completion[i] >= 0) done[c.component_id(i)] = s.completion[i];
  j["completion"] = done;
  j["objective"] = s.objective;
  j["optimal"] = s.optimal;
  j["nodes"] = s.nodes;
  return j;
}

Json to_json(const CaseModel& c, const run::Decision& d) {
  Json j;
  j["type"] = "decision";
  j["t"] = d.t;
  Json targets = Json::object();
  for (std::size_t k = 0; k < d.targets.size(); ++k)
    if (d.targets[k] >= 0) targets[c.crews[k].id] = c.component_id(d.targets[k]);
  j["targets"] = targets;
  j["gas"] = Json::array();
  for (const auto& r : d.gas_plans) j["gas"].push_back(to_json(c, r));
  Json power = Json::object();
  for (std::size_t k = 0; k < d.power_routes.size(); ++k)
    if (c.crews[k].type == CrewType::Power) power[c.crews[k].id] = component_ids(c, d.power_routes[k]);
  j["power"] = power;
  j["power_objective"] = d.power_objective;
  j["power_optimal"] = d.power_optimal;
  Json gas = Json::object();
  for (std::size_t g = 0; g < d.gas_available_from.size(); ++g)
    if (c.power.generators[g].gas)
      gas[c.power.generators[g].id] =
          d.gas_available_from[g] == INT_MAX ? Json(nullptr) : Json(d.gas_available_from[g]);
  j["gas_available_from"] = gas;
  return j;
}

Json to_json(const run::SessionConfig& cfg) {
  Json j;
  j["type"] = "config";
  j["case"] = cfg.case_path;
  j["truth"] = cfg.interactive ? Json("interactive") : Json(cfg.truth_path);
  j["gas_policy"] = run::to_string(cfg.gas_policy);
  j["power_policy"] = "rolling";
  j["scenarios"] = cfg.scenarios;
  j["depth"] = cfg.depth;
  j["exploration"] = cfg.exploration;
  j["exploration_factor"] = cfg.exploration_factor;
  j["seed"] = cfg.seed;
  j["deadline_seconds"] = cfg.deadline_seconds;
  j["reverse_gas_order"] = cfg.reverse_gas_order;
  j["node_limit"] = cfg.node_limit;
  j["segments"] = cfg.segments;
  return j;
}

run::SessionConfig config_from_json(const nlohmann::json& j) {
  run::SessionConfig cfg;
  cfg.case_path = j.value("case", std::string());
  const std::string truth = j.value("truth", std::string());
  cfg.interactive = truth == "interactive" || j.value("interactive", false);
  if (!cfg.interactive) cfg.truth_path = truth;
  cfg.gas_policy = run::parse_gas_policy(j.value("gas_policy", std::string("bts")));
  cfg.scenarios = j.value("scenarios", cfg.scenarios);
  cfg.depth = j.value("depth", cfg.depth);
  cfg.exploration = j.value("exploration", cfg.exploration);
  cfg.exploration_factor = j.value("exploration_factor", cfg.exploration_factor);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.deadline_seconds = j.value("deadline_seconds", cfg.deadline_seconds);
  cfg.reverse_gas_order = j.value("reverse_gas_order", cfg.reverse_gas_order);
  cfg.node_limit = j.value("node_limit", cfg.node_limit);
  cfg.segments = j.value("segments", cfg.segments);
  cfg.validate();
  return cfg;
}

belief::ServiceObservation observation_from_json(const CaseModel& c, const nlohmann::json& j) {
  belief::ServiceObservation obs;
  auto nodes = [&](const char* key, std::vector<int>& out) {
    for (const auto& id : j.value(key, nlohmann::json::array())) {
      const int n = c.node_index(id.get<std::string>());
      if (n < 0) throw belief::BeliefError("no gas node '" + id.get<std::string>() + "'");
      out.push_back(n);
    }
  };
  nodes("unserved", obs.unserved);
  nodes("served", obs.served);
  for (const auto& ins : j.value("inspections", nlohmann::json::array())) {
    const std::string id = ins.at("pipeline").get<std::string>();
    const int comp = c.component_index(id);
    if (comp < 0 || !c.is_pipe(comp)) throw belief::BeliefError("no pipeline '" + id + "'");
    const std::string result = ins.at("result").get<std::string>();
    if (result != "intact" && result != "faulty")
      throw belief::BeliefError("inspection result must be intact or faulty, got '" + result + "'");
    obs.inspections.push_back({c.pipe_of(comp), result == "faulty"});
  }
  return obs;
}

}  // namespace restore::io

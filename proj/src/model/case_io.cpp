#include <fstream>
#include <sstream>

#include <json.hpp>

#include "restore/case_model.hpp"

namespace restore {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CaseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Point read_point(const json& j) { return {j.value("x", 0.0), j.value("y", 0.0)}; }

std::optional<Point> read_optional_point(const json& j) {
  if (!j.contains("pos")) return std::nullopt;
  return Point{j.at("pos").at(0).get<double>(), j.at("pos").at(1).get<double>()};
}

OutageSignal read_signal(const json& j) {
  const std::string s = j.value("signal", "none");
  if (s == "none") return OutageSignal::None;
  if (s == "user_report") return OutageSignal::UserReport;
  if (s == "generator_flag") return OutageSignal::GeneratorFlag;
  throw CaseError("unknown outage signal '" + s + "'");
}

const char* signal_name(OutageSignal s) {
  switch (s) {
    case OutageSignal::None: return "none";
    case OutageSignal::UserReport: return "user_report";
    case OutageSignal::GeneratorFlag: return "generator_flag";
  }
  return "none";
}

template <class Lookup>
int resolve(const Lookup& ids, const json& ref) {
  auto it = ids.find(ref.get<std::string>());
  return it == ids.end() ? -1 : it->second;
}

struct Parsed {
  CaseModel model;
  std::vector<Violation> extra;
};

Parsed parse_document(const json& doc) {
  Parsed out;
  CaseModel& c = out.model;
  c.name = doc.value("name", "");
  if (doc.contains("meta")) {
    for (const auto& [k, v] : doc.at("meta").items())
      c.notes[k] = v.is_string() ? v.get<std::string>() : v.dump();
  }

  const json& pw = doc.at("power");
  c.power.base_voltage = pw.value("base_voltage", 1.0);
  std::unordered_map<std::string, int> bus_ids, node_ids;
  for (const auto& b : pw.at("buses")) {
    Bus bus;
    bus.id = b.at("id").get<std::string>();
    bus.p_demand = b.value("p", 0.0);
    bus.q_demand = b.value("q", 0.0);
    bus.shed_cost = b.value("cost", 0.0);
    bus.v_min = b.value("v_min", 0.9);
    bus.v_max = b.value("v_max", 1.1);
    bus.pos = read_point(b);
    bus_ids.emplace(bus.id, static_cast<int>(c.power.buses.size()));
    c.power.buses.push_back(std::move(bus));
  }
  const json& gs = doc.at("gas");
  for (const auto& n : gs.at("nodes")) {
    GasNode node;
    node.id = n.at("id").get<std::string>();
    node.demand = n.value("demand", 0.0);
    node.shed_cost = n.value("cost", 0.0);
    node.pressure_min = n.value("pressure_min", 1.0);
    node.pressure_max = n.value("pressure_max", 2.0);
    node.pos = read_point(n);
    node.signal = read_signal(n);
    node_ids.emplace(node.id, static_cast<int>(c.gas.nodes.size()));
    c.gas.nodes.push_back(std::move(node));
  }
  for (const auto& l : pw.value("lines", json::array())) {
    Line line;
    line.id = l.at("id").get<std::string>();
    line.from = resolve(bus_ids, l.at("from"));
    line.to = resolve(bus_ids, l.at("to"));
    line.resistance = l.value("r", 0.0);
    line.reactance = l.value("x", 0.0);
    line.p_max = l.value("p_max", 0.0);
    line.q_max = l.value("q_max", 0.0);
    line.pos = read_optional_point(l);
    c.power.lines.push_back(std::move(line));
  }
  for (const auto& g : pw.value("generators", json::array())) {
    Generator gen;
    gen.id = g.at("id").get<std::string>();
    gen.bus = resolve(bus_ids, g.at("bus"));
    gen.p_max = g.value("p_max", 0.0);
    gen.q_max = g.value("q_max", 0.0);
    if (g.contains("gas")) {
      const json& gl = g.at("gas");
      gen.gas = GasLink{resolve(node_ids, gl.at("node")), gl.value("beta", 1.0),
                        gl.value("gamma", 0.0)};
    }
    c.power.generators.push_back(std::move(gen));
  }
  for (const auto& w : gs.value("wells", json::array())) {
    Well well;
    well.id = w.at("id").get<std::string>();
    well.node = resolve(node_ids, w.at("node"));
    well.w_min = w.value("min", 0.0);
    well.w_max = w.value("max", 0.0);
    c.gas.wells.push_back(std::move(well));
  }
  for (const auto& p : gs.value("pipelines", json::array())) {
    Pipeline pipe;
    pipe.id = p.at("id").get<std::string>();
    pipe.from = resolve(node_ids, p.at("from"));
    pipe.to = resolve(node_ids, p.at("to"));
    pipe.length_km = p.value("length_km", 1.0);
    pipe.f_max = p.value("f_max", 0.0);
    const std::string cls = p.value("class", "inactive");
    if (cls == "inactive") {
      pipe.kind = PipeClass::Passive;
      pipe.weymouth = p.value("weymouth", 0.0);
    } else if (cls == "active") {
      pipe.kind = PipeClass::Compressor;
      pipe.ratio = p.value("ratio", 1.0);
      pipe.compressor_rate = p.value("compressor_rate", 0.0);
      pipe.host_bus = p.contains("host_bus") ? resolve(bus_ids, p.at("host_bus")) : -1;
    } else {
      throw CaseError("pipeline '" + pipe.id + "' has unknown class '" + cls + "'");
    }
    pipe.pos = read_optional_point(p);
    c.gas.pipelines.push_back(std::move(pipe));
  }

  for (const auto& k : doc.value("crews", json::array())) {
    CrewSpec crew;
    crew.id = k.at("id").get<std::string>();
    const std::string type = k.at("type").get<std::string>();
    if (type == "power") crew.type = CrewType::Power;
    else if (type == "gas") crew.type = CrewType::Gas;
    else throw CaseError("crew '" + crew.id + "' has unknown type '" + type + "'");
    crew.depot = read_point(k.at("depot"));
    c.crews.push_back(std::move(crew));
  }

  const json& tr = doc.at("travel");
  const std::string mode = tr.at("mode").get<std::string>();
  if (mode == "euclidean") {
    c.travel = TravelModel::euclidean(tr.at("speed").get<double>());
  } else if (mode == "matrix") {
    c.travel = TravelModel::matrix(tr.at("labels").get<std::vector<std::string>>(),
                                   tr.at("steps").get<std::vector<std::vector<int>>>());
  } else {
    throw CaseError("unknown travel mode '" + mode + "'");
  }

  const json& tm = doc.at("time");
  c.time.dt_hours = tm.at("dt_hours").get<double>();
  c.time.horizon_steps = tm.at("horizon_steps").get<int>();
  c.pgv = doc.contains("hazard") ? doc.at("hazard").value("pgv", 0.0) : 0.0;

  c.finalize();
  const json status = doc.value("status", json::object());
  for (const auto& [id, s] : status.items()) {
    const int idx = c.component_index(id);
    if (idx < 0) {
      out.extra.push_back({id, "unknown component"});
      continue;
    }
    ComponentStatus st;
    const std::string state = s.at("state").get<std::string>();
    if (state == "operational") st.condition = Condition::Operational;
    else if (state == "faulty") st.condition = Condition::Faulty;
    else if (state == "unknown") st.condition = Condition::Unknown;
    else throw CaseError("component '" + id + "' has unknown state '" + state + "'");
    st.repair_steps = s.value("repair_steps", 0);
    st.inspect_steps = s.value("inspect_steps", 1);
    if (s.contains("prior")) st.prior = s.at("prior").get<double>();
    c.status[idx] = st;
  }
  return out;
}

}  // namespace

CaseModel parse_case(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw CaseError(std::string("parse error: ") + e.what());
  }
  Parsed parsed;
  try {
    parsed = parse_document(doc);
  } catch (const json::exception& e) {
    throw CaseError(std::string("parse error: ") + e.what());
  }
  std::vector<Violation> v = std::move(parsed.extra);
  for (auto& x : validate_case(parsed.model)) v.push_back(std::move(x));
  if (!v.empty())
    throw CaseError("validation error: " + v.front().component + ": " + v.front().rule);
  return std::move(parsed.model);
}

CaseModel load_case(const std::string& path) { return parse_case(read_file(path)); }

std::string serialize_case(const CaseModel& c) {
  ordered_json doc;
  if (!c.name.empty()) doc["name"] = c.name;
  if (!c.notes.empty()) {
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : c.notes) meta[k] = v;
    doc["meta"] = meta;
  }
  auto point = [](const Point& p) { return ordered_json{{"x", p.x}, {"y", p.y}}; };

  ordered_json pw;
  pw["base_voltage"] = c.power.base_voltage;
  pw["buses"] = ordered_json::array();
  for (const auto& b : c.power.buses) {
    pw["buses"].push_back({{"id", b.id}, {"p", b.p_demand}, {"q", b.q_demand},
                           {"cost", b.shed_cost}, {"v_min", b.v_min}, {"v_max", b.v_max},
                           {"x", b.pos.x}, {"y", b.pos.y}});
  }
  pw["lines"] = ordered_json::array();
  for (const auto& l : c.power.lines) {
    ordered_json j{{"id", l.id}, {"from", c.power.buses[l.from].id},
                   {"to", c.power.buses[l.to].id}, {"r", l.resistance}, {"x", l.reactance},
                   {"p_max", l.p_max}, {"q_max", l.q_max}};
    if (l.pos) j["pos"] = {l.pos->x, l.pos->y};
    pw["lines"].push_back(j);
  }
  pw["generators"] = ordered_json::array();
  for (const auto& g : c.power.generators) {
    ordered_json j{{"id", g.id}, {"bus", c.power.buses[g.bus].id}, {"p_max", g.p_max},
                   {"q_max", g.q_max}};
    if (g.gas)
      j["gas"] = {{"node", c.gas.nodes[g.gas->node].id}, {"beta", g.gas->beta},
                  {"gamma", g.gas->gamma}};
    pw["generators"].push_back(j);
  }
  doc["power"] = pw;

  ordered_json gs;
  gs["nodes"] = ordered_json::array();
  for (const auto& n : c.gas.nodes) {
    gs["nodes"].push_back({{"id", n.id}, {"demand", n.demand}, {"cost", n.shed_cost},
                           {"pressure_min", n.pressure_min}, {"pressure_max", n.pressure_max},
                           {"x", n.pos.x}, {"y", n.pos.y}, {"signal", signal_name(n.signal)}});
  }
  gs["wells"] = ordered_json::array();
  for (const auto& w : c.gas.wells)
    gs["wells"].push_back({{"id", w.id}, {"node", c.gas.nodes[w.node].id}, {"min", w.w_min},
                           {"max", w.w_max}});
  gs["pipelines"] = ordered_json::array();
  for (const auto& p : c.gas.pipelines) {
    ordered_json j{{"id", p.id}, {"from", c.gas.nodes[p.from].id},
                   {"to", c.gas.nodes[p.to].id}, {"length_km", p.length_km},
                   {"f_max", p.f_max}};
    if (p.kind == PipeClass::Passive) {
      j["class"] = "inactive";
      j["weymouth"] = p.weymouth;
    } else {
      j["class"] = "active";
      j["ratio"] = p.ratio;
      j["compressor_rate"] = p.compressor_rate;
      j["host_bus"] = c.power.buses[p.host_bus].id;
    }
    if (p.pos) j["pos"] = {p.pos->x, p.pos->y};
    gs["pipelines"].push_back(j);
  }
  doc["gas"] = gs;

  ordered_json st = ordered_json::object();
  for (int i = 0; i < c.num_components(); ++i) {
    const auto& s = c.status[i];
    if (s.condition == Condition::Operational) continue;
    ordered_json j;
    j["state"] = s.condition == Condition::Faulty ? "faulty" : "unknown";
    j["repair_steps"] = s.repair_steps;
    if (s.condition == Condition::Unknown) {
      j["inspect_steps"] = s.inspect_steps;
      if (s.prior) j["prior"] = *s.prior;
    }
    st[c.component_id(i)] = j;
  }
  doc["status"] = st;

  doc["crews"] = ordered_json::array();
  for (const auto& k : c.crews)
    doc["crews"].push_back({{"id", k.id},
                            {"type", k.type == CrewType::Power ? "power" : "gas"},
                            {"depot", point(k.depot)}});

  if (c.travel.mode() == TravelModel::Mode::Euclidean) {
    doc["travel"] = {{"mode", "euclidean"}, {"speed", c.travel.speed()}};
  } else {
    doc["travel"] = {{"mode", "matrix"}, {"labels", c.travel.labels()},
                     {"steps", c.travel.table()}};
  }
  doc["time"] = {{"dt_hours", c.time.dt_hours}, {"horizon_steps", c.time.horizon_steps}};
  doc["hazard"] = {{"pgv", c.pgv}};
  return doc.dump(2);
}

GroundTruth parse_truth(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw CaseError(std::string("parse error: ") + e.what());
  }
  GroundTruth out;
  const json& body = doc.contains("pipelines") ? doc.at("pipelines") : doc;
  for (const auto& [id, v] : body.items()) {
    const std::string s = v.get<std::string>();
    if (s != "intact" && s != "faulty")
      throw CaseError("truth for '" + id + "' must be intact or faulty");
    out[id] = s == "faulty";
  }
  return out;
}

GroundTruth load_truth(const std::string& path) { return parse_truth(read_file(path)); }

}  // namespace restore

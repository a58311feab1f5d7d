#pragma once

#include <json.hpp>

#include "restore/dispatch.hpp"
#include "restore/session.hpp"

namespace restore::io {

using Json = nlohmann::ordered_json;

Json to_json(const CaseModel& c, const dynamics::EventRecord& e);
Json to_json(const CaseModel& c, const dynamics::StepRecord& s);
Json to_json(const CaseModel& c, const dynamics::WorldView& v);
Json to_json(const CaseModel& c, const belief::Belief& b);
Json to_json(const CaseModel& c, const plan::PlanResult& r);
Json to_json(const CaseModel& c, const plan::Schedule& s);
Json to_json(const CaseModel& c, const run::Decision& d);
Json to_json(const run::SessionConfig& cfg);

run::SessionConfig config_from_json(const nlohmann::json& j);

// {"unserved": [node ids], "served": [node ids],
//  "inspections": [{"pipeline": id, "result": "intact" | "faulty"}]}
belief::ServiceObservation observation_from_json(const CaseModel& c, const nlohmann::json& j);

// Ids for a list of component indices.
Json component_ids(const CaseModel& c, const std::vector<int>& comps);

}  // namespace restore::io

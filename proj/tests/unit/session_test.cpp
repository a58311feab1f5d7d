#include <gtest/gtest.h>

#include <json.hpp>
#include <numeric>
#include <sstream>

#include "restore/serialize.hpp"
#include "restore/session.hpp"

using namespace restore;
using namespace restore::run;

namespace {

std::string fixture(const char* name) { return std::string(RESTORE_FIXTURE_DIR) + "/" + name; }

SessionConfig case1(GasPolicy p, int scenarios = 100) {
  SessionConfig cfg;
  cfg.case_path = fixture("case13x7.json");
  cfg.truth_path = fixture("case13x7_truth.json");
  cfg.gas_policy = p;
  cfg.scenarios = scenarios;
  return cfg;
}

std::vector<nlohmann::json> parse_lines(const std::string& log) {
  std::vector<nlohmann::json> out;
  std::istringstream in(log);
  for (std::string l; std::getline(in, l);) out.push_back(nlohmann::json::parse(l));
  return out;
}

}  // namespace

TEST(Session, NothingDamagedCostsNothing) {
  SessionConfig cfg;
  cfg.case_path = fixture("minimal.json");
  auto c = std::make_shared<const CaseModel>(load_case(cfg.case_path));
  Session s(cfg, c, GroundTruth{});
  s.run();
  EXPECT_TRUE(s.done());
  EXPECT_TRUE(s.world().finished());
  EXPECT_DOUBLE_EQ(s.total_cost(), 0.0);
}

TEST(Session, TotalIsSumOfStepCosts) {
  Session s(case1(GasPolicy::Bts));
  s.run();
  ASSERT_FALSE(s.steps().empty());
  EXPECT_NEAR(s.total_cost(), dynamics::episode_cost(s.steps()), 1e-9);
  double sum = 0.0;
  for (const auto& st : s.steps()) sum += st.cost;
  EXPECT_NEAR(s.total_cost(), sum, 1e-9);
  EXPECT_TRUE(s.world().finished());

  const auto lines = parse_lines(s.log_jsonl());
  ASSERT_GE(lines.size(), 3u);
  EXPECT_EQ(lines.front()["type"], "config");
  EXPECT_EQ(lines.back()["type"], "summary");
  EXPECT_NEAR(lines.back()["total_cost"].get<double>(), sum, 1e-9);
  double logged = 0.0;
  for (const auto& j : lines)
    if (j["type"] == "step") logged += j["cost"].get<double>();
  EXPECT_NEAR(logged, sum, 1e-9);
}

TEST(Session, ReplayIsByteIdentical) {
  for (GasPolicy p : {GasPolicy::Bts, GasPolicy::Nfh, GasPolicy::Pbh}) {
    const EpisodeResult a = run_episode(case1(p, 60));
    const EpisodeResult b = run_episode(case1(p, 60));
    EXPECT_EQ(a.log, b.log) << to_string(p);
    EXPECT_EQ(a.total_cost, b.total_cost);
  }
}

TEST(Session, ReplansOnlyAfterEvents) {
  Session s(case1(GasPolicy::Nfh));
  s.run();
  std::vector<int> expected{0};
  for (const auto& st : s.steps())
    if (!st.events.empty() && st.t + 1 < static_cast<int>(s.steps().size())) expected.push_back(st.t + 1);
  std::vector<int> got;
  for (const auto& d : s.decisions()) got.push_back(d.t);
  EXPECT_EQ(got, expected);
}

TEST(Session, EveryPolicyFinishes) {
  for (GasPolicy p : {GasPolicy::Bts, GasPolicy::Nfh, GasPolicy::Pbh, GasPolicy::Hindsight}) {
    const EpisodeResult r = run_episode(case1(p, 60));
    EXPECT_TRUE(r.finished) << to_string(p);
    EXPECT_EQ(static_cast<int>(r.curve.size()), r.steps);
    EXPECT_GT(r.total_cost, 0.0);
    for (double f : r.curve) {
      EXPECT_GE(f, -1e-9);
      EXPECT_LE(f, 1.0 + 1e-9);
    }
  }
}

TEST(Session, OverrideIsApplied) {
  Session s(case1(GasPolicy::Nfh));
  s.dispatch({{"GC1", "P5"}});
  s.advance();
  const auto v = s.world().view();
  const int gc = s.model().crew_index("GC1");
  EXPECT_EQ(v.crews[gc].destination >= 0 ? v.crews[gc].destination : v.crews[gc].target,
            s.model().component_index("P5"));
}

TEST(Session, BadOverrideLeavesStateAlone) {
  Session s(case1(GasPolicy::Nfh));
  EXPECT_THROW(s.dispatch({{"GC1", "F1"}}), dynamics::InvalidAction);
  EXPECT_THROW(s.dispatch({{"XX", "P1"}}), SessionError);
  EXPECT_EQ(s.t(), 0);
  s.advance();
  EXPECT_EQ(s.t(), 1);
}

TEST(Session, InteractiveInspectionPinsBelief) {
  SessionConfig cfg = case1(GasPolicy::Nfh);
  cfg.truth_path.clear();
  cfg.interactive = true;
  Session s(cfg);
  const int p1 = s.model().pipe_of(s.model().component_index("P1"));
  s.observe_inspection("P1", false);
  EXPECT_EQ(s.belief().known[p1], belief::Knowledge::Intact);
  EXPECT_DOUBLE_EQ(s.belief().phi[p1], 0.0);
  EXPECT_TRUE(s.needs_plan());
  EXPECT_THROW(s.observe_inspection("P1", true), std::exception);
  EXPECT_THROW(s.observe_inspection("F1", true), SessionError);
}

TEST(Session, RejectsBadConfig) {
  SessionConfig cfg = case1(GasPolicy::Bts);
  cfg.scenarios = 0;
  EXPECT_THROW(Session{cfg}, SessionError);
  cfg = case1(GasPolicy::Bts);
  cfg.truth_path.clear();
  EXPECT_THROW(Session{cfg}, SessionError);
  EXPECT_THROW(parse_gas_policy("greedy"), SessionError);
}

TEST(Serialize, ConfigRoundTrip) {
  SessionConfig cfg = case1(GasPolicy::Pbh, 77);
  cfg.seed = 9;
  cfg.reverse_gas_order = true;
  const auto j = nlohmann::json::parse(io::to_json(cfg).dump());
  const SessionConfig back = io::config_from_json(j);
  EXPECT_EQ(back.case_path, cfg.case_path);
  EXPECT_EQ(back.truth_path, cfg.truth_path);
  EXPECT_EQ(back.gas_policy, GasPolicy::Pbh);
  EXPECT_EQ(back.scenarios, 77);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_TRUE(back.reverse_gas_order);
}

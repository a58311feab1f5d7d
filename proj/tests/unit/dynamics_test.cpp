#include <gtest/gtest.h>

#include <random>

#include "restore/dynamics.hpp"

using namespace restore;
using namespace restore::dynamics;

namespace {

std::string fixture(const char* name) { return std::string(RESTORE_FIXTURE_DIR) + "/" + name; }

// Well at N0, one pipeline to a 2-unit load at N1, one gas crew two steps away.
std::shared_ptr<CaseModel> one_pipe(Condition cond, int repair) {
  auto c = std::make_shared<CaseModel>();
  c->gas.nodes.push_back({.id = "N0", .pos = {0, 0}});
  c->gas.nodes.push_back({.id = "N1", .demand = 2, .shed_cost = 10, .pos = {4, 0},
                          .signal = OutageSignal::UserReport});
  c->gas.wells.push_back({.id = "W", .node = 0, .w_min = 0, .w_max = 5});
  c->gas.pipelines.push_back({.id = "P1", .from = 0, .to = 1, .weymouth = 100, .f_max = 5});
  c->status = {ComponentStatus{.condition = cond, .repair_steps = repair, .inspect_steps = 1}};
  c->crews.push_back({.id = "GC1", .type = CrewType::Gas, .depot = {2, 2}});
  c->travel = TravelModel::euclidean(1.0);
  c->time = {.dt_hours = 0.5, .horizon_steps = 20};
  c->finalize();
  return c;
}

std::shared_ptr<flow::FlowEvaluator> exact(std::shared_ptr<const CaseModel> c) {
  return std::make_shared<flow::ExactEvaluator>(std::move(c));
}

// Greedy driver: every idle crew takes the lowest-id open component nobody
// else has claimed.
DispatchAction lowest_free(const CaseModel& c, const WorldView& v) {
  DispatchAction a;
  a.target.assign(v.crews.size(), -1);
  std::vector<char> claimed = v.claimed();
  for (std::size_t k = 0; k < v.crews.size(); ++k) {
    if (!v.crews[k].idle()) continue;
    for (int comp : v.open_components(c, v.crews[k].type))
      if (!claimed[comp]) {
        a.target[k] = comp;
        claimed[comp] = 1;
        break;
      }
  }
  return a;
}

}  // namespace

TEST(CrewTransition, ThreeCases) {
  CrewState s;
  s.destination = 4;
  s.travel = 3;
  CrewState n = transition_crew(s, -1, false);
  EXPECT_EQ(n.travel, 2);
  EXPECT_EQ(n.target, -1);
  EXPECT_FALSE(n.working);

  s.travel = 1;
  n = transition_crew(s, -1, false);
  EXPECT_TRUE(n.working);
  EXPECT_EQ(n.travel, 0);
  EXPECT_EQ(n.target, 4);

  n = transition_crew(n, 5, true, 2);
  EXPECT_FALSE(n.working);
  EXPECT_EQ(n.travel, 2);
  EXPECT_EQ(n.target, -1);
  EXPECT_EQ(n.destination, 5);
}

TEST(World, NoFaultsNoCost) {
  auto c = std::make_shared<const CaseModel>(load_case(fixture("minimal.json")));
  const GroundTruth none;
  World w(c, exact(c), &none);
  EXPECT_TRUE(w.finished());
  const StepRecord r = w.step({});
  EXPECT_EQ(r.cost, 0.0);
  EXPECT_TRUE(r.events.empty());
}

TEST(World, IntactUnknownIsOneStepInspection) {
  auto c = one_pipe(Condition::Unknown, 3);
  const GroundTruth truth{{"P1", false}};
  World w(c, exact(c), &truth);
  EXPECT_EQ(w.initial_reading().served, std::vector<int>{1});
  // Depot (2,2) to pipe midpoint (2,0): two steps.
  StepRecord r = w.step({{0}});
  EXPECT_TRUE(r.events.empty());
  r = w.step({{0}});
  EXPECT_TRUE(w.view().crews[0].working);
  r = w.step({{-1}});
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].kind, EventKind::InspectionComplete);
  EXPECT_FALSE(r.events[0].faulty);
  EXPECT_TRUE(w.view().crews[0].idle());
  EXPECT_TRUE(w.finished());
  EXPECT_EQ(w.cost(), 0.0);
}

TEST(World, FaultyUnknownOccupiesInspectionPlusRepair) {
  auto c = one_pipe(Condition::Unknown, 3);
  const GroundTruth truth{{"P1", true}};
  World w(c, exact(c), &truth);
  EXPECT_EQ(w.initial_reading().unserved, std::vector<int>{1});
  std::vector<StepRecord> steps;
  steps.push_back(w.step({{0}}));
  steps.push_back(w.step({{-1}}));
  int occupied = 0;
  while (!w.finished()) {
    ASSERT_TRUE(w.view().crews[0].working);
    ++occupied;
    steps.push_back(w.step({{-1}}));
  }
  EXPECT_EQ(occupied, 4);
  EXPECT_EQ(occupancy(*c, 0, true), 4);
  EXPECT_EQ(occupancy(*c, 0, false), 1);
  // Shed 2 units at $10 for 2 travel + 4 work steps.
  EXPECT_NEAR(w.cost(), 6 * 20 * 0.5, 1e-9);
  EXPECT_NEAR(episode_cost(steps), w.cost(), 1e-12);
  const auto& first = steps[2].events;
  ASSERT_EQ(first.size(), 2u);
  EXPECT_EQ(first[0].kind, EventKind::InspectionComplete);
  EXPECT_EQ(first[1].kind, EventKind::FaultDiscovered);
  const auto& last = steps.back().events;
  ASSERT_EQ(last.size(), 2u);
  EXPECT_EQ(last[0].kind, EventKind::RepairComplete);
  EXPECT_EQ(last[1].kind, EventKind::ServiceChange);
  EXPECT_EQ(last[1].served, std::vector<int>{1});
  EXPECT_EQ(w.step({{-1}}).cost, 0.0);
}

TEST(World, RejectsInvalidActions) {
  auto c = one_pipe(Condition::Faulty, 2);
  const GroundTruth none;
  World w(c, exact(c), &none);
  EXPECT_THROW(w.step({{5}}), InvalidAction);
  w.step({{0}});
  auto d = one_pipe(Condition::Operational, 1);
  World x(d, exact(d), &none);
  EXPECT_THROW(x.step({{0}}), InvalidAction);
}

TEST(World, Case1ReplayMatchesPeriodCosts) {
  auto c = std::make_shared<const CaseModel>(load_case(fixture("case13x7.json")));
  const GroundTruth truth = load_truth(fixture("case13x7_truth.json"));
  World w(c, exact(c), &truth);
  std::vector<StepRecord> steps;
  std::vector<Topology> topo;
  while (!w.finished() && w.t() < c->time.horizon_steps) {
    topo.push_back(w.true_topology());
    steps.push_back(w.step(lowest_free(*c, w.view())));
  }
  ASSERT_TRUE(w.finished());
  double recomputed = 0.0;
  for (const auto& t : topo) recomputed += flow::period_cost(*c, flow::exact_flow(*c, t));
  EXPECT_NEAR(episode_cost(steps), recomputed, 1e-9);
  EXPECT_NEAR(w.cost(), recomputed, 1e-9);
  // Everything is back: the next step prices the all-up topology.
  EXPECT_NEAR(w.step({}).rate, flow::exact_flow(*c, all_up(*c)).shed_rate(), 1e-9);
}

TEST(World, DeterministicReplay) {
  auto c = std::make_shared<const CaseModel>(load_case(fixture("case13x7.json")));
  const GroundTruth truth = load_truth(fixture("case13x7_truth.json"));
  auto ev = std::make_shared<flow::VpfaEvaluator>(c);
  World a(c, ev, &truth), b(c, ev, &truth);
  for (int t = 0; t < 30; ++t) {
    const StepRecord ra = a.step(lowest_free(*c, a.view()));
    const StepRecord rb = b.step(lowest_free(*c, b.view()));
    ASSERT_EQ(ra.cost, rb.cost);
    ASSERT_EQ(ra.events, rb.events);
  }
}

TEST(World, LivenessWithinTravelAndRepairBound) {
  auto c = std::make_shared<const CaseModel>(load_case(fixture("case13x7.json")));
  const GroundTruth truth = load_truth(fixture("case13x7_truth.json"));
  // Per crew type: each component costs at most its worst travel plus work.
  int bound = 0;
  for (int comp : c->damaged_components()) {
    int worst = 1;
    for (int s = 0; s < c->num_components() + static_cast<int>(c->crews.size()); ++s)
      worst = std::max(worst, move_steps(*c, s, comp));
    bound += worst + occupancy(*c, comp, true);
  }
  World w(c, std::make_shared<flow::VpfaEvaluator>(c), &truth);
  std::mt19937 rng(1);
  while (!w.finished() && w.t() < bound) {
    // Random permutation driver.
    WorldView v = w.view();
    DispatchAction a;
    a.target.assign(v.crews.size(), -1);
    std::vector<char> claimed = v.claimed();
    for (std::size_t k = 0; k < v.crews.size(); ++k) {
      if (!v.crews[k].idle()) continue;
      std::vector<int> open;
      for (int comp : v.open_components(*c, v.crews[k].type))
        if (!claimed[comp]) open.push_back(comp);
      if (open.empty()) continue;
      a.target[k] = open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)];
      claimed[a.target[k]] = 1;
    }
    w.step(a);
  }
  EXPECT_TRUE(w.finished());
}

TEST(World, InteractiveWaitsForReportedOutcome) {
  auto c = one_pipe(Condition::Unknown, 2);
  World w(c, exact(c), nullptr);
  EXPECT_TRUE(w.interactive());
  w.step({{0}});
  w.step({{-1}});
  for (int i = 0; i < 3; ++i) EXPECT_TRUE(w.step({{-1}}).events.empty());
  EXPECT_EQ(w.step({{-1}}).rate, 20.0);  // unrevealed pipe priced as down
  w.reveal(0, true);
  const StepRecord r = w.step({{-1}});
  ASSERT_FALSE(r.events.empty());
  EXPECT_EQ(r.events[0].kind, EventKind::InspectionComplete);
  EXPECT_TRUE(r.events[0].faulty);
  w.step({{-1}});
  const StepRecord done = w.step({{-1}});
  ASSERT_FALSE(done.events.empty());
  EXPECT_EQ(done.events[0].kind, EventKind::RepairComplete);
  EXPECT_EQ(w.step({{-1}}).rate, 0.0);
}

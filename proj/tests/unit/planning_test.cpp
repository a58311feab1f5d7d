#include <gtest/gtest.h>

#include <random>

#include "restore/bts.hpp"

using namespace restore;
using namespace restore::plan;

namespace {

std::string fixture(const char* name) { return std::string(RESTORE_FIXTURE_DIR) + "/" + name; }

std::shared_ptr<const flow::FlowEvaluator> vpfa(std::shared_ptr<const CaseModel> c) {
  return std::make_shared<flow::CachedEvaluator>(std::make_shared<flow::VpfaEvaluator>(std::move(c)));
}

Policy lowest_open() {
  return [](const Simulator& s, int k) {
    const auto open = s.open(s.crew_type(k));
    return open.empty() ? -1 : open.front();
  };
}

std::vector<char> truth_damage(const CaseModel& c, const GroundTruth& truth) {
  std::vector<char> pipes(c.num_pipes(), 0);
  for (int p = 0; p < c.num_pipes(); ++p) {
    const int comp = c.pipe_component(p);
    if (c.status[comp].condition == Condition::Faulty) pipes[p] = 1;
    auto it = truth.find(c.gas.pipelines[p].id);
    if (it != truth.end()) pipes[p] = it->second;
  }
  return pipes;
}

// Star gas network: well at N0, one faulty pipeline to each load node, one gas
// crew. Positions and durations drawn at random.
std::shared_ptr<CaseModel> star(std::mt19937& rng, int pipes, std::vector<Condition> cond = {}) {
  auto c = std::make_shared<CaseModel>();
  std::uniform_int_distribution<int> coord(0, 6), repair(1, 5);
  std::uniform_real_distribution<double> demand(1, 10), price(5, 20);
  c->gas.nodes.push_back({.id = "N0", .pos = {0, 0}});
  c->gas.wells.push_back({.id = "W", .node = 0, .w_min = 0, .w_max = 1000});
  for (int i = 1; i <= pipes; ++i) {
    c->gas.nodes.push_back({.id = "N" + std::to_string(i), .demand = demand(rng), .shed_cost = price(rng),
                            .pos = {double(coord(rng)), double(coord(rng))},
                            .signal = OutageSignal::UserReport});
    c->gas.pipelines.push_back(
        {.id = "P" + std::to_string(i), .from = 0, .to = i, .weymouth = 1000, .f_max = 100});
    c->status.push_back({.condition = cond.empty() ? Condition::Faulty : cond[i - 1],
                         .repair_steps = repair(rng), .inspect_steps = 1, .prior = 0.5});
  }
  c->crews.push_back({.id = "GC1", .type = CrewType::Gas, .depot = {double(coord(rng)), double(coord(rng))}});
  c->travel = TravelModel::euclidean(2.0);
  c->time = {.dt_hours = 1.0, .horizon_steps = 40};
  c->finalize();
  return c;
}

struct Planned {
  std::shared_ptr<const CaseModel> c;
  belief::Belief b;
  dynamics::WorldView v;
  belief::ScenarioSet s;
  PlanContext ctx;
};

Planned prepare(std::shared_ptr<const CaseModel> c, int scenarios, std::uint64_t seed = 7) {
  Planned p;
  p.c = c;
  p.b = belief::initial_belief(*c);
  p.v = initial_view(*c);
  p.s = belief::sample_scenarios(*c, p.b, scenarios, seed);
  return p;
}

PlanContext context(Planned& p) {
  PlanContext ctx;
  ctx.c = p.c.get();
  ctx.belief = &p.b;
  ctx.view = &p.v;
  ctx.scenarios = &p.s;
  ctx.rollout_eval = vpfa(p.c);
  ctx.power_routes.assign(p.c->crews.size(), {});
  return ctx;
}

}  // namespace

TEST(Simulator, ReproducesWorldStepCosts) {
  auto c = std::make_shared<const CaseModel>(load_case(fixture("case13x7.json")));
  const GroundTruth truth = load_truth(fixture("case13x7_truth.json"));
  auto ev = vpfa(c);
  dynamics::World w(c, ev, &truth);
  std::vector<double> world_costs;
  for (int t = 0; t < c->time.horizon_steps; ++t) {
    dynamics::DispatchAction a;
    a.target.assign(c->crews.size(), -1);
    std::vector<char> claimed = w.view().claimed();
    for (std::size_t k = 0; k < c->crews.size(); ++k) {
      if (!w.view().crews[k].idle()) continue;
      for (int comp : w.view().open_components(*c, c->crews[k].type))
        if (!claimed[comp]) {
          a.target[k] = comp;
          claimed[comp] = 1;
          break;
        }
    }
    world_costs.push_back(w.step(a).cost);
  }
  const auto v = initial_view(*c);
  Simulator sim(*c, v, component_damage(*c, v, truth_damage(*c, truth)), constant_rate(ev), {});
  for (int k = 0; k < sim.num_crews(); ++k) sim.set_policy(k, lowest_open());
  sim.run();
  ASSERT_EQ(sim.step_costs().size(), world_costs.size());
  for (std::size_t t = 0; t < world_costs.size(); ++t) EXPECT_NEAR(sim.step_costs()[t], world_costs[t], 1e-9) << t;
  EXPECT_NEAR(sim.cost(), w.cost(), 1e-9);
}

TEST(Simulator, ResumesFromMidEpisodeView) {
  auto c = std::make_shared<const CaseModel>(load_case(fixture("case13x7.json")));
  const GroundTruth truth = load_truth(fixture("case13x7_truth.json"));
  auto ev = vpfa(c);
  dynamics::World w(c, ev, &truth);
  const auto damage = truth_damage(*c, truth);
  // Run the world to t=5 with fixed routes, then hand over to the simulator.
  const std::vector<std::vector<std::string>> names = {
      {"F1", "F2", "F3", "F4", "F5"}, {"F6", "F7", "F8", "F9"}, {"P1", "P2", "P3", "P4", "P5"}};
  std::vector<std::vector<int>> routes(3);
  for (int k = 0; k < 3; ++k)
    for (const auto& id : names[k]) routes[k].push_back(c->component_index(id));
  auto next_of = [&](const dynamics::WorldView& v, int k) {
    for (int j : routes[k])
      if (v.condition[j] != Condition::Operational && !v.claimed()[j]) return j;
    return -1;
  };
  std::vector<double> world_costs;
  while (w.t() < c->time.horizon_steps) {
    if (w.t() == 5) {
      const auto v = w.view();
      std::vector<char> pipes(c->num_pipes());
      for (int p = 0; p < c->num_pipes(); ++p)
        pipes[p] = damage[p] && v.condition[c->pipe_component(p)] != Condition::Operational;
      Simulator sim(*c, v, component_damage(*c, v, pipes), constant_rate(ev), {});
      for (int k = 0; k < sim.num_crews(); ++k) sim.set_policy(k, route_policy(routes[k]));
      sim.run();
      dynamics::World rest = w;
      double total = 0.0;
      while (rest.t() < c->time.horizon_steps) {
        dynamics::DispatchAction a;
        a.target.assign(c->crews.size(), -1);
        for (int k = 0; k < 3; ++k)
          if (rest.view().crews[k].idle()) a.target[k] = next_of(rest.view(), k);
        total += rest.step(a).cost;
      }
      EXPECT_NEAR(sim.cost(), total, 1e-9);
      EXPECT_NEAR(sim.cost_from(5), total, 1e-9);
      break;
    }
    dynamics::DispatchAction a;
    a.target.assign(c->crews.size(), -1);
    for (int k = 0; k < 3; ++k)
      if (w.view().crews[k].idle()) a.target[k] = next_of(w.view(), k);
    w.step(a);
  }
}

TEST(Simulator, CostFromIsSuffixSum) {
  std::mt19937 rng(3);
  auto c = star(rng, 3);
  const auto v = initial_view(*c);
  Simulator sim(*c, v, component_damage(*c, v, {1, 1, 1}), constant_rate(vpfa(c)), {});
  sim.set_policy(0, lowest_open());
  sim.run();
  double acc = 0.0;
  for (int t = c->time.horizon_steps - 1; t >= 0; --t) {
    acc += sim.step_costs()[t];
    EXPECT_NEAR(sim.cost_from(t), acc, 1e-9);
  }
}

TEST(Ucb, SelectionExample) {
  std::vector<ActionStat> s = {{0, 10, 1}, {1, 12, 100}};
  EXPECT_NEAR(ucb_score(10, 1, 101, 5), -0.74, 0.01);
  EXPECT_NEAR(ucb_score(12, 100, 101, 5), 10.93, 0.01);
  EXPECT_EQ(ucb_select(s, 101, 5), 0);
  EXPECT_EQ(ucb_select(s, 101, 0), 0);
  s[0].q = 13;
  EXPECT_EQ(ucb_select(s, 101, 0), 1);
  s.push_back({2, 0, 0});
  EXPECT_EQ(ucb_select(s, 101, 0), 2);
  EXPECT_THROW(ucb_select({}, 1, 1), PlanError);
}

TEST(Backprop, IncrementalMeanFromEachStart) {
  ActionStat fresh{0, 0, 0};
  backpropagate({{&fresh, 0}}, {60, 40}, 0);
  EXPECT_DOUBLE_EQ(fresh.q, 100);
  EXPECT_EQ(fresh.n, 1);

  ActionStat a{0, 50, 2};
  backpropagate({{&a, 3}}, {80}, 3);
  EXPECT_DOUBLE_EQ(a.q, 60);
  EXPECT_EQ(a.n, 3);

  ActionStat top{0, 0, 0}, deep{1, 0, 0};
  backpropagate({{&top, 2}, {&deep, 5}}, {10, 20, 30, 40, 50, 60}, 2);
  EXPECT_DOUBLE_EQ(top.q, 210);
  EXPECT_DOUBLE_EQ(deep.q, 150);
  EXPECT_LE(deep.q, top.q);
}

TEST(BasePolicy, PicksBestGainPerStep) {
  // A unlocks 100 $/step over 4 steps, B unlocks 60 $/step over 2 steps.
  auto c = std::make_shared<CaseModel>();
  c->gas.nodes.push_back({.id = "N0", .pos = {0, 0}});
  c->gas.nodes.push_back({.id = "NA", .demand = 10, .shed_cost = 10, .pos = {1, 0}});
  c->gas.nodes.push_back({.id = "NB", .demand = 6, .shed_cost = 10, .pos = {-1, 0}});
  c->gas.nodes.push_back({.id = "NZ", .demand = 0, .shed_cost = 10, .pos = {0, 1}});
  c->gas.wells.push_back({.id = "W", .node = 0, .w_min = 0, .w_max = 100});
  c->gas.pipelines.push_back({.id = "A", .from = 0, .to = 1, .weymouth = 1000, .f_max = 100});
  c->gas.pipelines.push_back({.id = "B", .from = 0, .to = 2, .weymouth = 1000, .f_max = 100});
  c->gas.pipelines.push_back({.id = "Z", .from = 0, .to = 3, .weymouth = 1000, .f_max = 100});
  c->status = {ComponentStatus{.condition = Condition::Faulty, .repair_steps = 4},
               ComponentStatus{.condition = Condition::Faulty, .repair_steps = 2},
               ComponentStatus{.condition = Condition::Faulty, .repair_steps = 1}};
  c->crews.push_back({.id = "GC1", .type = CrewType::Gas, .depot = {0, -3}});
  c->time = {.dt_hours = 1.0, .horizon_steps = 20};
  c->finalize();
  std::shared_ptr<const CaseModel> cc = c;
  const auto v = initial_view(*c);
  Simulator sim(*c, v, {1, 1, 1}, constant_rate(vpfa(cc)), {});
  EXPECT_EQ(base_policy_target(sim, 0), c->component_index("B"));
  sim.assign(0, c->component_index("B"));
  sim.run(0);
  EXPECT_EQ(base_policy_target(sim, 0), c->component_index("A"));
  sim.assign(0, c->component_index("A"));
  sim.run(0);
  // Only the zero-gain pipeline is left.
  EXPECT_EQ(base_policy_target(sim, 0), c->component_index("Z"));
  sim.assign(0, c->component_index("Z"));
  sim.run(0);
  EXPECT_EQ(base_policy_target(sim, 0), -1);
}

TEST(Bts, SingleCandidateIsReturned) {
  std::mt19937 rng(5);
  Planned p = prepare(star(rng, 1), 20);
  const PlanResult r = plan_action(context(p), 0, {});
  EXPECT_EQ(r.target, 0);
  ASSERT_EQ(r.root.size(), 1u);
  EXPECT_EQ(r.root[0].n, 20);
}

TEST(Bts, EmptyScenarioSetThrows) {
  std::mt19937 rng(5);
  Planned p = prepare(star(rng, 2), 1);
  p.s.damaged.clear();
  EXPECT_THROW(plan_action(context(p), 0, {}), PlanError);
}

TEST(Bts, DeterministicWithVisitConservation) {
  auto c = std::make_shared<const CaseModel>(load_case(fixture("case13x7.json")));
  Planned p = prepare(c, 200);
  TreeConfig cfg;
  cfg.scenarios = 200;
  const int gas = c->crew_index("GC1");
  const PlanResult a = plan_action(context(p), gas, cfg);
  const PlanResult b = plan_action(context(p), gas, cfg);
  EXPECT_EQ(a.target, b.target);
  ASSERT_EQ(a.root.size(), b.root.size());
  int visits = 0;
  for (std::size_t i = 0; i < a.root.size(); ++i) {
    EXPECT_EQ(a.root[i].component, b.root[i].component);
    EXPECT_EQ(a.root[i].q, b.root[i].q);
    EXPECT_EQ(a.root[i].n, b.root[i].n);
    visits += a.root[i].n;
  }
  EXPECT_EQ(visits, 200);
  EXPECT_EQ(a.scenarios_used, 200);
  EXPECT_LE(static_cast<int>(a.root.size()), static_cast<int>(std::ceil(2 * std::sqrt(201.0))));
}

TEST(Bts, ConfirmedDamageMatchesExhaustiveSearch) {
  std::mt19937 rng(11);
  int exact = 0;
  const int trials = 30;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 2 + trial % 3;
    auto c = star(rng, n);
    Planned p = prepare(c, 1);
    // Every scenario is the same; repeat it so the tree gets enough visits.
    p.s.damaged.assign(2000, p.s.damaged[0]);
    const PlanResult r = plan_action(context(p), 0, {});

    // Exhaustive: every first and second target, then the base policy.
    const auto v = initial_view(*c);
    auto ev = vpfa(c);
    std::vector<double> best(c->num_components(), 1e300);
    for (int j1 = 0; j1 < n; ++j1) {
      Simulator s1(*c, v, std::vector<char>(n, 1), constant_rate(ev), {});
      s1.assign(0, j1);
      if (!s1.run(0)) {
        best[j1] = s1.cost();
        continue;
      }
      for (int j2 : s1.open(CrewType::Gas)) {
        Simulator s2 = s1;
        s2.assign(0, j2);
        s2.set_policy(0, base_policy());
        s2.run();
        best[j1] = std::min(best[j1], s2.cost());
      }
    }
    const double opt = *std::min_element(best.begin(), best.end());
    EXPECT_LE(best[r.target], opt * 1.01 + 1e-9) << "trial " << trial;
    exact += best[r.target] <= opt + 1e-9;
  }
  EXPECT_EQ(exact, trials);
}

TEST(Bts, SequentialCrewsCommitDistinctTargets) {
  std::mt19937 rng(2);
  auto c = star(rng, 4, {Condition::Faulty, Condition::Unknown, Condition::Unknown, Condition::Faulty});
  c->crews.push_back({.id = "GC2", .type = CrewType::Gas, .depot = {3, 3}});
  c->finalize();
  Planned p = prepare(c, 100);
  const auto res = plan_all_gas_crews(context(p), {}, {0, 1});
  ASSERT_EQ(res.size(), 2u);
  EXPECT_NE(res[0].target, res[1].target);
  Planned q = prepare(c, 100);
  const auto single = plan_action(context(q), 0, {});
  EXPECT_EQ(single.target, res[0].target);
}

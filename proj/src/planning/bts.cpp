#include "restore/bts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace restore::plan {

namespace {

struct ActionNode;

struct BeliefNode {
  int visits = 0;
  bool ready = false;
  std::vector<int> order;  // candidates, most promising first
  std::vector<std::unique_ptr<ActionNode>> children;
};

struct ActionNode {
  ActionStat stat;
  std::unique_ptr<BeliefNode> next[2];  // intact, faulty
};

// Expected shed reduction per expected step, used only to order candidates.
double expected_ratio(const Simulator& s, const belief::Belief& b, int crew, int j) {
  const CaseModel& c = s.model();
  Topology down = s.topology(), up = s.topology();
  down.set(j, false);
  up.set(j, true);
  const double gain = s.rate_with(down) - s.rate_with(up);
  double p = 1.0;
  if (c.is_pipe(j)) p = b.phi[c.pipe_of(j)];
  const ComponentStatus& st = c.status[j];
  double steps = dynamics::move_steps(c, s.position(crew), j);
  if (st.condition == Condition::Unknown) steps += st.inspect_steps + p * st.repair_steps;
  else steps += st.repair_steps;
  return p * gain / std::max(1.0, steps);
}

}  // namespace

double ucb_score(double q, int n, int parent_visits, double c) {
  if (n <= 0) return -std::numeric_limits<double>::infinity();
  return q - c * std::sqrt(std::log(static_cast<double>(std::max(parent_visits, 1))) / n);
}

int ucb_select(const std::vector<ActionStat>& stats, int parent_visits, double c) {
  if (stats.empty()) throw PlanError("ucb_select: no actions");
  for (std::size_t i = 0; i < stats.size(); ++i)
    if (stats[i].n == 0) return static_cast<int>(i);
  int best = 0;
  double best_score = ucb_score(stats[0].q, stats[0].n, parent_visits, c);
  for (std::size_t i = 1; i < stats.size(); ++i) {
    const double sc = ucb_score(stats[i].q, stats[i].n, parent_visits, c);
    if (sc < best_score || (sc == best_score && stats[i].q < stats[best].q)) {
      best = static_cast<int>(i);
      best_score = sc;
    }
  }
  return best;
}

void backpropagate(const std::vector<PathEntry>& path, const std::vector<double>& step_costs,
                   int first_step) {
  std::vector<double> suffix(step_costs.size() + 1, 0.0);
  for (int i = static_cast<int>(step_costs.size()) - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + step_costs[i];
  for (const auto& e : path) {
    const int idx = std::clamp(e.start - first_step, 0, static_cast<int>(step_costs.size()));
    ActionStat& s = *e.stat;
    s.q = (s.n * s.q + suffix[idx]) / (s.n + 1);
    s.n += 1;
  }
}

int base_policy_target(const Simulator& s, int crew) {
  const double base = s.rate_now();
  int best = -1;
  double best_ratio = 0.0;
  int best_work = 0, best_move = 0;
  for (int j : s.open(s.crew_type(crew))) {
    double gain = 0.0;
    if (s.damaged(j)) {
      Topology t = s.topology();
      t.set(j, true);
      gain = std::max(0.0, base - s.rate_with(t));
    }
    const int work = std::max(1, s.remaining(j));
    const int move = s.time_to_finish(crew, j) - s.remaining(j);
    const double ratio = gain / work;
    const double tol = 1e-9 * std::max(1.0, std::abs(best_ratio));
    bool better = best < 0 || ratio > best_ratio + tol;
    if (!better && std::abs(ratio - best_ratio) <= tol)
      better = work < best_work || (work == best_work && move < best_move);
    if (better) {
      best = j;
      best_ratio = ratio;
      best_work = work;
      best_move = move;
    }
  }
  return best;
}

Policy base_policy() { return [](const Simulator& s, int crew) { return base_policy_target(s, crew); }; }

Simulator scenario_simulator(const PlanContext& ctx, int scenario, int planning_crew, int horizon) {
  const CaseModel& c = *ctx.c;
  Simulator sim(c, *ctx.view, component_damage(c, *ctx.view, ctx.scenarios->damaged.at(scenario)),
                constant_rate(ctx.rollout_eval), SimOptions{horizon, {}, false});
  for (int k = 0; k < sim.num_crews(); ++k) {
    if (k == planning_crew) continue;
    if (c.crews[k].type == CrewType::Power) {
      const auto& r = k < static_cast<int>(ctx.power_routes.size()) ? ctx.power_routes[k] : std::vector<int>{};
      sim.set_policy(k, route_policy(r));
    } else {
      sim.set_policy(k, base_policy());
    }
    const int commit = k < static_cast<int>(ctx.committed.size()) ? ctx.committed[k] : -1;
    if (commit >= 0 && sim.idle(k) && !sim.resolved(commit) && !sim.claimed(commit)) sim.assign(k, commit);
  }
  return sim;
}

PlanResult plan_action(const PlanContext& ctx, int crew, const TreeConfig& cfg) {
  const auto t_begin = std::chrono::steady_clock::now();
  const CaseModel& c = *ctx.c;
  if (!ctx.scenarios || ctx.scenarios->size() == 0) throw PlanError("plan_action: empty scenario set");
  const int horizon = cfg.horizon > 0 ? cfg.horizon : c.time.horizon_steps;
  const int t0 = ctx.view->t;

  PlanResult out;
  out.crew = crew;

  // Exploration scale from the pessimistic topology over the horizon.
  out.exploration = cfg.exploration;
  if (out.exploration < 0) {
    Topology worst(c.num_components(), true);
    for (int i = 0; i < c.num_components(); ++i)
      if (ctx.view->condition[i] != Condition::Operational) worst.set(i, false);
    out.exploration = cfg.exploration_factor * ctx.rollout_eval->rate(worst) * c.time.dt_hours * horizon;
  }

  BeliefNode root;
  for (int s = 0; s < ctx.scenarios->size(); ++s) {
    if (cfg.deadline_seconds > 0 && s > 0) {
      const double spent = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
      if (spent > cfg.deadline_seconds) break;
    }
    Simulator sim = scenario_simulator(ctx, s, crew, horizon);
    if (s == 0 && !sim.idle(crew)) throw PlanError("plan_action: crew " + c.crews[crew].id + " is busy");

    std::vector<PathEntry> path;
    BeliefNode* node = &root;
    for (int depth = 0; depth < cfg.depth; ++depth) {
      if (depth > 0 && !sim.run(crew)) break;
      std::vector<int> open = sim.open(c.crews[crew].type);
      if (open.empty()) break;
      if (!node->ready) {
        std::vector<std::pair<double, int>> ranked;
        for (int j : open) ranked.emplace_back(-expected_ratio(sim, *ctx.belief, crew, j), j);
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto [r, j] : ranked) node->order.push_back(j);
        node->ready = true;
      }
      auto is_open = [&](int j) { return std::find(open.begin(), open.end(), j) != open.end(); };
      const int allowed = static_cast<int>(std::ceil(cfg.k_pw * std::pow(node->visits + 1, cfg.alpha_pw)));

      ActionNode* pick = nullptr;
      if (static_cast<int>(node->children.size()) < allowed) {
        for (int j : node->order) {
          if (!is_open(j)) continue;
          bool have = false;
          for (const auto& ch : node->children) have = have || ch->stat.component == j;
          if (have) continue;
          node->children.push_back(std::make_unique<ActionNode>());
          node->children.back()->stat.component = j;
          pick = node->children.back().get();
          break;
        }
      }
      if (!pick) {
        std::vector<ActionStat> stats;
        std::vector<ActionNode*> valid;
        int parent = 0;
        for (const auto& ch : node->children) {
          parent += ch->stat.n;
          if (is_open(ch->stat.component)) {
            stats.push_back(ch->stat);
            valid.push_back(ch.get());
          }
        }
        if (valid.empty()) break;
        pick = valid[ucb_select(stats, parent, out.exploration)];
      }
      node->visits += 1;
      const int j = pick->stat.component;
      path.push_back({&pick->stat, sim.now()});
      const int outcome = sim.damaged(j) ? 1 : 0;
      sim.assign(crew, j);
      if (!pick->next[outcome]) pick->next[outcome] = std::make_unique<BeliefNode>();
      node = pick->next[outcome].get();
    }
    sim.set_policy(crew, base_policy());
    sim.run();
    if (!path.empty()) backpropagate(path, sim.step_costs(), t0);
    out.scenarios_used = s + 1;
  }

  if (root.children.empty()) throw PlanError("plan_action: no candidate target for " + c.crews[crew].id);
  for (const auto& ch : root.children) out.root.push_back(ch->stat);
  int best = -1;
  for (int i = 0; i < static_cast<int>(out.root.size()); ++i)
    if (out.root[i].n > 0 && (best < 0 || out.root[i].q < out.root[best].q)) best = i;
  out.target = out.root[best].component;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return out;
}

std::vector<PlanResult> plan_all_gas_crews(PlanContext ctx, const TreeConfig& cfg,
                                           const std::vector<int>& order) {
  std::vector<PlanResult> out;
  ctx.committed.resize(ctx.c->crews.size(), -1);
  for (int k : order) {
    bool any = false;
    for (int j : ctx.view->open_components(*ctx.c, ctx.c->crews[k].type))
      any = any || (!ctx.view->claimed()[j] &&
                    std::find(ctx.committed.begin(), ctx.committed.end(), j) == ctx.committed.end());
    if (!any) {
      PlanResult none;
      none.crew = k;
      out.push_back(none);
      continue;
    }
    PlanResult r = plan_action(ctx, k, cfg);
    ctx.committed[k] = r.target;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace restore::plan

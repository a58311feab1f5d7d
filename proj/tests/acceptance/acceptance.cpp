// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion names as arguments to run a
// subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "restore/benchmark.hpp"
#include "restore/belief.hpp"
#include "restore/dynamics.hpp"
#include "restore/serialize.hpp"
#include "restore/session.hpp"
#include "restore/sim.hpp"
#include "support/instances.hpp"

using namespace restore;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and thresholds.
constexpr double kPhiTol = 0.02;
constexpr double kPriorTol = 1e-12;
constexpr double kPosteriorSeconds = 5.0;
constexpr int kMcSamples = 100000;
constexpr int kVpfaInstances = 1000;
constexpr double kFeasTol = 1e-6;
constexpr double kCostTol = 1e-6;
constexpr double kVpfaSeconds = 1e-3;
constexpr int kRollingInstances = 50;
constexpr int kHindsightInstances = 20;
constexpr double kRouteTol = 1e-6;
constexpr double kHindsightGap = 0.05;
constexpr double kBaselineGap = 0.15;
constexpr int kAnchorSeeds = 8;
constexpr double kStdRatio = 0.5;
constexpr double kTimeCorrelation = 0.95;
constexpr double kDecisionSeconds = 60.0;
constexpr double kOrderGap = 0.03;

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

std::string fixture(const std::string& name) { return std::string(RESTORE_FIXTURE_DIR) + "/" + name; }

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

run::SessionConfig case1(run::GasPolicy p, std::uint64_t seed = 1, int scenarios = 500) {
  run::SessionConfig cfg;
  cfg.case_path = fixture("case13x7.json");
  cfg.truth_path = fixture("case13x7_truth.json");
  cfg.gas_policy = p;
  cfg.seed = seed;
  cfg.scenarios = scenarios;
  return cfg;
}

run::SessionConfig case2(run::GasPolicy p) {
  run::SessionConfig cfg;
  cfg.case_path = fixture("case123x20.json");
  cfg.truth_path = fixture("case123x20_truth.json");
  cfg.gas_policy = p;
  return cfg;
}

Outcome posterior_exactness() {
  double worst_phi = 0.0, worst_prior = 0.0, slowest = 0.0;
  int checked = 0;
  for (const char* name : {"minimal", "case13x7", "case123x20"}) {
    auto c = std::make_shared<const CaseModel>(load_case(fixture(std::string(name) + ".json")));
    int unknown = 0;
    for (int p = 0; p < c->num_pipes(); ++p)
      unknown += c->status[c->pipe_component(p)].condition == Condition::Unknown;
    if (unknown > 10) continue;
    ++checked;
    const auto t0 = Clock::now();
    const belief::Belief b0 = belief::initial_belief(*c);
    const belief::Belief empty = belief::posterior_infer(*c, b0.prior, {});
    for (int p = 0; p < c->num_pipes(); ++p)
      if (b0.known[p] == belief::Knowledge::Unknown)
        worst_prior = std::max(worst_prior, std::abs(empty.phi[p] - b0.prior[p]));

    GroundTruth truth;
    const std::string truth_path = fixture(std::string(name) + "_truth.json");
    if (unknown > 0) truth = load_truth(truth_path);
    dynamics::World w(c, std::make_shared<flow::VpfaEvaluator>(c), &truth);
    belief::ServiceObservation obs;
    obs.unserved = w.initial_reading().unserved;
    obs.served = w.initial_reading().served;
    belief::InferenceOptions exact, mc;
    mc.mode = belief::InferenceMode::MonteCarlo;
    mc.samples = kMcSamples;
    const belief::Belief e = belief::posterior_infer(*c, b0.prior, obs, exact);
    const belief::Belief m = belief::posterior_infer(*c, b0.prior, obs, mc);
    for (int p = 0; p < c->num_pipes(); ++p) worst_phi = std::max(worst_phi, std::abs(e.phi[p] - m.phi[p]));
    slowest = std::max(slowest, seconds_since(t0));
  }
  return {checked > 0 && worst_phi <= kPhiTol && worst_prior <= kPriorTol && slowest < kPosteriorSeconds,
          fmt("%d fixtures, max|dphi|=%.4f (<=%.2f), prior err=%.1e (<=%.0e), slowest %.2fs (<%.0fs)", checked,
              worst_phi, kPhiTol, worst_prior, kPriorTol, slowest, kPosteriorSeconds)};
}

Outcome vpfa_soundness() {
  std::mt19937 rng(2024);
  double worst_feas = 0.0, worst_cost = 0.0;
  std::string where;
  for (int trial = 0; trial < kVpfaInstances; ++trial) {
    const CaseModel c = testkit::random_case(rng, 15, 10);
    const Topology up = testkit::random_topology(c, rng, 0.7);
    const flow::FlowSnapshot v = flow::vpfa_evaluate(c, up);
    const testkit::Check chk = testkit::check_snapshot(c, up, v, true);
    if (chk.worst > worst_feas) {
      worst_feas = chk.worst;
      where = chk.where;
    }
    const double below = flow::period_cost(c, flow::exact_flow(c, up)) - flow::period_cost(c, v);
    worst_cost = std::max(worst_cost, below);
  }
  auto c1p = std::make_shared<const CaseModel>(load_case(fixture("case13x7.json")));
  const CaseModel& c1 = *c1p;
  const GroundTruth truth = load_truth(fixture("case13x7_truth.json"));
  const Topology up = dynamics::World(c1p, std::make_shared<flow::VpfaEvaluator>(c1p), &truth).true_topology();
  const int reps = 2000;
  const auto t0 = Clock::now();
  double sink = 0.0;
  for (int i = 0; i < reps; ++i) sink += flow::vpfa_evaluate(c1, up).shed_rate();
  const double per = seconds_since(t0) / reps;
  (void)sink;
  return {worst_feas <= kFeasTol && worst_cost <= kCostTol && per < kVpfaSeconds,
          fmt("%d instances, worst violation %.1e%s%s, worst exact-minus-vpfa cost %.1e (<=%.0e), %.3f ms per eval",
              kVpfaInstances, worst_feas, where.empty() ? "" : " at ", where.c_str(), worst_cost, kCostTol,
              per * 1e3)};
}

Outcome routing_optimality() {
  std::mt19937 rng(4242);
  double worst_roll = 0.0, worst_hind = 0.0;
  for (int trial = 0; trial < kRollingInstances; ++trial) {
    const int faults = 1 + trial % 5, crews = 1 + (trial / 5) % 2;
    auto c = testkit::feeder(rng, faults, 0, crews, 0);
    const plan::GasProfile g = testkit::random_profile(*c, rng);
    plan::ScheduleOptions o;
    o.relative_gap = 1e-9;
    const plan::Schedule s = plan::rolling_power_schedule(*c, plan::initial_view(*c), g, o);
    const double best = testkit::brute_force_rolling(*c, g, crews);
    worst_roll = std::max(worst_roll, std::abs(s.objective - best) / std::max(1.0, best));
  }
  for (int trial = 0; trial < kHindsightInstances; ++trial) {
    const int lf = 1 + trial % 4, pf = 1 + trial % 3;
    auto c = testkit::feeder(rng, lf, pf, 1 + trial % 2, 1);
    std::shared_ptr<const CaseModel> cc = c;
    GroundTruth truth;
    for (int p = 0; p < c->num_pipes(); ++p)
      if (c->status[c->pipe_component(p)].condition == Condition::Unknown)
        truth[c->gas.pipelines[p].id] = std::uniform_int_distribution<int>(0, 3)(rng) > 0;
    auto ev = std::make_shared<flow::CachedEvaluator>(std::make_shared<flow::ExactEvaluator>(cc));
    plan::ScheduleOptions o;
    o.relative_gap = 1e-9;
    const plan::Schedule s = plan::hindsight_schedule(*c, truth, ev, o);
    const double best = testkit::brute_force_hindsight(*c, truth, ev);
    worst_hind = std::max(worst_hind, std::abs(s.objective - best) / std::max(1.0, best));
  }
  return {worst_roll <= kRouteTol && worst_hind <= kRouteTol,
          fmt("rolling %d instances worst rel err %.1e, hindsight %d instances worst rel err %.1e (<=%.0e)",
              kRollingInstances, worst_roll, kHindsightInstances, worst_hind, kRouteTol)};
}

// Shared by the ordering and scenario-count criteria.
const run::BenchmarkResult& case1_benchmark() {
  static const run::BenchmarkResult r = [] {
    run::BenchmarkConfig bc;
    bc.base = case1(run::GasPolicy::Bts);
    bc.policies = {run::GasPolicy::Bts, run::GasPolicy::Nfh, run::GasPolicy::Pbh, run::GasPolicy::Hindsight};
    bc.seeds = kSeeds;
    bc.sweep_scenarios = {100, 200, 400, 600, 800, 1000};
    return run::run_benchmark(bc);
  }();
  return r;
}

Outcome policy_ordering() {
  const run::BenchmarkResult& r = case1_benchmark();
  double bts = 0, nfh = 0, pbh = 0, hind = 0;
  int failed = 0;
  for (const auto& row : r.rows) {
    failed += row.failed;
    if (row.policy == run::GasPolicy::Bts) bts = row.median;
    if (row.policy == run::GasPolicy::Nfh) nfh = row.median;
    if (row.policy == run::GasPolicy::Pbh) pbh = row.median;
    if (row.policy == run::GasPolicy::Hindsight) hind = row.median;
  }
  const double vs_hind = std::abs(bts - hind) / hind;
  const double below_nfh = (nfh - bts) / nfh, below_pbh = (pbh - bts) / pbh;
  return {failed == 0 && vs_hind <= kHindsightGap && below_nfh >= kBaselineGap && below_pbh >= kBaselineGap,
          fmt("median BTS %.1f, hindsight %.1f (gap %.2f%% <=%.0f%%), NFH %.1f (BTS %.1f%% below), PBH %.1f "
              "(BTS %.1f%% below; need >=%.0f%%)",
              bts, hind, 100 * vs_hind, 100 * kHindsightGap, nfh, 100 * below_nfh, pbh, 100 * below_pbh,
              100 * kBaselineGap)};
}

Outcome bts_anchors() {
  const CaseModel c = load_case(fixture("case13x7.json"));
  const int p2 = c.component_index("P2"), p4 = c.component_index("P4");
  int hit0 = 0, hit9 = 0;
  bool conserved = true;
  for (std::uint64_t seed : kSeeds) {
    run::Session s(case1(run::GasPolicy::Bts, seed));
    s.run();
    for (const auto& d : s.decisions())
      for (const auto& g : d.gas_plans) {
        if (g.target < 0) continue;
        int visits = 0;
        for (const auto& a : g.root) visits += a.n;
        conserved = conserved && visits == s.config().scenarios;
        const auto best = std::min_element(g.root.begin(), g.root.end(),
                                           [](const auto& a, const auto& b) { return a.q < b.q; });
        if (d.t == 0 && best->component == p2 && g.target == p2) ++hit0;
        if (d.t == 9 && best->component == p4 && g.target == p4) ++hit9;
      }
  }
  return {hit0 >= kAnchorSeeds && hit9 >= kAnchorSeeds && conserved,
          fmt("t=0 argmin P2 in %d/10 seeds, t=9 argmin P4 in %d/10 seeds (need >=%d), visit sums %s", hit0, hit9,
              kAnchorSeeds, conserved ? "all equal M_s" : "DIFFER from M_s")};
}

Outcome scenario_count() {
  const run::BenchmarkResult& r = case1_benchmark();
  double std100 = -1, std500 = -1, slowest = 0;
  for (const auto& row : r.sweep) {
    if (row.scenarios == 100) std100 = row.stddev;
    slowest = std::max(slowest, row.max_decision_seconds);
  }
  for (const auto& row : r.rows)
    if (row.policy == run::GasPolicy::Bts) std500 = row.stddev;

  // Timing uses only decisions where the tree had a choice to make.
  std::vector<double> xs, ys;
  for (int m : {200, 400, 600, 800, 1000}) {
    double sum = 0.0;
    int count = 0;
    for (std::uint64_t seed : kSeeds) {
      run::Session s(case1(run::GasPolicy::Bts, seed, m));
      s.run();
      for (const auto& d : s.decisions()) {
        slowest = std::max(slowest, d.seconds);
        const bool searched = std::any_of(d.gas_plans.begin(), d.gas_plans.end(),
                                          [](const plan::PlanResult& g) { return g.root.size() > 1; });
        if (!searched) continue;
        sum += d.seconds;
        ++count;
      }
    }
    xs.push_back(m);
    ys.push_back(count ? sum / count : 0.0);
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double corr = sxx > 0 && syy > 0 ? sxy / std::sqrt(sxx * syy) : 0.0;
  std::string times;
  for (std::size_t i = 0; i < xs.size(); ++i) times += fmt(" %g:%.1fms", xs[i], ys[i] * 1e3);

  // Reported only: seed spread of the chosen root value at t=0.
  auto root_q_std = [](int m) {
    std::vector<double> q;
    for (std::uint64_t seed : kSeeds) {
      run::Session s(case1(run::GasPolicy::Bts, seed, m));
      for (const auto& g : s.plan().gas_plans)
        for (const auto& a : g.root)
          if (a.component == g.target) q.push_back(a.q);
    }
    return run::stddev(q);
  };
  return {std500 <= kStdRatio * std100 && corr >= kTimeCorrelation && slowest < kDecisionSeconds,
          fmt("cost std M_s=500 %.2f vs M_s=100 %.2f (ratio <=%.1f; root Q std %.1f vs %.1f), time corr %.3f "
              "(>=%.2f) [%s ], slowest decision %.2fs (<%.0fs)",
              std500, std100, kStdRatio, root_q_std(500), root_q_std(100), corr, kTimeCorrelation,
              times.c_str() + 1, slowest, kDecisionSeconds)};
}

struct LivenessRun {
  std::string label;
  run::EpisodeResult result;
};

std::vector<LivenessRun>& case2_runs() {
  static std::vector<LivenessRun> runs;
  return runs;
}

Outcome order_insensitivity() {
  run::SessionConfig fwd = case2(run::GasPolicy::Bts), rev = fwd;
  rev.reverse_gas_order = true;
  const run::EpisodeResult a = run::run_episode(fwd);
  const run::EpisodeResult b = run::run_episode(rev);
  case2_runs() = {{"case123x20/bts", a}, {"case123x20/bts-reversed", b}};
  const double gap = std::abs(a.total_cost - b.total_cost) / a.total_cost;
  return {a.finished && b.finished && gap <= kOrderGap,
          fmt("total cost %.1f forward vs %.1f reversed, change %.2f%% (<=%.0f%%)", a.total_cost, b.total_cost,
              100 * gap, 100 * kOrderGap)};
}

// Steps, logged total and replay of one episode; empty when all hold.
std::string audit(const std::string& label, const run::EpisodeResult& r, const CaseModel& c) {
  if (!r.finished) return label + " did not finish";
  if (r.steps > c.time.horizon_steps) return label + " ran past the horizon";
  std::istringstream in(r.log);
  double sum = 0.0, logged = -1.0;
  nlohmann::json config;
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    if (j["type"] == "config") config = j;
    if (j["type"] == "step") sum += j["cost"].get<double>();
    if (j["type"] == "summary") logged = j["total_cost"].get<double>();
  }
  if (logged != sum || r.total_cost != sum) return label + fmt(" logged %.17g vs summed %.17g", logged, sum);
  const run::EpisodeResult again = run::run_episode(io::config_from_json(config));
  if (again.log != r.log) return label + " replay differs";
  return "";
}

Outcome liveness_and_accounting() {
  std::vector<std::string> bad;
  int episodes = 0;
  for (const char* name : {"minimal", "case13x7"}) {
    const CaseModel c = load_case(fixture(std::string(name) + ".json"));
    for (run::GasPolicy p : {run::GasPolicy::Bts, run::GasPolicy::Nfh, run::GasPolicy::Pbh, run::GasPolicy::Hindsight}) {
      run::SessionConfig cfg = case1(p);
      cfg.case_path = fixture(std::string(name) + ".json");
      cfg.truth_path = std::string(name) == "minimal" ? "" : fixture(std::string(name) + "_truth.json");
      const std::string label = std::string(name) + "/" + run::to_string(p);
      try {
        if (cfg.truth_path.empty()) {
          auto cc = std::make_shared<const CaseModel>(c);
          run::Session s(cfg, cc, GroundTruth{});
          s.run();
          ++episodes;
          if (!s.world().finished()) bad.push_back(label + " did not finish");
          continue;
        }
        const std::string err = audit(label, run::run_episode(cfg), c);
        ++episodes;
        if (!err.empty()) bad.push_back(err);
      } catch (const std::exception& e) {
        bad.push_back(label + ": " + e.what());
      }
    }
  }
  if (case2_runs().empty()) order_insensitivity();
  const CaseModel c2 = load_case(fixture("case123x20.json"));
  for (std::size_t i = 0; i < case2_runs().size(); ++i) {
    const auto& r = case2_runs()[i];
    ++episodes;
    // One replay of the large case is enough; the rest get the finish and total checks.
    if (i == 0) {
      const std::string err = audit(r.label, r.result, c2);
      if (!err.empty()) bad.push_back(err);
    } else if (!r.result.finished) {
      bad.push_back(r.label + " did not finish");
    }
  }
  std::string detail = fmt("%d episodes on 3 fixtures", episodes);
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty(), detail};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"posterior_exactness", posterior_exactness},
      {"vpfa_soundness", vpfa_soundness},
      {"routing_optimality", routing_optimality},
      {"policy_ordering", policy_ordering},
      {"bts_anchors", bts_anchors},
      {"scenario_count", scenario_count},
      {"order_insensitivity", order_insensitivity},
      {"liveness_and_accounting", liveness_and_accounting},
  };
  std::vector<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.ok;
    std::printf("%s %s: %s [%.1fs]\n", o.ok ? "PASS" : "FAIL", c.name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

#include "restore/belief.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace restore::belief {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Directed reachability from the wells for one damage pattern and one set of
// completed repairs.
class Reach {
 public:
  explicit Reach(const CaseModel& c) : c_(c), seen_(c.gas.nodes.size()), stack_() {
    out_.resize(c.gas.nodes.size());
    for (int p = 0; p < c.num_pipes(); ++p) out_[c.gas.pipelines[p].from].push_back(p);
  }

  const std::vector<char>& run(const std::vector<char>& damaged, const std::vector<char>& repaired) {
    std::fill(seen_.begin(), seen_.end(), 0);
    stack_.clear();
    for (const auto& w : c_.gas.wells)
      if (w.w_max > 0 && !seen_[w.node]) {
        seen_[w.node] = 1;
        stack_.push_back(w.node);
      }
    while (!stack_.empty()) {
      const int v = stack_.back();
      stack_.pop_back();
      for (int p : out_[v]) {
        if (damaged[p] && !repaired[p]) continue;
        const int u = c_.gas.pipelines[p].to;
        if (!seen_[u]) {
          seen_[u] = 1;
          stack_.push_back(u);
        }
      }
    }
    return seen_;
  }

 private:
  const CaseModel& c_;
  std::vector<std::vector<int>> out_;
  std::vector<char> seen_;
  std::vector<int> stack_;
};

struct Epoch {
  std::vector<char> repaired;
  std::vector<int> unserved;
  std::vector<int> served;
};

std::vector<Epoch> epochs(const CaseModel& c, const Belief& b) {
  std::vector<Epoch> out;
  for (const auto& r : b.record) {
    Epoch e;
    e.repaired.assign(c.num_pipes(), 0);
    for (int p : r.repaired) e.repaired.at(p) = 1;
    e.unserved = r.unserved;
    if (b.options.condition_on_served) e.served = r.served;
    if (e.unserved.empty() && e.served.empty()) continue;
    out.push_back(std::move(e));
  }
  return out;
}

bool readings_hold(Reach& reach, const std::vector<Epoch>& ep, const std::vector<char>& damaged) {
  for (const auto& e : ep) {
    const auto& seen = reach.run(damaged, e.repaired);
    for (int n : e.unserved)
      if (seen[n]) return false;
    for (int n : e.served)
      if (!seen[n]) return false;
  }
  return true;
}

std::vector<char> pinned_pattern(const Belief& b) {
  std::vector<char> d(b.known.size(), 0);
  for (std::size_t p = 0; p < b.known.size(); ++p) d[p] = b.known[p] == Knowledge::Faulty;
  return d;
}

[[noreturn]] void zero_evidence(const Belief& b) {
  std::ostringstream msg;
  msg << "zero evidence: no damage pattern over " << b.free_pipes().size()
      << " uncertain pipelines explains the " << b.record.size() << " recorded readings";
  throw BeliefError(msg.str());
}

void infer_exact(const CaseModel& c, Belief& b, const std::vector<int>& free) {
  if (static_cast<int>(free.size()) > b.options.max_exact_unknowns)
    throw BeliefError("exact inference limited to " + std::to_string(b.options.max_exact_unknowns) +
                      " uncertain pipelines, got " + std::to_string(free.size()));
  Reach reach(c);
  const auto ep = epochs(c, b);
  std::vector<char> damaged = pinned_pattern(b);
  std::vector<double> mass(free.size(), 0.0);
  double total = 0.0;
  const std::uint64_t n = std::uint64_t{1} << free.size();
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    double w = 1.0;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const bool bad = mask >> k & 1u;
      damaged[free[k]] = bad;
      w *= bad ? b.prior[free[k]] : 1.0 - b.prior[free[k]];
    }
    if (w == 0.0 || !readings_hold(reach, ep, damaged)) continue;
    total += w;
    for (std::size_t k = 0; k < free.size(); ++k)
      if (mask >> k & 1u) mass[k] += w;
  }
  if (total <= 0.0) zero_evidence(b);
  for (std::size_t k = 0; k < free.size(); ++k) b.phi[free[k]] = std::clamp(mass[k] / total, 0.0, 1.0);
}

void infer_monte_carlo(const CaseModel& c, Belief& b, const std::vector<int>& free) {
  Reach reach(c);
  const auto ep = epochs(c, b);
  std::vector<char> damaged = pinned_pattern(b);
  std::vector<std::int64_t> hits(free.size(), 0);
  std::int64_t accepted = 0;
  std::uint64_t counter = 0;
  // Draws until `samples` configurations are accepted or the budget runs out.
  const std::int64_t budget = 100 * static_cast<std::int64_t>(b.options.samples);
  for (std::int64_t draw = 0; draw < budget && accepted < b.options.samples; ++draw) {
    for (int p : free) damaged[p] = counter_uniform(b.options.seed, counter++) < b.prior[p];
    if (!readings_hold(reach, ep, damaged)) continue;
    ++accepted;
    for (std::size_t k = 0; k < free.size(); ++k) hits[k] += damaged[free[k]];
  }
  if (accepted == 0) zero_evidence(b);
  for (std::size_t k = 0; k < free.size(); ++k)
    b.phi[free[k]] = static_cast<double>(hits[k]) / static_cast<double>(accepted);
}

}  // namespace

double prior_failure_prob(double pgv, double length_km) {
  if (!(pgv >= 0.0) || !(length_km >= 0.0))
    throw std::domain_error("prior_failure_prob: pgv and length must be nonnegative");
  return 1.0 - std::exp(-0.00003 * std::pow(pgv, 2.25) * length_km);
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t x = splitmix64(seed ^ splitmix64(counter));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

std::vector<int> Belief::free_pipes() const {
  std::vector<int> out;
  for (std::size_t p = 0; p < known.size(); ++p)
    if (known[p] == Knowledge::Unknown) out.push_back(static_cast<int>(p));
  return out;
}

bool consistent(const CaseModel& c, const Belief& b, const std::vector<char>& damaged) {
  for (std::size_t p = 0; p < b.known.size(); ++p) {
    if (b.known[p] == Knowledge::Faulty && !damaged[p]) return false;
    if (b.known[p] == Knowledge::Intact && damaged[p]) return false;
  }
  Reach reach(c);
  return readings_hold(reach, epochs(c, b), damaged);
}

Belief initial_belief(const CaseModel& c, InferenceOptions options) {
  Belief b;
  b.options = options;
  const int np = c.num_pipes();
  b.prior.resize(np);
  b.known.resize(np);
  b.repaired.assign(np, 0);
  b.phi.resize(np);
  for (int p = 0; p < np; ++p) {
    const int comp = c.pipe_component(p);
    b.prior[p] = c.prior_of(comp);
    switch (c.status[comp].condition) {
      case Condition::Operational: b.known[p] = Knowledge::Intact; break;
      case Condition::Faulty: b.known[p] = Knowledge::Faulty; break;
      case Condition::Unknown: b.known[p] = Knowledge::Unknown; break;
    }
    b.phi[p] = b.known[p] == Knowledge::Unknown ? b.prior[p] : (b.known[p] == Knowledge::Faulty ? 1.0 : 0.0);
  }
  return b;
}

Belief reinfer(const CaseModel& c, Belief b) {
  for (std::size_t p = 0; p < b.known.size(); ++p) {
    if (b.known[p] == Knowledge::Intact) b.phi[p] = 0.0;
    else if (b.known[p] == Knowledge::Faulty) b.phi[p] = b.repaired[p] ? 0.0 : 1.0;
  }
  const std::vector<int> free = b.free_pipes();
  if (b.options.mode == InferenceMode::Exact) infer_exact(c, b, free);
  else infer_monte_carlo(c, b, free);
  return b;
}

Belief posterior_infer(const CaseModel& c, const std::vector<double>& priors,
                       const ServiceObservation& obs, InferenceOptions options) {
  Belief b = initial_belief(c, options);
  if (priors.size() != b.prior.size())
    throw BeliefError("prior vector has " + std::to_string(priors.size()) + " entries, expected " +
                      std::to_string(b.prior.size()));
  for (std::size_t p = 0; p < priors.size(); ++p)
    if (b.known[p] == Knowledge::Unknown) b.prior[p] = priors[p];
  for (const auto& ins : obs.inspections) {
    const Knowledge k = ins.faulty ? Knowledge::Faulty : Knowledge::Intact;
    if (b.known.at(ins.pipe) != Knowledge::Unknown && b.known[ins.pipe] != k)
      throw BeliefError("contradiction: inspection of " + c.gas.pipelines[ins.pipe].id);
    b.known[ins.pipe] = k;
  }
  for (int p : obs.repaired) {
    if (b.known.at(p) == Knowledge::Intact)
      throw BeliefError("contradiction: repair of intact pipeline " + c.gas.pipelines[p].id);
    b.known[p] = Knowledge::Faulty;
    b.repaired[p] = 1;
  }
  b.record.push_back({obs.unserved, obs.served, {}, obs.repaired});
  return reinfer(c, std::move(b));
}

Belief apply_observation(const CaseModel& c, const Belief& b, const BeliefEvent& event) {
  Belief next = b;
  if (const auto* ins = std::get_if<Inspection>(&event)) {
    const Knowledge k = ins->faulty ? Knowledge::Faulty : Knowledge::Intact;
    const Knowledge had = b.known.at(ins->pipe);
    if (had == k) return b;
    if (had != Knowledge::Unknown)
      throw BeliefError("contradiction: " + c.gas.pipelines[ins->pipe].id + " already confirmed " +
                        (had == Knowledge::Faulty ? "faulty" : "intact"));
    next.known[ins->pipe] = k;
  } else if (const auto* rep = std::get_if<RepairDone>(&event)) {
    if (b.known.at(rep->pipe) == Knowledge::Intact)
      throw BeliefError("contradiction: repair of intact pipeline " + c.gas.pipelines[rep->pipe].id);
    if (b.repaired[rep->pipe]) return b;
    next.known[rep->pipe] = Knowledge::Faulty;
    next.repaired[rep->pipe] = 1;
  } else {
    const auto& sc = std::get<ServiceChange>(event);
    ServiceObservation obs{sc.unserved, sc.served, {}, {}};
    for (std::size_t p = 0; p < b.repaired.size(); ++p)
      if (b.repaired[p]) obs.repaired.push_back(static_cast<int>(p));
    std::sort(obs.unserved.begin(), obs.unserved.end());
    std::sort(obs.served.begin(), obs.served.end());
    for (int n : obs.unserved)
      if (std::binary_search(obs.served.begin(), obs.served.end(), n))
        throw BeliefError("node " + c.gas.nodes.at(n).id + " reported both served and unserved");
    if (!b.record.empty()) {
      const auto& last = b.record.back();
      if (last.unserved == obs.unserved && last.served == obs.served && last.repaired == obs.repaired)
        return b;
    }
    next.record.push_back(std::move(obs));
  }
  return reinfer(c, std::move(next));
}

ScenarioSet sample_scenarios(const CaseModel& c, const Belief& b, int count, std::uint64_t seed) {
  if (count < 1) throw BeliefError("scenario count must be at least 1");
  ScenarioSet set;
  set.seed = seed;
  Reach reach(c);
  const auto ep = epochs(c, b);
  const std::vector<int> free = b.free_pipes();
  std::vector<char> damaged = pinned_pattern(b);
  const std::int64_t budget = 100 * static_cast<std::int64_t>(count);
  std::uint64_t counter = 0;
  while (set.size() < count) {
    if (set.draws >= budget)
      throw BeliefError("rejection budget exhausted: " + std::to_string(set.size()) + " of " +
                        std::to_string(count) + " scenarios after " + std::to_string(budget) + " draws");
    ++set.draws;
    for (int p : free) damaged[p] = counter_uniform(seed, counter++) < b.phi[p];
    if (!readings_hold(reach, ep, damaged)) continue;
    std::vector<char> now(damaged.size());
    for (std::size_t p = 0; p < now.size(); ++p) now[p] = damaged[p] && !b.repaired[p];
    set.damaged.push_back(std::move(now));
  }
  return set;
}

ServiceChange read_signals(const CaseModel& c, const std::vector<char>& node_served) {
  ServiceChange out;
  for (std::size_t j = 0; j < c.gas.nodes.size(); ++j) {
    if (c.gas.nodes[j].signal == OutageSignal::None) continue;
    (node_served[j] ? out.served : out.unserved).push_back(static_cast<int>(j));
  }
  return out;
}

}  // namespace restore::belief

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "restore/dispatch.hpp"

namespace restore::plan {

namespace {

struct Key {
  Topology up;
  int segment;
  bool operator==(const Key&) const = default;
};
struct KeyHash {
  std::size_t operator()(const Key& k) const { return TopologyHash{}(k.up) * 31 + k.segment; }
};

using Completion = std::pair<int, int>;  // step, component

class Pricer {
 public:
  explicit Pricer(const RouteProblem& p) : p_(p), breaks_(p.rate_breaks) {
    std::sort(breaks_.begin(), breaks_.end());
  }

  // Cost of the horizon with the given completions (any order).
  double cost(std::vector<Completion> done) {
    std::sort(done.begin(), done.end());
    Topology up = p_.base;
    double total = 0.0;
    std::size_t next_done = 0, next_break = 0;
    int t = p_.start;
    while (t < p_.horizon) {
      while (next_done < done.size() && done[next_done].first <= t) up.set(done[next_done++].second, true);
      while (next_break < breaks_.size() && breaks_[next_break] <= t) ++next_break;
      int end = p_.horizon;
      if (next_done < done.size()) end = std::min(end, done[next_done].first);
      if (next_break < breaks_.size()) end = std::min(end, breaks_[next_break]);
      total += rate(up, static_cast<int>(next_break), t) * (end - t);
      t = end;
    }
    return total * p_.c->time.dt_hours;
  }

 private:
  double rate(const Topology& up, int segment, int t) {
    Key k{up, segment};
    auto it = memo_.find(k);
    if (it != memo_.end()) return it->second;
    const double r = p_.rate(up, t);
    memo_.emplace(std::move(k), r);
    return r;
  }

  const RouteProblem& p_;
  std::vector<int> breaks_;
  std::unordered_map<Key, double, KeyHash> memo_;
};

bool compatible(const CaseModel& c, int crew, int comp) {
  return (c.crews[crew].type == CrewType::Power) == c.is_line(comp);
}

class Search {
 public:
  explicit Search(const RouteProblem& p) : p_(p), pricer_(p) {
    const int n = static_cast<int>(p.crews.size());
    pos_ = p.position;
    free_ = p.free_at;
    open_.assign(n, 1);
    routes_.assign(n, {});
    remaining_.assign(p.c->num_components(), 0);
    for (int j : p.jobs) remaining_[j] = 1;
    for (int k = 0; k < n; ++k)
      if (p.pinned[k] >= 0) {
        routes_[k].push_back(p.pinned[k]);
        if (p.free_at[k] < p.horizon) done_.emplace_back(p.free_at[k], p.pinned[k]);
      }
    left_ = static_cast<int>(p.jobs.size());
  }

  RouteSolution run() {
    RouteSolution out;
    const double root = bound();
    dfs();
    if (nodes_ > p_.node_limit) polish();
    out.routes = best_routes_;
    out.cost = best_;
    out.nodes = nodes_;
    out.optimal = nodes_ <= p_.node_limit;
    out.bound = out.optimal ? best_ : root;
    out.completion.assign(p_.c->num_components(), -1);
    for (auto [t, j] : best_done_) out.completion[j] = t;
    return out;
  }

 private:
  int finish(int k, int j) const {
    return free_[k] + dynamics::move_steps(*p_.c, pos_[k], j) + p_.duration[j];
  }

  // Completions so far plus every remaining job at its earliest step.
  double bound() {
    std::vector<Completion> all = done_;
    for (int j : p_.jobs) {
      if (!remaining_[j]) continue;
      int best = std::numeric_limits<int>::max();
      for (std::size_t k = 0; k < open_.size(); ++k)
        if (open_[k] && compatible(*p_.c, p_.crews[k], j)) best = std::min(best, finish(k, j));
      if (best < p_.horizon) all.emplace_back(best, j);
    }
    return pricer_.cost(std::move(all));
  }

  bool prunable(double b) const {
    if (best_ == std::numeric_limits<double>::infinity()) return false;
    return b >= best_ - std::max(1e-9, p_.relative_gap * std::abs(best_));
  }

  void leaf() {
    const double v = pricer_.cost(done_);
    if (v < best_) {
      best_ = v;
      best_routes_ = routes_;
      best_done_ = done_;
      // Jobs left past the horizon go to the first compatible crew.
      for (int j : p_.jobs)
        if (remaining_[j])
          for (std::size_t k = 0; k < routes_.size(); ++k)
            if (compatible(*p_.c, p_.crews[k], j)) {
              best_routes_[k].push_back(j);
              break;
            }
    }
  }

  void dfs() {
    if (++nodes_ > p_.node_limit) return;
    int k = -1;
    for (std::size_t i = 0; i < open_.size(); ++i)
      if (open_[i] && (k < 0 || free_[i] < free_[k])) k = static_cast<int>(i);
    if (left_ == 0 || k < 0 || free_[k] + 1 >= p_.horizon) {
      leaf();
      return;
    }

    struct Child {
      double bound;
      int job;  // -1: the crew stops
    };
    std::vector<Child> children;
    const LocationSlot pos = pos_[k];
    const int free = free_[k];
    for (int j : p_.jobs) {
      if (!remaining_[j] || !compatible(*p_.c, p_.crews[k], j)) continue;
      const int e = finish(k, j);
      if (e >= p_.horizon) continue;
      apply(k, j, e);
      children.push_back({bound(), j});
      undo(k, j, pos, free);
    }
    // Stopping is allowed while another open crew can take every remaining job
    // this one could still finish in time.
    bool can_stop = true;
    for (int j : p_.jobs) {
      if (!remaining_[j] || !compatible(*p_.c, p_.crews[k], j) || finish(k, j) >= p_.horizon) continue;
      bool other = false;
      for (std::size_t i = 0; i < open_.size(); ++i)
        other = other || (static_cast<int>(i) != k && open_[i] && compatible(*p_.c, p_.crews[i], j));
      can_stop = can_stop && other;
    }
    if (can_stop) {
      open_[k] = 0;
      children.push_back({bound(), -1});
      open_[k] = 1;
    }
    if (children.empty()) {
      leaf();
      return;
    }
    std::stable_sort(children.begin(), children.end(),
                     [](const Child& a, const Child& b) { return a.bound < b.bound; });
    for (const Child& ch : children) {
      if (prunable(ch.bound)) break;
      if (nodes_ > p_.node_limit) return;
      if (ch.job < 0) {
        open_[k] = 0;
        dfs();
        open_[k] = 1;
      } else {
        apply(k, ch.job, finish(k, ch.job));
        dfs();
        undo(k, ch.job, pos, free);
      }
    }
  }

  // Cost of fixed routes; fills the completions before the horizon.
  double evaluate(const std::vector<std::vector<int>>& routes, std::vector<Completion>& done) {
    done.clear();
    for (std::size_t k = 0; k < routes.size(); ++k) {
      LocationSlot pos = p_.position[k];
      int free = p_.free_at[k];
      std::size_t first = 0;
      if (p_.pinned[k] >= 0) {
        if (free < p_.horizon) done.emplace_back(free, p_.pinned[k]);
        first = 1;
      }
      for (std::size_t i = first; i < routes[k].size(); ++i) {
        const int j = routes[k][i];
        free += dynamics::move_steps(*p_.c, pos, j) + p_.duration[j];
        pos = p_.c->component_slot(j);
        if (free < p_.horizon) done.emplace_back(free, j);
      }
    }
    return pricer_.cost(done);
  }

  // First-improvement local search over single-job moves and pairwise swaps,
  // for when the tree search ran out of nodes.
  void polish() {
    const int n = static_cast<int>(best_routes_.size());
    auto first_free = [&](int k) { return p_.pinned[k] >= 0 ? 1 : 0; };
    std::vector<Completion> done;
    auto better = [&](std::vector<std::vector<int>>& cand) {
      const double v = evaluate(cand, done);
      if (v < best_ - std::max(1e-9, 1e-12 * std::abs(best_))) {
        best_ = v;
        best_routes_ = cand;
        best_done_ = done;
        return true;
      }
      return false;
    };
    for (int round = 0; round < 200; ++round) {
      bool improved = false;
      for (int a = 0; a < n && !improved; ++a)
        for (int i = first_free(a); i < static_cast<int>(best_routes_[a].size()) && !improved; ++i) {
          const int j = best_routes_[a][i];
          for (int b = 0; b < n && !improved; ++b) {
            if (!compatible(*p_.c, p_.crews[b], j)) continue;
            // Move j to another position.
            std::vector<std::vector<int>> cand = best_routes_;
            cand[a].erase(cand[a].begin() + i);
            for (int q = first_free(b); q <= static_cast<int>(cand[b].size()) && !improved; ++q) {
              if (a == b && q == i) continue;
              std::vector<std::vector<int>> c2 = cand;
              c2[b].insert(c2[b].begin() + q, j);
              improved = better(c2);
            }
            // Swap j with a job on crew b.
            for (int q = first_free(b); q < static_cast<int>(best_routes_[b].size()) && !improved; ++q) {
              if (a == b && q <= i) continue;
              const int o = best_routes_[b][q];
              if (!compatible(*p_.c, p_.crews[a], o)) continue;
              std::vector<std::vector<int>> c2 = best_routes_;
              std::swap(c2[a][i], c2[b][q]);
              improved = better(c2);
            }
          }
        }
      if (!improved) break;
    }
  }

  void apply(int k, int j, int e) {
    remaining_[j] = 0;
    --left_;
    routes_[k].push_back(j);
    done_.emplace_back(e, j);
    pos_[k] = p_.c->component_slot(j);
    free_[k] = e;
  }
  void undo(int k, int j, LocationSlot pos, int free) {
    remaining_[j] = 1;
    ++left_;
    routes_[k].pop_back();
    done_.pop_back();
    pos_[k] = pos;
    free_[k] = free;
  }

  const RouteProblem& p_;
  Pricer pricer_;
  std::vector<LocationSlot> pos_;
  std::vector<int> free_;
  std::vector<char> open_, remaining_;
  std::vector<std::vector<int>> routes_, best_routes_;
  std::vector<Completion> done_, best_done_;
  int left_ = 0;
  long nodes_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

}  // namespace

RouteSolution solve_routes(const RouteProblem& p) {
  const int n = static_cast<int>(p.crews.size());
  if (static_cast<int>(p.position.size()) != n || static_cast<int>(p.free_at.size()) != n ||
      static_cast<int>(p.pinned.size()) != n)
    throw PlanError("solve_routes: crew arrays differ in length");
  for (int j : p.jobs) {
    bool any = false;
    for (int k : p.crews) any = any || compatible(*p.c, k, j);
    if (!any) throw PlanError("solve_routes: no crew can take " + p.c->slot_label(j));
  }
  return Search(p).run();
}

double route_cost(const RouteProblem& p, const std::vector<std::vector<int>>& routes,
                  std::vector<int>* completion) {
  std::vector<Completion> done;
  for (std::size_t k = 0; k < routes.size(); ++k) {
    LocationSlot pos = p.position[k];
    int free = p.free_at[k];
    std::size_t first = 0;
    if (p.pinned[k] >= 0) {
      if (free < p.horizon) done.emplace_back(free, p.pinned[k]);
      first = 1;
    }
    for (std::size_t i = first; i < routes[k].size(); ++i) {
      const int j = routes[k][i];
      free += dynamics::move_steps(*p.c, pos, j) + p.duration[j];
      pos = p.c->component_slot(j);
      if (free < p.horizon) done.emplace_back(free, j);
    }
  }
  if (completion) {
    completion->assign(p.c->num_components(), -1);
    for (auto [t, j] : done) (*completion)[j] = t;
  }
  return Pricer(p).cost(std::move(done));
}

}  // namespace restore::plan

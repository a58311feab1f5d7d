#include <numeric>
#include <queue>

#include "restore/flow.hpp"

namespace restore::flow {

namespace {

// Labels connected components; ids follow the lowest member index.
std::vector<int> components(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [a, b] : edges) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> label(n, -1), root_label(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

}  // namespace

IslandPartition detect_islands(const CaseModel& c, const Topology& up) {
  IslandPartition out;
  std::vector<std::pair<int, int>> edges;
  for (int l = 0; l < c.num_lines(); ++l)
    if (up.up(l)) edges.emplace_back(c.power.lines[l].from, c.power.lines[l].to);
  out.bus_island = components(static_cast<int>(c.power.buses.size()), edges);

  edges.clear();
  for (int p = 0; p < c.num_pipes(); ++p)
    if (up.up(c.pipe_component(p)))
      edges.emplace_back(c.gas.pipelines[p].from, c.gas.pipelines[p].to);
  out.node_island = components(static_cast<int>(c.gas.nodes.size()), edges);

  auto group = [](const std::vector<int>& label) {
    int k = 0;
    for (int v : label) k = std::max(k, v + 1);
    std::vector<std::vector<int>> g(k);
    for (int i = 0; i < static_cast<int>(label.size()); ++i) g[label[i]].push_back(i);
    return g;
  };
  out.power_islands = group(out.bus_island);
  out.gas_islands = group(out.node_island);
  out.island_generators.resize(out.power_islands.size());
  for (int g = 0; g < static_cast<int>(c.power.generators.size()); ++g)
    out.island_generators[out.bus_island[c.power.generators[g].bus]].push_back(g);
  out.island_wells.resize(out.gas_islands.size());
  for (int w = 0; w < static_cast<int>(c.gas.wells.size()); ++w)
    out.island_wells[out.node_island[c.gas.wells[w].node]].push_back(w);
  return out;
}

std::vector<char> gas_reachable(const CaseModel& c, const Topology& up) {
  const int n = static_cast<int>(c.gas.nodes.size());
  std::vector<std::vector<int>> out(n);
  for (int p = 0; p < c.num_pipes(); ++p)
    if (up.up(c.pipe_component(p))) out[c.gas.pipelines[p].from].push_back(c.gas.pipelines[p].to);
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  for (const auto& w : c.gas.wells)
    if (w.w_max > 0 && !seen[w.node]) {
      seen[w.node] = 1;
      q.push(w.node);
    }
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int u : out[v])
      if (!seen[u]) {
        seen[u] = 1;
        q.push(u);
      }
  }
  return seen;
}

void price(const CaseModel& c, FlowSnapshot& s) {
  s.power_shed = 0.0;
  for (std::size_t i = 0; i < c.power.buses.size(); ++i) {
    const Bus& b = c.power.buses[i];
    s.power_shed += b.shed_cost * std::max(0.0, b.p_demand - s.p_served[i]);
  }
  s.gas_shed = 0.0;
  for (std::size_t j = 0; j < c.gas.nodes.size(); ++j) {
    const GasNode& n = c.gas.nodes[j];
    s.gas_shed += n.shed_cost * std::max(0.0, n.demand - s.gas_served[j]);
  }
}

double period_cost(const CaseModel& c, const FlowSnapshot& s) {
  return s.shed_rate() * c.time.dt_hours;
}

FlowSnapshot CachedEvaluator::evaluate(const Topology& up) const {
  {
    std::lock_guard lock(mu_);
    auto it = memo_.find(up);
    if (it != memo_.end()) return *it->second;
  }
  auto snap = std::make_shared<const FlowSnapshot>(inner_->evaluate(up));
  std::lock_guard lock(mu_);
  memo_.emplace(up, snap);
  return *snap;
}

double CachedEvaluator::rate(const Topology& up) const {
  {
    std::lock_guard lock(mu_);
    auto it = memo_.find(up);
    if (it != memo_.end()) return it->second->shed_rate();
  }
  auto snap = std::make_shared<const FlowSnapshot>(inner_->evaluate(up));
  std::lock_guard lock(mu_);
  memo_.emplace(up, snap);
  return snap->shed_rate();
}

std::size_t CachedEvaluator::size() const {
  std::lock_guard lock(mu_);
  return memo_.size();
}

}  // namespace restore::flow

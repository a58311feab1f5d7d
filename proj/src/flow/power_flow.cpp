// Power side alone: linearized DistFlow per island with gas-fired units capped
// by a given gas supply.

#include <sstream>

#include "restore/flow.hpp"

namespace restore::flow {

using opt::Model;
using opt::RowSense;
using opt::Term;

double gas_unit_cap(const Generator& g, double gas_available) {
  if (!g.gas) return g.p_max;
  const double net = gas_available - g.gas->gamma;
  if (net <= 0) return 0.0;
  if (g.gas->beta <= 0) return g.p_max;
  return std::min(g.p_max, net / g.gas->beta);
}

namespace {

// One island's LP. Writes the solution into `s` when given; returns the
// island's shed cost rate.
double solve_island(const CaseModel& c, const Topology& up, const IslandPartition& islands, int isl,
                    const std::vector<double>& gas_available, const opt::LpOptions& lp, FlowSnapshot* s) {
  const int nb = static_cast<int>(c.power.buses.size());
  const int ng = static_cast<int>(c.power.generators.size());
  const int nl = c.num_lines();
  const auto& buses = islands.power_islands[isl];
  double full = 0.0;
  for (int b : buses) full += c.power.buses[b].shed_cost * c.power.buses[b].p_demand;
  if (full <= 0.0) return 0.0;
  if (islands.island_generators[isl].empty()) return full;

  Model m;
  std::vector<int> pd(nb, -1), qd(nb, -1), v(nb, -1), lp_(nl, -1), lq(nl, -1), pg(ng, -1), qg(ng, -1);
  for (int b : buses) {
    const Bus& bus = c.power.buses[b];
    pd[b] = m.add_variable(0, bus.p_demand, -bus.shed_cost);
    qd[b] = m.add_variable(0, bus.q_demand, 0);
    v[b] = m.add_variable(bus.v_min, bus.v_max, 0);
  }
  for (int l = 0; l < nl; ++l) {
    const Line& line = c.power.lines[l];
    if (!up.up(l) || islands.bus_island[line.from] != isl) continue;
    lp_[l] = m.add_variable(-line.p_max, line.p_max, 0);
    lq[l] = m.add_variable(-line.q_max, line.q_max, 0);
    const double v0 = c.power.base_voltage;
    m.add_row({{v[line.to], 1}, {v[line.from], -1}, {lp_[l], line.resistance / v0}, {lq[l], line.reactance / v0}},
              RowSense::Equal, 0.0);
  }
  for (int g : islands.island_generators[isl]) {
    const Generator& gen = c.power.generators[g];
    const double cap = gen.gas ? gas_unit_cap(gen, gas_available.at(g)) : gen.p_max;
    pg[g] = m.add_variable(0, cap, 0);
    qg[g] = m.add_variable(0, gen.q_max, 0);
  }
  for (int b : buses) {
    std::vector<Term> pr{{pd[b], -1}}, qr{{qd[b], -1}};
    for (int g : islands.island_generators[isl])
      if (c.power.generators[g].bus == b) {
        pr.push_back({pg[g], 1});
        qr.push_back({qg[g], 1});
      }
    for (int l = 0; l < nl; ++l) {
      if (lp_[l] < 0) continue;
      const Line& line = c.power.lines[l];
      if (line.from == b) { pr.push_back({lp_[l], -1}); qr.push_back({lq[l], -1}); }
      if (line.to == b) { pr.push_back({lp_[l], 1}); qr.push_back({lq[l], 1}); }
    }
    m.add_row(std::move(pr), RowSense::Equal, 0.0);
    m.add_row(std::move(qr), RowSense::Equal, 0.0);
  }
  m.set_objective_offset(full);
  const opt::Solution sol = opt::solve_lp(m, lp);
  if (!sol.has_solution()) {
    std::ostringstream msg;
    msg << "power flow: backend returned " << opt::to_string(sol.status) << " on island " << isl;
    throw FlowError(msg.str());
  }
  double shed = 0.0;
  for (int b : buses) shed += c.power.buses[b].shed_cost * (c.power.buses[b].p_demand - sol.values[pd[b]]);
  if (!s) return shed;
  for (int b : buses) {
    s->p_served[b] = sol.values[pd[b]];
    s->q_served[b] = sol.values[qd[b]];
    s->voltage[b] = sol.values[v[b]];
  }
  for (int l = 0; l < nl; ++l)
    if (lp_[l] >= 0) {
      s->line_p[l] = sol.values[lp_[l]];
      s->line_q[l] = sol.values[lq[l]];
    }
  for (int g : islands.island_generators[isl]) {
    s->p_gen[g] = sol.values[pg[g]];
    s->q_gen[g] = sol.values[qg[g]];
    const Generator& gen = c.power.generators[g];
    if (gen.gas && s->p_gen[g] > 1e-9) s->gas_draw[g] = gen.gas->beta * s->p_gen[g] + gen.gas->gamma;
  }
  return shed;
}

}  // namespace

FlowSnapshot power_flow(const CaseModel& c, const Topology& up, const std::vector<double>& gas_available,
                        const opt::LpOptions& lp) {
  const int nb = static_cast<int>(c.power.buses.size());
  const int ng = static_cast<int>(c.power.generators.size());
  const int nl = c.num_lines();
  FlowSnapshot s;
  s.p_served.assign(nb, 0.0);
  s.q_served.assign(nb, 0.0);
  s.line_p.assign(nl, 0.0);
  s.line_q.assign(nl, 0.0);
  s.p_gen.assign(ng, 0.0);
  s.q_gen.assign(ng, 0.0);
  s.gas_draw.assign(ng, 0.0);
  s.voltage.assign(nb, 0.0);

  const IslandPartition islands = detect_islands(c, up);
  for (std::size_t isl = 0; isl < islands.power_islands.size(); ++isl)
    solve_island(c, up, islands, static_cast<int>(isl), gas_available, lp, &s);
  for (int b = 0; b < nb; ++b)
    s.power_shed += c.power.buses[b].shed_cost * (c.power.buses[b].p_demand - s.p_served[b]);
  return s;
}

double PowerShedCache::rate(const Topology& up, const std::vector<double>& gas_available) {
  const IslandPartition islands = detect_islands(*c_, up);
  double total = 0.0;
  for (std::size_t isl = 0; isl < islands.power_islands.size(); ++isl) {
    // An island is fixed by its buses, its live lines and its units' caps.
    std::vector<double> key;
    for (int b : islands.power_islands[isl]) key.push_back(b);
    key.push_back(-1);
    for (int l = 0; l < c_->num_lines(); ++l)
      if (up.up(l) && islands.bus_island[c_->power.lines[l].from] == static_cast<int>(isl)) key.push_back(l);
    key.push_back(-1);
    for (int g : islands.island_generators[isl]) {
      const Generator& gen = c_->power.generators[g];
      key.push_back(gen.gas ? gas_unit_cap(gen, gas_available.at(g)) : gen.p_max);
    }
    auto it = memo_.find(key);
    if (it == memo_.end())
      it = memo_.emplace(std::move(key), solve_island(*c_, up, islands, static_cast<int>(isl), gas_available,
                                                      lp_, nullptr)).first;
    total += it->second;
  }
  return total;
}

std::size_t PowerShedCache::VecHash::operator()(const std::vector<double>& v) const {
  std::size_t h = v.size();
  for (double x : v) h = h * 1000003u ^ std::hash<double>{}(x);
  return h;
}

}  // namespace restore::flow

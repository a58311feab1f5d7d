// Single-period optimal flow: linearized DistFlow plus steady-state gas flow
// with a piecewise-linear Weymouth surrogate, solved per coupled component.

#include <cmath>
#include <numeric>
#include <sstream>

#include "restore/flow.hpp"

namespace restore::flow {

namespace {

using opt::Model;
using opt::RowSense;
using opt::Term;
using opt::VarType;

struct Vars {
  std::vector<int> pd, qd, v;           // per bus
  std::vector<int> lp, lq;              // per line
  std::vector<int> pg, qg, on;          // per generator
  std::vector<int> wd, psi;             // per gas node
  std::vector<int> well;                // per well
  std::vector<int> f;                   // per pipe
  std::vector<std::vector<int>> delta;  // per passive pipe
  std::vector<std::vector<int>> y;
};

std::vector<int> coupled_components(const CaseModel& c, const Topology& up) {
  const int nb = static_cast<int>(c.power.buses.size());
  const int n = nb + static_cast<int>(c.gas.nodes.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  for (int l = 0; l < c.num_lines(); ++l)
    if (up.up(l)) unite(c.power.lines[l].from, c.power.lines[l].to);
  for (int m = 0; m < c.num_pipes(); ++m) {
    if (!up.up(c.pipe_component(m))) continue;
    const Pipeline& p = c.gas.pipelines[m];
    unite(nb + p.from, nb + p.to);
    if (p.kind == PipeClass::Compressor) unite(p.host_bus, nb + p.from);
  }
  for (const auto& g : c.power.generators)
    if (g.gas) unite(g.bus, nb + g.gas->node);
  std::vector<int> label(n);
  for (int i = 0; i < n; ++i) label[i] = find(i);
  return label;
}

}  // namespace

FlowSnapshot exact_flow(const CaseModel& c, const Topology& up, const ExactFlowOptions& options) {
  const int nb = static_cast<int>(c.power.buses.size());
  const int nn = static_cast<int>(c.gas.nodes.size());
  const int ng = static_cast<int>(c.power.generators.size());
  const int nl = c.num_lines();
  const int np = c.num_pipes();
  const int K = std::max(1, options.segments);

  FlowSnapshot s;
  s.p_served.assign(nb, 0.0);
  s.q_served.assign(nb, 0.0);
  s.line_p.assign(nl, 0.0);
  s.line_q.assign(nl, 0.0);
  s.p_gen.assign(ng, 0.0);
  s.q_gen.assign(ng, 0.0);
  s.gas_draw.assign(ng, 0.0);
  s.gas_served.assign(nn, 0.0);
  s.well_out.assign(c.gas.wells.size(), 0.0);
  s.pipe_flow.assign(np, 0.0);
  s.compressor_load.assign(np, 0.0);
  s.voltage.assign(nb, 0.0);
  s.pressure.assign(nn, 0.0);

  const std::vector<int> label = coupled_components(c, up);
  std::vector<int> roots;
  for (int i = 0; i < nb + nn; ++i)
    if (label[i] == i) roots.push_back(i);

  for (int root : roots) {
    auto in = [&](int entity) { return label[entity] == root; };
    Model m;
    Vars x;
    x.pd.assign(nb, -1); x.qd.assign(nb, -1); x.v.assign(nb, -1);
    x.lp.assign(nl, -1); x.lq.assign(nl, -1);
    x.pg.assign(ng, -1); x.qg.assign(ng, -1); x.on.assign(ng, -1);
    x.wd.assign(nn, -1); x.psi.assign(nn, -1);
    x.well.assign(c.gas.wells.size(), -1);
    x.f.assign(np, -1);
    x.delta.assign(np, {});
    x.y.assign(np, {});
    double offset = 0.0;

    for (int b = 0; b < nb; ++b) {
      if (!in(b)) continue;
      const Bus& bus = c.power.buses[b];
      x.pd[b] = m.add_variable(0, bus.p_demand, -bus.shed_cost);
      x.qd[b] = m.add_variable(0, bus.q_demand, 0);
      x.v[b] = m.add_variable(bus.v_min, bus.v_max, 0);
      offset += bus.shed_cost * bus.p_demand;
    }
    for (int l = 0; l < nl; ++l) {
      const Line& line = c.power.lines[l];
      if (!up.up(l) || !in(line.from)) continue;
      x.lp[l] = m.add_variable(-line.p_max, line.p_max, 0);
      x.lq[l] = m.add_variable(-line.q_max, line.q_max, 0);
      const double v0 = c.power.base_voltage;
      m.add_row({{x.v[line.to], 1}, {x.v[line.from], -1},
                 {x.lp[l], line.resistance / v0}, {x.lq[l], line.reactance / v0}},
                RowSense::Equal, 0.0);
    }
    for (int g = 0; g < ng; ++g) {
      const Generator& gen = c.power.generators[g];
      if (!in(gen.bus)) continue;
      x.pg[g] = m.add_variable(0, gen.p_max, 0);
      x.qg[g] = m.add_variable(0, gen.q_max, 0);
      if (gen.gas && gen.gas->gamma > 0) {
        x.on[g] = m.add_binary(0);
        m.add_row({{x.pg[g], 1}, {x.on[g], -gen.p_max}}, RowSense::LessEqual, 0.0);
      }
    }
    for (int j = 0; j < nn; ++j) {
      if (!in(nb + j)) continue;
      const GasNode& node = c.gas.nodes[j];
      x.wd[j] = m.add_variable(0, node.demand, -node.shed_cost);
      x.psi[j] = m.add_variable(node.pressure_min * node.pressure_min,
                                node.pressure_max * node.pressure_max, 0);
      offset += node.shed_cost * node.demand;
    }
    for (std::size_t w = 0; w < c.gas.wells.size(); ++w) {
      const Well& well = c.gas.wells[w];
      if (!in(nb + well.node)) continue;
      x.well[w] = m.add_variable(well.w_min, well.w_max, 0);
    }
    for (int p = 0; p < np; ++p) {
      const Pipeline& pipe = c.gas.pipelines[p];
      if (!up.up(c.pipe_component(p)) || !in(nb + pipe.from)) continue;
      x.f[p] = m.add_variable(0, pipe.f_max, 0);
      if (pipe.kind == PipeClass::Passive) {
        // Incremental segments: f = sum delta_s, filled in order by y_s.
        const double h = pipe.f_max / K;
        std::vector<Term> sum{{x.f[p], 1}};
        std::vector<Term> drop{{x.psi[pipe.from], 1}, {x.psi[pipe.to], -1}};
        for (int k = 0; k < K; ++k) {
          const int d = m.add_variable(0, h, 0);
          x.delta[p].push_back(d);
          sum.push_back({d, -1});
          drop.push_back({d, -h * (2 * k + 1) / pipe.weymouth});
        }
        for (int k = 0; k + 1 < K; ++k) {
          const int yk = m.add_binary(0);
          x.y[p].push_back(yk);
          m.add_row({{x.delta[p][k], 1}, {yk, -h}}, RowSense::GreaterEqual, 0.0);
          m.add_row({{x.delta[p][k + 1], 1}, {yk, -h}}, RowSense::LessEqual, 0.0);
        }
        m.add_row(std::move(sum), RowSense::Equal, 0.0);
        m.add_row(std::move(drop), RowSense::Equal, 0.0);
      } else {
        const double r2 = pipe.ratio * pipe.ratio;
        m.add_row({{x.psi[pipe.to], 1}, {x.psi[pipe.from], -1}}, RowSense::GreaterEqual, 0.0);
        m.add_row({{x.psi[pipe.to], 1}, {x.psi[pipe.from], -r2}}, RowSense::LessEqual, 0.0);
      }
    }

    for (int b = 0; b < nb; ++b) {
      if (!in(b)) continue;
      std::vector<Term> pr{{x.pd[b], -1}}, qr{{x.qd[b], -1}};
      for (int g = 0; g < ng; ++g)
        if (x.pg[g] >= 0 && c.power.generators[g].bus == b) {
          pr.push_back({x.pg[g], 1});
          qr.push_back({x.qg[g], 1});
        }
      for (int l = 0; l < nl; ++l) {
        if (x.lp[l] < 0) continue;
        const Line& line = c.power.lines[l];
        if (line.from == b) { pr.push_back({x.lp[l], -1}); qr.push_back({x.lq[l], -1}); }
        if (line.to == b) { pr.push_back({x.lp[l], 1}); qr.push_back({x.lq[l], 1}); }
      }
      for (int p = 0; p < np; ++p) {
        const Pipeline& pipe = c.gas.pipelines[p];
        if (x.f[p] >= 0 && pipe.kind == PipeClass::Compressor && pipe.host_bus == b)
          pr.push_back({x.f[p], -pipe.compressor_rate});
      }
      m.add_row(std::move(pr), RowSense::Equal, 0.0);
      m.add_row(std::move(qr), RowSense::Equal, 0.0);
    }
    for (int j = 0; j < nn; ++j) {
      if (!in(nb + j)) continue;
      std::vector<Term> row{{x.wd[j], -1}};
      for (std::size_t w = 0; w < c.gas.wells.size(); ++w)
        if (x.well[w] >= 0 && c.gas.wells[w].node == j) row.push_back({x.well[w], 1});
      for (int g = 0; g < ng; ++g) {
        const Generator& gen = c.power.generators[g];
        if (x.pg[g] < 0 || !gen.gas || gen.gas->node != j) continue;
        row.push_back({x.pg[g], -gen.gas->beta});
        if (x.on[g] >= 0) row.push_back({x.on[g], -gen.gas->gamma});
      }
      for (int p = 0; p < np; ++p) {
        if (x.f[p] < 0) continue;
        const Pipeline& pipe = c.gas.pipelines[p];
        if (pipe.from == j) row.push_back({x.f[p], -1});
        if (pipe.to == j) row.push_back({x.f[p], 1});
      }
      m.add_row(std::move(row), RowSense::Equal, 0.0);
    }
    m.set_objective_offset(offset);

    opt::Solution sol = opt::solve_lp(m, options.milp.lp);
    if (sol.status == opt::SolveStatus::Optimal && m.has_integers()) {
      bool integral = true;
      for (int j = 0; j < m.num_variables(); ++j)
        if (m.variables()[j].type == VarType::Integer &&
            std::abs(sol.values[j] - std::round(sol.values[j])) > options.milp.integrality_tol)
          integral = false;
      if (!integral) {
        // Round binaries from the relaxed flows; keep the result if it meets the bound.
        std::vector<double> lo, hi;
        for (const auto& v : m.variables()) { lo.push_back(v.lower); hi.push_back(v.upper); }
        for (int p = 0; p < np; ++p) {
          if (x.y[p].empty()) continue;
          const double h = c.gas.pipelines[p].f_max / K;
          const double f = sol.values[x.f[p]];
          for (int k = 0; k + 1 < K; ++k) {
            const double val = f >= (k + 1) * h - 1e-9 ? 1.0 : 0.0;
            lo[x.y[p][k]] = hi[x.y[p][k]] = val;
          }
        }
        for (int g = 0; g < ng; ++g)
          if (x.on[g] >= 0) lo[x.on[g]] = hi[x.on[g]] = sol.values[x.pg[g]] > 1e-9 ? 1.0 : 0.0;
        opt::Solution fixed = opt::solve_lp(m, lo, hi, options.milp.lp);
        const double tol = std::max(options.milp.absolute_gap,
                                    options.milp.relative_gap * std::abs(sol.objective));
        if (fixed.status == opt::SolveStatus::Optimal && fixed.objective <= sol.objective + tol) {
          sol = std::move(fixed);
        } else {
          sol = opt::BranchAndBoundSolver(options.milp).solve(m);
        }
      }
    }
    if (!sol.has_solution()) {
      std::ostringstream msg;
      msg << "exact flow: backend returned " << opt::to_string(sol.status) << " on a component with "
          << m.num_variables() << " variables and " << m.num_rows() << " rows";
      throw FlowError(msg.str());
    }

    const auto& val = sol.values;
    for (int b = 0; b < nb; ++b) {
      if (x.pd[b] < 0) continue;
      s.p_served[b] = val[x.pd[b]];
      s.q_served[b] = val[x.qd[b]];
      s.voltage[b] = val[x.v[b]];
    }
    for (int l = 0; l < nl; ++l)
      if (x.lp[l] >= 0) {
        s.line_p[l] = val[x.lp[l]];
        s.line_q[l] = val[x.lq[l]];
      }
    for (int g = 0; g < ng; ++g) {
      if (x.pg[g] < 0) continue;
      s.p_gen[g] = val[x.pg[g]];
      s.q_gen[g] = val[x.qg[g]];
      const Generator& gen = c.power.generators[g];
      if (gen.gas)
        s.gas_draw[g] = gen.gas->beta * s.p_gen[g] +
                        (x.on[g] >= 0 ? gen.gas->gamma * std::round(val[x.on[g]]) : 0.0);
    }
    for (int j = 0; j < nn; ++j)
      if (x.wd[j] >= 0) {
        s.gas_served[j] = val[x.wd[j]];
        s.pressure[j] = std::sqrt(std::max(0.0, val[x.psi[j]]));
      }
    for (std::size_t w = 0; w < c.gas.wells.size(); ++w)
      if (x.well[w] >= 0) s.well_out[w] = val[x.well[w]];
    for (int p = 0; p < np; ++p)
      if (x.f[p] >= 0) {
        s.pipe_flow[p] = val[x.f[p]];
        if (c.gas.pipelines[p].kind == PipeClass::Compressor)
          s.compressor_load[p] = c.gas.pipelines[p].compressor_rate * s.pipe_flow[p];
      }
  }
  price(c, s);
  return s;
}

}  // namespace restore::flow

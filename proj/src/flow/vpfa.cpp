// Value-prioritized flow allocation.
//
// Consumers are served one at a time in priority order by augmenting paths
// from a super source; earlier deliveries stay fixed while their paths may be
// rerouted. Gas is allocated first, then power, then gas is reallocated to the
// generators' actual needs. A final repair loop trims any surplus so that the
// coupling equalities hold exactly.

#include <algorithm>
#include <cmath>
#include <queue>

#include "restore/flow.hpp"

namespace restore::flow {

namespace {

constexpr double kEps = 1e-10;

struct Arc {
  int from;
  int to;
  double lo;
  double hi;
  double flow = 0.0;
};

class Network {
 public:
  explicit Network(int nodes) : adj_(nodes + 1), source_(nodes) {}

  int source() const { return source_; }

  int add_arc(int from, int to, double lo, double hi) {
    arcs_.push_back({from, to, lo, hi});
    const int id = static_cast<int>(arcs_.size()) - 1;
    adj_[from].push_back(id);
    adj_[to].push_back(id);
    return id;
  }

  void set_hi(int arc, double hi) { arcs_[arc].hi = hi; }
  double flow(int arc) const { return arcs_[arc].flow; }
  const Arc& arc(int a) const { return arcs_[a]; }

  // Pushes up to `amount` from the source to `sink`. Source arcs for which
  // `allowed` is false are skipped.
  template <class Allowed>
  double augment(int sink, double amount, Allowed allowed) {
    double sent = 0.0;
    const int n = static_cast<int>(adj_.size());
    std::vector<int> via(n);
    std::vector<char> dir(n);
    while (amount - sent > kEps) {
      std::fill(via.begin(), via.end(), -1);
      std::queue<int> q;
      q.push(source_);
      via[source_] = -2;
      while (!q.empty() && via[sink] == -1) {
        const int v = q.front();
        q.pop();
        for (int a : adj_[v]) {
          const Arc& e = arcs_[a];
          if (v == source_ && !allowed(a)) continue;
          int w;
          double residual;
          if (e.from == v) {
            w = e.to;
            residual = e.hi - e.flow;
          } else {
            w = e.from;
            residual = e.flow - e.lo;
          }
          if (residual <= kEps || via[w] != -1) continue;
          via[w] = a;
          dir[w] = e.from == v ? 1 : 0;
          q.push(w);
        }
      }
      if (via[sink] == -1) break;
      double bottleneck = amount - sent;
      for (int v = sink; v != source_;) {
        const Arc& e = arcs_[via[v]];
        bottleneck = std::min(bottleneck, dir[v] ? e.hi - e.flow : e.flow - e.lo);
        v = dir[v] ? e.from : e.to;
      }
      for (int v = sink; v != source_;) {
        Arc& e = arcs_[via[v]];
        e.flow += dir[v] ? bottleneck : -bottleneck;
        v = dir[v] ? e.from : e.to;
      }
      sent += bottleneck;
    }
    return sent;
  }

  double augment(int sink, double amount) {
    return augment(sink, amount, [](int) { return true; });
  }

  // Removes up to `amount` of delivered flow at `sink` by cancelling flow
  // along source-to-sink paths of the current flow.
  double reduce(int sink, double amount) {
    double removed = 0.0;
    const int n = static_cast<int>(adj_.size());
    std::vector<int> via(n);
    std::vector<char> dir(n);
    while (amount - removed > kEps) {
      std::fill(via.begin(), via.end(), -1);
      std::queue<int> q;
      q.push(source_);
      via[source_] = -2;
      while (!q.empty() && via[sink] == -1) {
        const int v = q.front();
        q.pop();
        for (int a : adj_[v]) {
          const Arc& e = arcs_[a];
          int w;
          if (e.from == v && e.flow > kEps) {
            w = e.to;
          } else if (e.to == v && e.flow < -kEps) {
            w = e.from;
          } else {
            continue;
          }
          if (via[w] != -1) continue;
          via[w] = a;
          dir[w] = e.from == v ? 1 : 0;
          q.push(w);
        }
      }
      if (via[sink] == -1) break;
      double bottleneck = amount - removed;
      for (int v = sink; v != source_;) {
        const Arc& e = arcs_[via[v]];
        bottleneck = std::min(bottleneck, std::abs(e.flow));
        v = dir[v] ? e.from : e.to;
      }
      for (int v = sink; v != source_;) {
        Arc& e = arcs_[via[v]];
        e.flow += dir[v] ? -bottleneck : bottleneck;
        v = dir[v] ? e.from : e.to;
      }
      removed += bottleneck;
    }
    return removed;
  }

 private:
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  int source_;
};

struct Consumer {
  int node;
  int generator;  // -1 for the node's own gas load
  double value;
};

class Allocator {
 public:
  Allocator(const CaseModel& c, const Topology& up)
      : c_(c), up_(up), islands_(detect_islands(c, up)) {
    const int ng = static_cast<int>(c.power.generators.size());
    gen_value_.assign(ng, 0.0);
    for (int g = 0; g < ng; ++g) {
      const Generator& gen = c.power.generators[g];
      if (!gen.gas) continue;
      double best = 0.0;
      for (int b : islands_.power_islands[islands_.bus_island[gen.bus]])
        if (c.power.buses[b].p_demand > 0) best = std::max(best, c.power.buses[b].shed_cost);
      gen_value_[g] = best / gen.gas->beta;
    }
    for (int j = 0; j < static_cast<int>(c.gas.nodes.size()); ++j)
      if (c.gas.nodes[j].demand > 0) consumers_.push_back({j, -1, c.gas.nodes[j].shed_cost});
    for (int g = 0; g < ng; ++g)
      if (c.power.generators[g].gas)
        consumers_.push_back({c.power.generators[g].gas->node, g, gen_value_[g]});
    std::stable_sort(consumers_.begin(), consumers_.end(), [](const Consumer& a, const Consumer& b) {
      if (a.value != b.value) return a.value > b.value;
      if (a.node != b.node) return a.node < b.node;
      return a.generator < b.generator;
    });

    island_has_gen_.assign(islands_.power_islands.size(), 0);
    for (std::size_t i = 0; i < islands_.power_islands.size(); ++i)
      island_has_gen_[i] = !islands_.island_generators[i].empty();

    load_order_.resize(c.power.buses.size());
    for (std::size_t b = 0; b < load_order_.size(); ++b) load_order_[b] = static_cast<int>(b);
    std::stable_sort(load_order_.begin(), load_order_.end(), [&](int a, int b) {
      return c.power.buses[a].shed_cost > c.power.buses[b].shed_cost;
    });
  }

  FlowSnapshot run() {
    const int np = c_.num_pipes();
    const int ng = static_cast<int>(c_.power.generators.size());
    std::vector<double> cap(np, 0.0);
    for (int m = 0; m < np; ++m) {
      const Pipeline& p = c_.gas.pipelines[m];
      if (!up_.up(c_.pipe_component(m))) continue;
      if (p.kind == PipeClass::Passive) cap[m] = p.f_max;
      else cap[m] = island_has_gen_[islands_.bus_island[p.host_bus]] ? p.f_max : 0.0;
    }
    std::vector<double> request(ng, 0.0);
    for (int g = 0; g < ng; ++g) {
      const Generator& gen = c_.power.generators[g];
      if (gen.gas) request[g] = gen.gas->beta * gen.p_max + gen.gas->gamma;
    }

    allocate_gas(request, cap);
    dispatch_power();

    // Correction: generators ask only for what they burn; compressor pipes
    // may not carry more than before.
    for (int g = 0; g < ng; ++g) request[g] = need(g);
    for (int m = 0; m < np; ++m)
      if (c_.gas.pipelines[m].kind == PipeClass::Compressor)
        cap[m] = std::min(cap[m], pipe_flow(m));
    allocate_gas(request, cap);
    dispatch_power();

    // Compressors that cannot be powered lose the unpowered share of flow.
    for (int iter = 0;; ++iter) {
      bool short_any = false;
      for (int m = 0; m < np; ++m) {
        const Pipeline& p = c_.gas.pipelines[m];
        if (p.kind != PipeClass::Compressor || p.compressor_rate <= 0) continue;
        const double want = p.compressor_rate * pipe_flow(m);
        const double got = compressor_power_[m];
        if (got < want - 1e-9) {
          short_any = true;
          cap[m] = iter >= 10 ? 0.0 : std::max(0.0, got / p.compressor_rate);
        }
      }
      if (!short_any) break;
      for (int g = 0; g < ng; ++g) request[g] = need(g);
      allocate_gas(request, cap);
      dispatch_power();
    }

    trim_surplus();
    return snapshot();
  }

 private:
  double need(int g) const {
    const Generator& gen = c_.power.generators[g];
    if (!gen.gas) return 0.0;
    const double p = gen_output(g);
    return p > kEps ? gen.gas->beta * p + gen.gas->gamma : 0.0;
  }

  double pipe_flow(int m) const { return pipe_arc_[m] < 0 ? 0.0 : gas_->flow(pipe_arc_[m]); }
  double gen_output(int g) const { return power_->flow(gen_arc_[g]); }

  void allocate_gas(const std::vector<double>& request, const std::vector<double>& cap) {
    const int nn = static_cast<int>(c_.gas.nodes.size());
    gas_ = std::make_unique<Network>(nn);
    well_arc_.clear();
    for (const auto& w : c_.gas.wells) well_arc_.push_back(gas_->add_arc(gas_->source(), w.node, 0.0, w.w_max));
    pipe_arc_.assign(c_.num_pipes(), -1);
    for (int m = 0; m < c_.num_pipes(); ++m) {
      if (!up_.up(c_.pipe_component(m)) || cap[m] <= kEps) continue;
      const Pipeline& p = c_.gas.pipelines[m];
      pipe_arc_[m] = gas_->add_arc(p.from, p.to, 0.0, cap[m]);
    }
    load_gas_.assign(nn, 0.0);
    gen_gas_.assign(c_.power.generators.size(), 0.0);
    for (const Consumer& k : consumers_) {
      if (k.generator < 0) {
        load_gas_[k.node] = gas_->augment(k.node, c_.gas.nodes[k.node].demand);
      } else if (request[k.generator] > kEps) {
        gen_gas_[k.generator] = gas_->augment(k.node, request[k.generator]);
      }
    }
  }

  void dispatch_power() {
    const int nb = static_cast<int>(c_.power.buses.size());
    const int ng = static_cast<int>(c_.power.generators.size());
    power_ = std::make_unique<Network>(nb);
    gen_arc_.assign(ng, -1);
    for (int g = 0; g < ng; ++g) {
      const Generator& gen = c_.power.generators[g];
      double avail = gen.p_max;
      if (gen.gas) {
        const double w = gen_gas_[g];
        avail = w + kEps < gen.gas->gamma ? 0.0 : std::min(gen.p_max, (w - gen.gas->gamma) / gen.gas->beta);
        avail = std::max(0.0, avail);
      }
      gen_arc_[g] = power_->add_arc(power_->source(), gen.bus, 0.0, avail);
    }
    const int first_gen_arc = ng > 0 ? gen_arc_[0] : 0;
    line_arc_.assign(c_.num_lines(), -1);
    for (int l = 0; l < c_.num_lines(); ++l) {
      if (!up_.up(l)) continue;
      const Line& line = c_.power.lines[l];
      line_arc_[l] = power_->add_arc(line.from, line.to, -line.p_max, line.p_max);
    }
    auto non_gas = [&](int a) { return !c_.power.generators[a - first_gen_arc].gas; };
    auto any = [](int) { return true; };
    auto serve = [&](int bus, double amount) {
      double got = power_->augment(bus, amount, non_gas);
      if (amount - got > kEps) got += power_->augment(bus, amount - got, any);
      return got;
    };

    compressor_power_.assign(c_.num_pipes(), 0.0);
    for (int m = 0; m < c_.num_pipes(); ++m) {
      const Pipeline& p = c_.gas.pipelines[m];
      if (p.kind != PipeClass::Compressor) continue;
      const double want = p.compressor_rate * pipe_flow(m);
      if (want > kEps) compressor_power_[m] = serve(p.host_bus, want);
    }
    p_served_.assign(nb, 0.0);
    for (int b : load_order_) {
      const double d = c_.power.buses[b].p_demand;
      if (d > kEps) p_served_[b] = serve(b, d);
    }
  }

  void trim_surplus() {
    const int ng = static_cast<int>(c_.power.generators.size());
    for (int iter = 0; iter < 200; ++iter) {
      bool changed = false;
      for (int g = 0; g < ng; ++g) {
        const Generator& gen = c_.power.generators[g];
        if (!gen.gas) continue;
        const double excess = gen_gas_[g] - need(g);
        if (excess > 1e-12) {
          gen_gas_[g] -= gas_->reduce(gen.gas->node, excess);
          changed = true;
        }
      }
      for (int m = 0; m < c_.num_pipes(); ++m) {
        const Pipeline& p = c_.gas.pipelines[m];
        if (p.kind != PipeClass::Compressor) continue;
        const double excess = compressor_power_[m] - p.compressor_rate * pipe_flow(m);
        if (excess > 1e-12) {
          compressor_power_[m] -= power_->reduce(p.host_bus, excess);
          changed = true;
        }
      }
      if (!changed) break;
    }
    // Snap tiny residuals so the coupling equalities hold exactly.
    for (int g = 0; g < ng; ++g)
      if (c_.power.generators[g].gas) gen_gas_[g] = need(g);
    for (int m = 0; m < c_.num_pipes(); ++m)
      if (c_.gas.pipelines[m].kind == PipeClass::Compressor)
        compressor_power_[m] = c_.gas.pipelines[m].compressor_rate * pipe_flow(m);
  }

  FlowSnapshot snapshot() {
    const int nb = static_cast<int>(c_.power.buses.size());
    const int ng = static_cast<int>(c_.power.generators.size());
    FlowSnapshot s;
    s.p_served = p_served_;
    s.line_p.assign(c_.num_lines(), 0.0);
    for (int l = 0; l < c_.num_lines(); ++l)
      if (line_arc_[l] >= 0) s.line_p[l] = power_->flow(line_arc_[l]);
    s.p_gen.resize(ng);
    s.gas_draw.assign(ng, 0.0);
    for (int g = 0; g < ng; ++g) {
      s.p_gen[g] = gen_output(g);
      if (c_.power.generators[g].gas) s.gas_draw[g] = gen_gas_[g];
    }
    s.gas_served = load_gas_;
    s.well_out.resize(c_.gas.wells.size());
    for (std::size_t w = 0; w < c_.gas.wells.size(); ++w) s.well_out[w] = gas_->flow(well_arc_[w]);
    s.pipe_flow.resize(c_.num_pipes());
    s.compressor_load.assign(c_.num_pipes(), 0.0);
    for (int m = 0; m < c_.num_pipes(); ++m) {
      s.pipe_flow[m] = pipe_flow(m);
      if (c_.gas.pipelines[m].kind == PipeClass::Compressor)
        s.compressor_load[m] = compressor_power_[m];
    }

    // Reactive support follows the served active share; it carries no cost.
    Network q(nb);
    std::vector<int> qarc(ng);
    for (int g = 0; g < ng; ++g) {
      const Generator& gen = c_.power.generators[g];
      const bool running = !gen.gas || s.p_gen[g] > kEps;
      qarc[g] = q.add_arc(q.source(), gen.bus, 0.0, running ? gen.q_max : 0.0);
    }
    std::vector<int> qline(c_.num_lines(), -1);
    for (int l = 0; l < c_.num_lines(); ++l)
      if (up_.up(l)) {
        const Line& line = c_.power.lines[l];
        qline[l] = q.add_arc(line.from, line.to, -line.q_max, line.q_max);
      }
    s.q_served.assign(nb, 0.0);
    for (int b : load_order_) {
      const Bus& bus = c_.power.buses[b];
      if (bus.p_demand <= kEps || bus.q_demand <= kEps) continue;
      const double target = bus.q_demand * std::min(1.0, p_served_[b] / bus.p_demand);
      if (target > kEps) s.q_served[b] = q.augment(b, target);
    }
    s.q_gen.resize(ng);
    for (int g = 0; g < ng; ++g) s.q_gen[g] = q.flow(qarc[g]);
    s.line_q.assign(c_.num_lines(), 0.0);
    for (int l = 0; l < c_.num_lines(); ++l)
      if (qline[l] >= 0) s.line_q[l] = q.flow(qline[l]);

    price(c_, s);
    return s;
  }

  const CaseModel& c_;
  const Topology& up_;
  IslandPartition islands_;
  std::vector<double> gen_value_;
  std::vector<Consumer> consumers_;
  std::vector<char> island_has_gen_;
  std::vector<int> load_order_;

  std::unique_ptr<Network> gas_;
  std::vector<int> well_arc_;
  std::vector<int> pipe_arc_;
  std::vector<double> load_gas_;
  std::vector<double> gen_gas_;

  std::unique_ptr<Network> power_;
  std::vector<int> gen_arc_;
  std::vector<int> line_arc_;
  std::vector<double> p_served_;
  std::vector<double> compressor_power_;
};

}  // namespace

FlowSnapshot vpfa_evaluate(const CaseModel& c, const Topology& up) {
  return Allocator(c, up).run();
}

}  // namespace restore::flow

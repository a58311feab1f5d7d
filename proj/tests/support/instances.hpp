#pragma once

// Random instances, an independent flow checker and brute-force routing
// shared by the unit and acceptance suites.

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "restore/dispatch.hpp"
#include "restore/flow.hpp"

namespace restore::testkit {

struct Check {
  double worst = 0.0;
  std::string where;
  void add(double v, const std::string& what);
};

// Balance, cap and demand-bound violations of a snapshot, computed from the
// case data alone.
Check check_snapshot(const CaseModel& c, const Topology& up, const flow::FlowSnapshot& s, bool reactive);

// Radial power tree and a directed gas tree rooted at a single well, with
// enough pressure and voltage headroom that neither ever binds.
CaseModel random_case(std::mt19937& rng, int max_buses = 6, int max_nodes = 5);

Topology random_topology(const CaseModel& c, std::mt19937& rng, double p_up);

// Radial feeder from a slack unit at B0; some buses host gas units fed from a
// small gas tree. Every line gets a position so crews have somewhere to go.
std::shared_ptr<CaseModel> feeder(std::mt19937& rng, int line_faults, int pipe_faults, int power_crews,
                                  int gas_crews);

// Every way to split the jobs among the crews, each crew's list in every order.
void each_route_set(const std::vector<int>& jobs, int crews,
                    const std::function<void(const std::vector<std::vector<int>>&)>& fn);

// Step-by-step cost of routes from the depots at t=0.
double replay_cost(const CaseModel& c, const std::vector<int>& crews, const std::vector<std::vector<int>>& routes,
                   const std::vector<int>& duration, Topology base,
                   const std::function<double(const Topology&, int)>& rate);

plan::GasProfile random_profile(const CaseModel& c, std::mt19937& rng);

// Brute-force optimum of the t=0 rolling schedule of a feeder.
double brute_force_rolling(const CaseModel& c, const plan::GasProfile& g, int crews);

// Brute-force optimum of the joint schedule with the damage known.
double brute_force_hindsight(const CaseModel& c, const GroundTruth& truth,
                             const std::shared_ptr<const flow::FlowEvaluator>& ev);

}  // namespace restore::testkit

#pragma once

#include <string>
#include <vector>

#include "restore/session.hpp"

namespace restore::run {

struct BenchmarkConfig {
  SessionConfig base;
  std::vector<GasPolicy> policies{GasPolicy::Bts, GasPolicy::Nfh, GasPolicy::Pbh, GasPolicy::Hindsight};
  std::vector<std::uint64_t> seeds{1};
  std::vector<int> sweep_scenarios;  // extra bts runs at these scenario counts
};

// One episode of the grid.
struct BenchmarkCell {
  GasPolicy policy = GasPolicy::Bts;
  std::uint64_t seed = 0;
  int scenarios = 0;
  bool ok = false;
  std::string error;
  double total_cost = 0.0;
  bool finished = false;
  std::vector<double> curve;
  std::vector<double> decision_seconds;
};

struct PolicyRow {
  GasPolicy policy = GasPolicy::Bts;
  int runs = 0;
  int failed = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
  double gap = 0.0;  // (mean - bts mean) / bts mean
  double mean_decision_seconds = 0.0;
  double max_decision_seconds = 0.0;
};

struct SweepRow {
  int scenarios = 0;
  int runs = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double mean_decision_seconds = 0.0;
  double max_decision_seconds = 0.0;
};

struct BenchmarkResult {
  std::vector<BenchmarkCell> cells;
  std::vector<PolicyRow> rows;
  std::vector<SweepRow> sweep;
  double hindsight_objective = 0.0;  // perfect-information schedule

  std::string table_csv() const;
  std::string sweep_csv() const;
  std::string curves_csv() const;
  std::string to_json() const;
};

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg);

double median(std::vector<double> v);
double stddev(const std::vector<double>& v);  // sample, n - 1

}  // namespace restore::run

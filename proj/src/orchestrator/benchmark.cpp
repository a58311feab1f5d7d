#include "restore/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "restore/serialize.hpp"

namespace restore::run {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

namespace {

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

BenchmarkCell run_cell(SessionConfig cfg, GasPolicy p, std::uint64_t seed, int scenarios) {
  BenchmarkCell cell;
  cell.policy = p;
  cell.seed = seed;
  cell.scenarios = scenarios;
  cfg.gas_policy = p;
  cfg.seed = seed;
  cfg.scenarios = scenarios;
  try {
    EpisodeResult r = run_episode(cfg);
    cell.ok = true;
    cell.total_cost = r.total_cost;
    cell.finished = r.finished;
    cell.curve = std::move(r.curve);
    cell.decision_seconds = std::move(r.decision_seconds);
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.policies.empty() || cfg.seeds.empty()) throw SessionError("benchmark needs a policy and a seed");
  BenchmarkResult out;
  for (GasPolicy p : cfg.policies) {
    PolicyRow row;
    row.policy = p;
    if (p == GasPolicy::Hindsight) {
      // Seed independent: one schedule with the truth known up front.
      row.runs = 1;
      try {
        out.hindsight_objective = hindsight_for(cfg.base).objective;
        row.mean = row.median = out.hindsight_objective;
      } catch (const std::exception& e) {
        row.failed = 1;
        BenchmarkCell cell;
        cell.policy = p;
        cell.error = e.what();
        out.cells.push_back(cell);
      }
      out.rows.push_back(row);
      continue;
    }
    std::vector<double> costs, secs;
    for (std::uint64_t seed : cfg.seeds) {
      BenchmarkCell cell = run_cell(cfg.base, p, seed, cfg.base.scenarios);
      ++row.runs;
      if (cell.ok) {
        costs.push_back(cell.total_cost);
        secs.insert(secs.end(), cell.decision_seconds.begin(), cell.decision_seconds.end());
      } else {
        ++row.failed;
      }
      out.cells.push_back(std::move(cell));
    }
    row.mean = mean(costs);
    row.median = median(costs);
    row.stddev = stddev(costs);
    row.mean_decision_seconds = mean(secs);
    row.max_decision_seconds = secs.empty() ? 0.0 : *std::max_element(secs.begin(), secs.end());
    out.rows.push_back(row);
  }

  const auto bts = std::find_if(out.rows.begin(), out.rows.end(),
                                [](const PolicyRow& r) { return r.policy == GasPolicy::Bts; });
  for (auto& r : out.rows)
    r.gap = bts != out.rows.end() && bts->mean > 0 ? (r.mean - bts->mean) / bts->mean : 0.0;

  for (int m : cfg.sweep_scenarios) {
    SweepRow row;
    row.scenarios = m;
    std::vector<double> costs, secs;
    for (std::uint64_t seed : cfg.seeds) {
      BenchmarkCell cell = run_cell(cfg.base, GasPolicy::Bts, seed, m);
      ++row.runs;
      if (cell.ok) {
        costs.push_back(cell.total_cost);
        secs.insert(secs.end(), cell.decision_seconds.begin(), cell.decision_seconds.end());
      }
      out.cells.push_back(std::move(cell));
    }
    row.mean = mean(costs);
    row.stddev = stddev(costs);
    row.mean_decision_seconds = mean(secs);
    row.max_decision_seconds = secs.empty() ? 0.0 : *std::max_element(secs.begin(), secs.end());
    out.sweep.push_back(row);
  }
  return out;
}

std::string BenchmarkResult::table_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "policy,runs,failed,mean_cost,median_cost,std_cost,gap_vs_bts,mean_decision_s,max_decision_s\n";
  for (const auto& r : rows)
    os << to_string(r.policy) << ',' << r.runs << ',' << r.failed << ',' << r.mean << ',' << r.median << ','
       << r.stddev << ',' << r.gap << ',' << r.mean_decision_seconds << ',' << r.max_decision_seconds << '\n';
  return os.str();
}

std::string BenchmarkResult::sweep_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "scenarios,runs,mean_cost,std_cost,mean_decision_s,max_decision_s\n";
  for (const auto& r : sweep)
    os << r.scenarios << ',' << r.runs << ',' << r.mean << ',' << r.stddev << ',' << r.mean_decision_seconds
       << ',' << r.max_decision_seconds << '\n';
  return os.str();
}

std::string BenchmarkResult::curves_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "policy,seed,scenarios,step,served_fraction\n";
  for (const auto& c : cells)
    for (std::size_t t = 0; t < c.curve.size(); ++t)
      os << to_string(c.policy) << ',' << c.seed << ',' << c.scenarios << ',' << t << ',' << c.curve[t] << '\n';
  return os.str();
}

std::string BenchmarkResult::to_json() const {
  io::Json j;
  io::Json rs = io::Json::array();
  for (const auto& r : rows)
    rs.push_back({{"policy", to_string(r.policy)},
                  {"runs", r.runs},
                  {"failed", r.failed},
                  {"mean_cost", r.mean},
                  {"median_cost", r.median},
                  {"std_cost", r.stddev},
                  {"gap_vs_bts", r.gap},
                  {"mean_decision_seconds", r.mean_decision_seconds},
                  {"max_decision_seconds", r.max_decision_seconds}});
  j["table"] = rs;
  io::Json sw = io::Json::array();
  for (const auto& r : sweep)
    sw.push_back({{"scenarios", r.scenarios},
                  {"runs", r.runs},
                  {"mean_cost", r.mean},
                  {"std_cost", r.stddev},
                  {"mean_decision_seconds", r.mean_decision_seconds},
                  {"max_decision_seconds", r.max_decision_seconds}});
  j["sweep"] = sw;
  io::Json cs = io::Json::array();
  for (const auto& c : cells) {
    io::Json cj{{"policy", to_string(c.policy)}, {"seed", c.seed}, {"scenarios", c.scenarios}, {"ok", c.ok}};
    if (c.ok) {
      cj["total_cost"] = c.total_cost;
      cj["finished"] = c.finished;
      cj["curve"] = c.curve;
      cj["decision_seconds"] = c.decision_seconds;
    } else {
      cj["error"] = c.error;
    }
    cs.push_back(cj);
  }
  j["cells"] = cs;
  j["hindsight_objective"] = hindsight_objective;
  return j.dump(2);
}

}  // namespace restore::run

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "restore/benchmark.hpp"
#include "restore/serialize.hpp"
#include "restore/server.hpp"

using namespace restore;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SessionFlags {
  run::SessionConfig cfg;
  std::string gas_policy = "bts";
  std::string power_policy = "rolling";

  void add(CLI::App* app) {
    app->add_option("--gas-policy", gas_policy, "bts | nfh | pbh | hindsight");
    app->add_option("--power-policy", power_policy, "rolling");
    app->add_option("--scenarios", cfg.scenarios, "scenarios per decision");
    app->add_option("--depth", cfg.depth, "tree depth");
    app->add_option("--exploration", cfg.exploration, "exploration constant; negative for the scaled default");
    app->add_option("--seed", cfg.seed);
    app->add_option("--deadline", cfg.deadline_seconds, "seconds per gas decision, 0 for none");
    app->add_option("--node-limit", cfg.node_limit, "branch-and-bound node limit for power routing");
    app->add_flag("--reverse-gas-order", cfg.reverse_gas_order);
  }

  run::SessionConfig resolve() {
    if (power_policy != "rolling") throw run::SessionError("power policy must be rolling");
    cfg.gas_policy = run::parse_gas_policy(gas_policy);
    cfg.validate();
    return cfg;
  }
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Post-earthquake restoration planning for coupled power and gas networks"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run one closed-loop episode");
  SessionFlags sim_flags;
  std::string sim_out;
  sim->add_option("--case", sim_flags.cfg.case_path)->required()->check(CLI::ExistingFile);
  sim->add_option("--truth", sim_flags.cfg.truth_path)->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "JSON-Lines log; timing goes to <out>.timing.json");
  sim_flags.add(sim);

  auto* bench = app.add_subcommand("benchmark", "policies x seeds comparison");
  SessionFlags bench_flags;
  std::string policies = "bts,nfh,pbh,hindsight", seeds = "1,2,3,4,5,6,7,8,9,10", sweep, bench_out = "bench";
  bench->add_option("--case", bench_flags.cfg.case_path)->required()->check(CLI::ExistingFile);
  bench->add_option("--truth", bench_flags.cfg.truth_path)->required()->check(CLI::ExistingFile);
  bench->add_option("--policies", policies);
  bench->add_option("--seeds", seeds);
  bench->add_option("--sweep-scenarios", sweep, "comma-separated scenario counts for bts");
  bench->add_option("--out", bench_out, "output directory");
  bench_flags.add(bench);

  auto* hind = app.add_subcommand("hindsight", "perfect-information schedule");
  run::SessionConfig hind_cfg;
  hind->add_option("--case", hind_cfg.case_path)->required()->check(CLI::ExistingFile);
  hind->add_option("--truth", hind_cfg.truth_path)->required()->check(CLI::ExistingFile);
  hind->add_option("--node-limit", hind_cfg.node_limit);

  auto* infer = app.add_subcommand("infer", "posterior of the unknown pipelines");
  std::string infer_case, infer_obs, infer_mode = "exact";
  int infer_samples = 100000;
  std::uint64_t infer_seed = 1;
  infer->add_option("--case", infer_case)->required()->check(CLI::ExistingFile);
  infer->add_option("--observations", infer_obs)->check(CLI::ExistingFile);
  infer->add_option("--mode", infer_mode, "exact | monte_carlo");
  infer->add_option("--samples", infer_samples);
  infer->add_option("--seed", infer_seed);

  auto* serve = app.add_subcommand("serve", "HTTP session service");
  run::ServerOptions serve_opts;
  serve->add_option("--port", serve_opts.port);
  serve->add_option("--host", serve_opts.host);
  serve->add_option("--case", serve_opts.case_path)->check(CLI::ExistingFile);
  auto* serve_truth = serve->add_option("--truth", serve_opts.truth_path)->check(CLI::ExistingFile);
  serve->add_flag("--interactive", serve_opts.interactive)->excludes(serve_truth);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      run::Session s(sim_flags.resolve());
      s.run();
      if (!sim_out.empty()) {
        write_file(sim_out, s.log_jsonl());
        write_file(sim_out + ".timing.json", s.timing_json());
      }
      std::cout << "total_cost " << s.total_cost() << "\nsteps " << s.steps().size() << "\nfinished "
                << (s.world().finished() ? "yes" : "no") << "\ndecisions " << s.decisions().size() << '\n';
    } else if (*bench) {
      run::BenchmarkConfig bc;
      bc.base = bench_flags.resolve();
      bc.policies.clear();
      for (const auto& p : split(policies)) bc.policies.push_back(run::parse_gas_policy(p));
      bc.seeds.clear();
      for (const auto& s : split(seeds)) bc.seeds.push_back(std::stoull(s));
      for (const auto& m : split(sweep)) bc.sweep_scenarios.push_back(std::stoi(m));
      const run::BenchmarkResult r = run::run_benchmark(bc);
      const std::filesystem::path dir(bench_out);
      write_file(dir / "table.csv", r.table_csv());
      write_file(dir / "curves.csv", r.curves_csv());
      write_file(dir / "benchmark.json", r.to_json());
      if (!bc.sweep_scenarios.empty()) write_file(dir / "sweep.csv", r.sweep_csv());
      std::cout << r.table_csv();
      if (!bc.sweep_scenarios.empty()) std::cout << '\n' << r.sweep_csv();
      for (const auto& c : r.cells)
        if (!c.ok) std::cerr << "failed: " << run::to_string(c.policy) << " seed " << c.seed << ": " << c.error << '\n';
    } else if (*hind) {
      const plan::Schedule s = run::hindsight_for(hind_cfg);
      const CaseModel c = load_case(hind_cfg.case_path);
      std::cout << io::to_json(c, s).dump(2) << '\n';
    } else if (*infer) {
      const CaseModel c = load_case(infer_case);
      belief::InferenceOptions o;
      if (infer_mode == "monte_carlo") o.mode = belief::InferenceMode::MonteCarlo;
      else if (infer_mode != "exact") throw std::runtime_error("mode must be exact or monte_carlo");
      o.samples = infer_samples;
      o.seed = infer_seed;
      const belief::ServiceObservation obs =
          infer_obs.empty() ? belief::ServiceObservation{}
                            : io::observation_from_json(c, nlohmann::json::parse(read_file(infer_obs)));
      const belief::Belief b = belief::posterior_infer(c, belief::initial_belief(c).prior, obs, o);
      std::cout << io::to_json(c, b).dump(2) << '\n';
    } else if (*serve) {
      run::SessionServer server(serve_opts);
      std::cout << "listening on " << serve_opts.host << ':' << serve_opts.port << std::endl;
      server.listen();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

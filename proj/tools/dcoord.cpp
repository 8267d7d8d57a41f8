// Command line front end: instance generation, exact enumeration, seeded
// coordination runs, aggregation, and whole-campaign orchestration.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcoord/bench.hpp"
#include "dcoord/coordinate.hpp"
#include "dcoord/enumerate.hpp"
#include "dcoord/generator.hpp"
#include "dcoord/instance_io.hpp"
#include "dcoord/metrics.hpp"

namespace {

namespace fs = std::filesystem;
using namespace dcoord;

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(
    const std::string& text) {
  const auto pos = text.find("..");
  if (pos == std::string::npos)
    throw CLI::ValidationError("--seeds", "expected a..b");
  const std::uint64_t first = std::stoull(text.substr(0, pos));
  const std::uint64_t last = std::stoull(text.substr(pos + 2));
  if (first > last) throw CLI::ValidationError("--seeds", "empty range");
  return {first, last};
}

int cmd_gen(std::uint32_t n, double p_int, std::uint32_t n_d,
            std::uint32_t n_sol, std::optional<std::uint64_t> seed,
            const std::string& seeds, const std::string& out_dir) {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
  if (seed && !seeds.empty()) {
    std::cerr << "gen: --seed and --seeds are mutually exclusive\n";
    return 2;
  }
  if (seed) {
    first = last = *seed;
  } else if (!seeds.empty()) {
    std::tie(first, last) = parse_seed_range(seeds);
  } else {
    std::cerr << "gen: one of --seed or --seeds is required\n";
    return 2;
  }

  fs::create_directories(out_dir);
  int failures = 0;
  for (std::uint64_t s = first; s <= last; ++s) {
    const GenerationParams params{n, p_int, n_d, n_sol, s};
    const fs::path path = fs::path(out_dir) / instance_file_name(n, n_sol, s);
    try {
      const GeneratedInstance generated = generate_instance(params);
      write_instance_file(generated.instance, path.string());
      std::cout << path.string() << "\n";
    } catch (const DistinctSolutionExhaustion& e) {
      std::cerr << "gen: seed " << s << ": " << e.what() << "\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

int cmd_solve(const std::string& instance_path, const std::string& out_path,
              std::uint64_t limit) {
  const ProblemInstance inst = load_instance_file(instance_path);
  SolutionSet set;
  try {
    set = enumerate_solutions(inst, limit);
  } catch (const LimitExceeded& e) {
    std::cerr << "solve: " << e.what() << "\n";
    return 1;
  }
  const std::string text = solution_set_to_json(set).dump() + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "solve: cannot write " << out_path << "\n";
      return 1;
    }
    out << text;
    std::cout << out_path << "\n";
  }
  return 0;
}

PolicyConfig build_policy(const std::string& strategy, std::uint32_t k,
                          double alpha, double epsilon, std::uint64_t t_start,
                          std::uint64_t window) {
  if (strategy == "k1") return PolicyConfig(KFixed{k});
  if (strategy == "kall") return PolicyConfig(KAll{});
  if (strategy == "kada") return PolicyConfig(KAdaptive{t_start, window});
  if (strategy == "dsa") return PolicyConfig(Dsa{alpha, epsilon});
  throw CLI::ValidationError("--strategy", "expected k1|kall|kada|dsa");
}

int cmd_run(const std::string& instance_path, const std::string& strategy,
            std::uint32_t k, double alpha, double epsilon,
            std::uint64_t t_start, std::uint64_t window, std::uint32_t runs,
            std::uint64_t max_iters,
            std::optional<std::uint64_t> run_seed_base,
            const std::string& solutions_path, const std::string& out_path) {
  const ProblemInstance inst = load_instance_file(instance_path);
  const PolicyConfig policy =
      build_policy(strategy, k, alpha, epsilon, t_start, window);

  std::optional<SolutionSet> oracle;
  if (!solutions_path.empty())
    oracle = load_solution_set_file(solutions_path);

  // Default seed base: the instance's own generation seed, so a plain
  // `run` on a generated instance reproduces the campaign's run seeds.
  std::uint64_t base = 0;
  if (run_seed_base) {
    base = *run_seed_base;
  } else if (inst.meta) {
    base = inst.meta->seed;
  }

  std::vector<RunRecord> records;
  records.reserve(runs);
  for (std::uint32_t run = 0; run < runs; ++run) {
    const std::uint64_t run_seed = mix_seeds(base, run);
    const RunResult res =
        run_coordination(inst, policy, run_seed, max_iters,
                         oracle ? &*oracle : nullptr, RankMode::Dense);
    RunRecord rec;
    rec.strategy = policy.name();
    rec.n = inst.agent_count();
    rec.n_sol = inst.meta ? inst.meta->n_sol : 0;
    rec.instance_seed = inst.meta ? inst.meta->seed : 0;
    rec.run_index = run;
    rec.run_seed = run_seed;
    rec.converged = res.converged;
    rec.iterations = res.iterations;
    rec.eta = res.eta;
    rec.rank = res.rank;
    rec.regret_pct = res.regret_pct;
    records.push_back(std::move(rec));
  }

  if (out_path.empty()) {
    std::cout << kRecordsCsvHeader << "\n";
    for (const auto& rec : records) std::cout << record_to_csv_row(rec) << "\n";
  } else {
    write_records_csv(records, out_path);
    std::cout << out_path << "\n";
  }
  return 0;
}

int cmd_report(const std::string& in_path, const std::string& out_prefix,
               bool top3_per_instance) {
  const auto records = read_records_csv(in_path);
  AggregateOptions options;
  options.top3_per_instance = top3_per_instance;
  const auto reports = aggregate(records, options);
  write_reports(reports, out_prefix);
  std::cout << out_prefix << ".csv\n"
            << out_prefix << "_convtime.csv\n"
            << out_prefix << ".json\n";
  return 0;
}

int cmd_bench(const std::string& spec_path, std::vector<std::uint32_t> n,
              std::vector<std::uint32_t> n_sol, const std::string& seeds,
              double p_int, std::uint32_t n_d,
              std::vector<std::string> strategies, std::uint32_t runs,
              std::uint64_t max_iters, std::uint64_t enum_limit,
              const std::string& out_dir, unsigned workers, bool quiet) {
  CampaignSpec spec;
  if (!spec_path.empty()) {
    std::ifstream in(spec_path);
    if (!in) {
      std::cerr << "bench: cannot open spec " << spec_path << "\n";
      return 1;
    }
    nlohmann::json j;
    in >> j;
    spec = campaign_spec_from_json(j);
    if (!out_dir.empty()) spec.out_dir = out_dir;
  } else {
    spec.n_values = std::move(n);
    spec.n_sol_values = std::move(n_sol);
    if (seeds.empty()) {
      std::cerr << "bench: --seeds is required without --spec\n";
      return 2;
    }
    std::tie(spec.seed_begin, spec.seed_end) = parse_seed_range(seeds);
    spec.p_int = p_int;
    spec.n_d = n_d;
    for (const auto& name : strategies) {
      nlohmann::json j;
      j["name"] = name;
      spec.strategies.push_back(policy_from_json(j));
    }
    spec.runs = runs;
    spec.max_iterations = max_iters;
    spec.enum_limit = enum_limit;
    spec.out_dir = out_dir;
  }

  ProgressFn progress;
  if (!quiet) {
    progress = [](const CampaignProgress& p) {
      std::cerr << p.phase << " " << p.item << "\n";
    };
  }
  const CampaignResult result =
      run_campaign(spec, resolve_workers(workers), progress);
  std::cout << (fs::path(spec.out_dir) / "records.csv").string() << " ("
            << result.records.size() << " records"
            << (result.was_noop ? ", unchanged" : "") << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralised coordination toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate planted instances");
  std::uint32_t gen_n = 0;
  double gen_p_int = 0.3;
  std::uint32_t gen_n_d = 8;
  std::uint32_t gen_n_sol = 0;
  std::optional<std::uint64_t> gen_seed;
  std::string gen_seeds;
  std::string gen_out_dir = ".";
  gen->add_option("--n", gen_n, "number of agents (>= 2)")->required();
  gen->add_option("--p-int", gen_p_int, "extra interaction edge probability")
      ->capture_default_str();
  gen->add_option("--n-d", gen_n_d, "max paths per agent")
      ->capture_default_str();
  gen->add_option("--n-sol", gen_n_sol, "planted solutions")->required();
  gen->add_option("--seed", gen_seed, "single generation seed");
  gen->add_option("--seeds", gen_seeds, "inclusive seed range a..b");
  gen->add_option("--out-dir", gen_out_dir, "output directory")
      ->capture_default_str();

  // solve
  auto* solve = app.add_subcommand("solve", "enumerate all solutions");
  std::string solve_instance;
  std::string solve_out;
  std::uint64_t solve_limit = 1'000'000;
  solve->add_option("--instance", solve_instance, "instance JSON")->required();
  solve->add_option("--out", solve_out, "output JSON (default: stdout)");
  solve->add_option("--limit", solve_limit, "abort beyond this many solutions")
      ->capture_default_str();

  // run
  auto* run = app.add_subcommand("run", "seeded coordination runs");
  std::string run_instance;
  std::string run_strategy;
  std::uint32_t run_k = 1;
  double run_alpha = 0.9;
  double run_epsilon = 0.0;
  std::uint64_t run_t_start = 1000;
  std::uint64_t run_window = 10000;
  std::uint32_t run_runs = 1;
  std::uint64_t run_max_iters = 100000;
  std::optional<std::uint64_t> run_seed_base;
  std::string run_solutions;
  std::string run_out;
  run->add_option("--instance", run_instance, "instance JSON")->required();
  run->add_option("--strategy", run_strategy, "k1|kall|kada|dsa")->required();
  run->add_option("--k", run_k, "neighbours sampled for k1")
      ->capture_default_str();
  run->add_option("--alpha", run_alpha, "dsa activation probability")
      ->capture_default_str();
  run->add_option("--epsilon", run_epsilon, "dsa exploration probability")
      ->capture_default_str();
  run->add_option("--t-start", run_t_start, "kada ramp start")
      ->capture_default_str();
  run->add_option("--window", run_window, "kada ramp length")
      ->capture_default_str();
  run->add_option("--runs", run_runs, "number of independent runs")
      ->capture_default_str();
  run->add_option("--max-iters", run_max_iters, "iteration budget per run")
      ->capture_default_str();
  run->add_option("--run-seed-base", run_seed_base,
                  "seed mixed with the run index (default: instance seed)");
  run->add_option("--solutions", run_solutions,
                  "solution set JSON for rank/regret");
  run->add_option("--out", run_out, "records CSV (default: stdout)");

  // report
  auto* report = app.add_subcommand("report", "aggregate run records");
  std::string report_in;
  std::string report_prefix;
  bool report_top3_per_instance = false;
  report->add_option("--in", report_in, "records CSV")->required();
  report->add_option("--out-prefix", report_prefix, "output path prefix")
      ->required();
  report->add_flag("--top3-per-instance", report_top3_per_instance,
                   "average top-3 rate per instance instead of pooling runs");

  // bench
  auto* bench = app.add_subcommand("bench", "run a full campaign");
  std::string bench_spec;
  std::vector<std::uint32_t> bench_n;
  std::vector<std::uint32_t> bench_n_sol;
  std::string bench_seeds;
  double bench_p_int = 0.3;
  std::uint32_t bench_n_d = 8;
  std::vector<std::string> bench_strategies;
  std::uint32_t bench_runs = 100;
  std::uint64_t bench_max_iters = 100000;
  std::uint64_t bench_enum_limit = 1'000'000;
  std::string bench_out_dir;
  unsigned bench_workers = 0;
  bool bench_quiet = false;
  bench->add_option("--spec", bench_spec, "campaign spec JSON");
  bench->add_option("--n", bench_n, "agent counts");
  bench->add_option("--n-sol", bench_n_sol, "planted solution counts");
  bench->add_option("--seeds", bench_seeds, "inclusive seed range a..b");
  bench->add_option("--p-int", bench_p_int, "extra edge probability")
      ->capture_default_str();
  bench->add_option("--n-d", bench_n_d, "max paths per agent")
      ->capture_default_str();
  bench->add_option("--strategy", bench_strategies,
                    "strategy names (repeatable)");
  bench->add_option("--runs", bench_runs, "runs per instance and strategy")
      ->capture_default_str();
  bench->add_option("--max-iters", bench_max_iters, "iteration budget per run")
      ->capture_default_str();
  bench->add_option("--enum-limit", bench_enum_limit,
                    "solution enumeration cutoff")
      ->capture_default_str();
  bench->add_option("--out-dir", bench_out_dir, "campaign output directory");
  bench->add_option("--workers", bench_workers,
                    "worker threads (DCOP_COORD_WORKERS overrides; 0 = auto)")
      ->capture_default_str();
  bench->add_flag("--quiet", bench_quiet, "suppress progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_gen(gen_n, gen_p_int, gen_n_d, gen_n_sol, gen_seed, gen_seeds,
                     gen_out_dir);
    if (solve->parsed()) return cmd_solve(solve_instance, solve_out, solve_limit);
    if (run->parsed())
      return cmd_run(run_instance, run_strategy, run_k, run_alpha, run_epsilon,
                     run_t_start, run_window, run_runs, run_max_iters,
                     run_seed_base, run_solutions, run_out);
    if (report->parsed())
      return cmd_report(report_in, report_prefix, report_top3_per_instance);
    if (bench->parsed())
      return cmd_bench(bench_spec, bench_n, bench_n_sol, bench_seeds,
                       bench_p_int, bench_n_d, bench_strategies, bench_runs,
                       bench_max_iters, bench_enum_limit, bench_out_dir,
                       bench_workers, bench_quiet);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

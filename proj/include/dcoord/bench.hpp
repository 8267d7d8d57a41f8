#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dcoord/coordinate.hpp"
#include "dcoord/enumerate.hpp"
#include "dcoord/generator.hpp"
#include "dcoord/instance_io.hpp"
#include "dcoord/metrics.hpp"

namespace dcoord {

/// Full experimental grid: instances = n_values x n_sol_values x seeds, each
/// run `runs` times per strategy.
struct CampaignSpec {
  std::vector<std::uint32_t> n_values;
  std::vector<std::uint32_t> n_sol_values;
  std::uint64_t seed_begin = 0;
  std::uint64_t seed_end = 0;  // inclusive
  double p_int = 0.3;
  std::uint32_t n_d = 8;
  std::vector<PolicyConfig> strategies;
  std::uint32_t runs = 100;
  std::uint64_t max_iterations = 100000;
  std::uint64_t enum_limit = 1'000'000;
  RankMode rank_mode = RankMode::Dense;
  AggregateOptions aggregate_options;
  std::string out_dir;
};

inline void validate_spec(const CampaignSpec& spec) {
  if (spec.n_values.empty() || spec.n_sol_values.empty())
    throw std::invalid_argument("campaign grid must be non-empty");
  if (spec.seed_begin > spec.seed_end)
    throw std::invalid_argument("seed range is empty");
  if (spec.strategies.empty())
    throw std::invalid_argument("at least one strategy required");
  if (spec.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (spec.out_dir.empty()) throw std::invalid_argument("out_dir required");
}

inline PolicyConfig policy_from_json(const nlohmann::json& j) {
  const auto name = j.at("name").get<std::string>();
  if (name == "kall") return PolicyConfig(KAll{});
  if (name == "kada") {
    KAdaptive s;
    if (j.contains("t_start")) s.t_start = j.at("t_start").get<std::uint64_t>();
    if (j.contains("window")) s.window = j.at("window").get<std::uint64_t>();
    return PolicyConfig(s);
  }
  if (name == "dsa") {
    Dsa s;
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
    if (j.contains("epsilon")) s.epsilon = j.at("epsilon").get<double>();
    return PolicyConfig(s);
  }
  if (name.size() > 1 && name[0] == 'k' &&
      name.find_first_not_of("0123456789", 1) == std::string::npos) {
    KFixed s;
    s.k = static_cast<std::uint32_t>(std::stoul(name.substr(1)));
    if (j.contains("k")) s.k = j.at("k").get<std::uint32_t>();
    return PolicyConfig(s);
  }
  throw std::invalid_argument("unknown strategy name: " + name);
}

inline nlohmann::ordered_json policy_to_json(const PolicyConfig& policy) {
  nlohmann::ordered_json j;
  struct Visitor {
    nlohmann::ordered_json& j;
    void operator()(const KFixed& s) const {
      j["name"] = "k" + std::to_string(s.k);
    }
    void operator()(const KAll&) const { j["name"] = "kall"; }
    void operator()(const KAdaptive& s) const {
      j["name"] = "kada";
      j["t_start"] = s.t_start;
      j["window"] = s.window;
    }
    void operator()(const Dsa& s) const {
      j["name"] = "dsa";
      j["alpha"] = s.alpha;
      j["epsilon"] = s.epsilon;
    }
  };
  std::visit(Visitor{j}, policy.strategy());
  return j;
}

inline CampaignSpec campaign_spec_from_json(const nlohmann::json& j) {
  CampaignSpec spec;
  spec.n_values = j.at("n").get<std::vector<std::uint32_t>>();
  spec.n_sol_values = j.at("n_sol").get<std::vector<std::uint32_t>>();
  const auto seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (seeds.size() != 2)
    throw std::invalid_argument("seeds must be [first, last]");
  spec.seed_begin = seeds[0];
  spec.seed_end = seeds[1];
  if (j.contains("p_int")) spec.p_int = j.at("p_int").get<double>();
  if (j.contains("n_d")) spec.n_d = j.at("n_d").get<std::uint32_t>();
  for (const auto& s : j.at("strategies"))
    spec.strategies.push_back(policy_from_json(s));
  if (j.contains("runs")) spec.runs = j.at("runs").get<std::uint32_t>();
  if (j.contains("max_iterations"))
    spec.max_iterations = j.at("max_iterations").get<std::uint64_t>();
  if (j.contains("enum_limit"))
    spec.enum_limit = j.at("enum_limit").get<std::uint64_t>();
  if (j.contains("rank_mode")) {
    const auto mode = j.at("rank_mode").get<std::string>();
    if (mode == "dense") {
      spec.rank_mode = RankMode::Dense;
    } else if (mode == "ordinal") {
      spec.rank_mode = RankMode::Ordinal;
    } else {
      throw std::invalid_argument("rank_mode must be dense or ordinal");
    }
  }
  if (j.contains("top3_per_instance"))
    spec.aggregate_options.top3_per_instance =
        j.at("top3_per_instance").get<bool>();
  if (j.contains("out_dir")) spec.out_dir = j.at("out_dir").get<std::string>();
  return spec;
}

inline nlohmann::ordered_json campaign_spec_to_json(const CampaignSpec& spec) {
  nlohmann::ordered_json j;
  j["n"] = spec.n_values;
  j["n_sol"] = spec.n_sol_values;
  j["seeds"] = {spec.seed_begin, spec.seed_end};
  j["p_int"] = spec.p_int;
  j["n_d"] = spec.n_d;
  auto strategies = nlohmann::ordered_json::array();
  for (const auto& s : spec.strategies) strategies.push_back(policy_to_json(s));
  j["strategies"] = std::move(strategies);
  j["runs"] = spec.runs;
  j["max_iterations"] = spec.max_iterations;
  j["enum_limit"] = spec.enum_limit;
  j["rank_mode"] = spec.rank_mode == RankMode::Dense ? "dense" : "ordinal";
  j["top3_per_instance"] = spec.aggregate_options.top3_per_instance;
  return j;
}

inline std::string instance_file_name(std::uint32_t n, std::uint32_t n_sol,
                                      std::uint64_t seed) {
  return "inst_n" + std::to_string(n) + "_s" + std::to_string(n_sol) +
         "_seed" + std::to_string(seed) + ".json";
}

inline std::string solutions_file_name(std::uint32_t n, std::uint32_t n_sol,
                                       std::uint64_t seed) {
  return "sol_n" + std::to_string(n) + "_s" + std::to_string(n_sol) + "_seed" +
         std::to_string(seed) + ".json";
}

struct CampaignProgress {
  std::string phase;  // "generate" | "enumerate" | "runs" | "merge"
  std::string item;
};
using ProgressFn = std::function<void(const CampaignProgress&)>;

struct CampaignResult {
  std::vector<RunRecord> records;
  nlohmann::ordered_json manifest;
  bool was_noop = false;
};

/// Worker count: the DCOP_COORD_WORKERS environment variable overrides the
/// requested value; 0 means hardware concurrency.
inline unsigned resolve_workers(unsigned requested) {
  if (const char* env = std::getenv("DCOP_COORD_WORKERS")) {
    const auto parsed = std::strtoul(env, nullptr, 10);
    if (parsed > 0) return static_cast<unsigned>(parsed);
  }
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

namespace detail {

inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

/// Runs tasks [0, count) on `workers` threads; rethrows the first exception.
template <typename Fn>
void run_tasks(std::size_t count, unsigned workers, Fn&& task) {
  if (count == 0) return;
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error) return;
      }
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const auto width = std::min<std::size_t>(workers, count);
  pool.reserve(width);
  for (std::size_t i = 0; i < width; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct GridPoint {
  std::uint32_t n = 0;
  std::uint32_t n_sol = 0;
  std::uint64_t seed = 0;
};

}  // namespace detail

/// Executes a campaign: generate -> enumerate -> run x strategies -> report.
///
/// Every artifact is keyed by its parameters and written once (atomically),
/// so an interrupted campaign resumes where it stopped and a completed one
/// is a no-op. Per-instance generation or enumeration failures are recorded
/// in the manifest without aborting; runs on instances without an oracle
/// still execute but carry no rank/regret.
inline CampaignResult run_campaign(const CampaignSpec& spec,
                                   unsigned workers = 1,
                                   const ProgressFn& progress = {}) {
  namespace fs = std::filesystem;
  validate_spec(spec);

  const fs::path out_dir(spec.out_dir);
  const fs::path inst_dir = out_dir / "instances";
  const fs::path sol_dir = out_dir / "solutions";
  const fs::path parts_dir = out_dir / "parts";
  fs::create_directories(inst_dir);
  fs::create_directories(sol_dir);
  fs::create_directories(parts_dir);

  const std::string spec_fingerprint = campaign_spec_to_json(spec).dump();
  const fs::path manifest_path = out_dir / "manifest.json";
  const fs::path records_path = out_dir / "records.csv";

  // Completed campaign: nothing to do. The manifest is re-parsed with key
  // order preserved so the stored spec compares byte-for-byte.
  if (fs::exists(manifest_path) && fs::exists(records_path)) {
    std::ifstream in(manifest_path);
    nlohmann::ordered_json prev;
    in >> prev;
    if (prev.value("complete", false) &&
        prev.value("spec", nlohmann::ordered_json{}).dump() ==
            spec_fingerprint) {
      CampaignResult result;
      result.records = read_records_csv(records_path.string());
      result.manifest = std::move(prev);
      result.was_noop = true;
      return result;
    }
  }

  std::vector<detail::GridPoint> grid;
  for (const std::uint32_t n : spec.n_values)
    for (const std::uint32_t n_sol : spec.n_sol_values)
      for (std::uint64_t seed = spec.seed_begin; seed <= spec.seed_end; ++seed)
        grid.push_back({n, n_sol, seed});

  std::mutex progress_mutex;
  auto report_progress = [&](const std::string& phase,
                             const std::string& item) {
    if (!progress) return;
    std::lock_guard<std::mutex> lock(progress_mutex);
    progress(CampaignProgress{phase, item});
  };

  // Phase 1: instances and solution sets.
  detail::run_tasks(grid.size(), workers, [&](std::size_t gi) {
    const auto& point = grid[gi];
    const GenerationParams params{point.n, spec.p_int, spec.n_d, point.n_sol,
                                  point.seed};
    const fs::path inst_path =
        inst_dir / instance_file_name(point.n, point.n_sol, point.seed);
    const fs::path inst_failed = inst_path.string() + ".failed";
    if (!fs::exists(inst_path) && !fs::exists(inst_failed)) {
      report_progress("generate", inst_path.filename().string());
      try {
        auto generated = generate_instance(params);
        detail::write_text_atomic(inst_path,
                                  instance_to_string(generated.instance));
      } catch (const DistinctSolutionExhaustion& e) {
        detail::write_text_atomic(inst_failed, std::string(e.what()) + "\n");
        return;
      }
    }
    if (fs::exists(inst_failed)) return;

    const fs::path sol_path =
        sol_dir / solutions_file_name(point.n, point.n_sol, point.seed);
    const fs::path sol_failed = sol_path.string() + ".limit_exceeded";
    if (!fs::exists(sol_path) && !fs::exists(sol_failed)) {
      report_progress("enumerate", sol_path.filename().string());
      const ProblemInstance inst = load_instance_file(inst_path.string());
      try {
        const SolutionSet set = enumerate_solutions(inst, spec.enum_limit);
        detail::write_text_atomic(sol_path,
                                  solution_set_to_json(set).dump() + "\n");
      } catch (const LimitExceeded& e) {
        detail::write_text_atomic(sol_failed, std::string(e.what()) + "\n");
      }
    }
  });

  // Phase 2: simulation runs, one part file per (instance, strategy).
  struct RunUnit {
    std::size_t grid_index;
    std::size_t strategy_index;
  };
  std::vector<RunUnit> units;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const auto& point = grid[gi];
    const fs::path inst_path =
        inst_dir / instance_file_name(point.n, point.n_sol, point.seed);
    if (!fs::exists(inst_path)) continue;  // generation failed
    for (std::size_t si = 0; si < spec.strategies.size(); ++si)
      units.push_back({gi, si});
  }

  auto part_path = [&](const detail::GridPoint& point,
                       const PolicyConfig& policy) {
    return parts_dir / ("part_" + policy.name() + "_n" +
                        std::to_string(point.n) + "_s" +
                        std::to_string(point.n_sol) + "_seed" +
                        std::to_string(point.seed) + ".csv");
  };

  detail::run_tasks(units.size(), workers, [&](std::size_t ui) {
    const auto& unit = units[ui];
    const auto& point = grid[unit.grid_index];
    const PolicyConfig& policy = spec.strategies[unit.strategy_index];
    const fs::path part = part_path(point, policy);
    if (fs::exists(part)) return;
    report_progress("runs", part.filename().string());

    const ProblemInstance inst = load_instance_file(
        (inst_dir / instance_file_name(point.n, point.n_sol, point.seed))
            .string());
    const fs::path sol_path =
        sol_dir / solutions_file_name(point.n, point.n_sol, point.seed);
    std::optional<SolutionSet> oracle;
    if (fs::exists(sol_path))
      oracle = load_solution_set_file(sol_path.string());

    std::vector<RunRecord> records;
    records.reserve(spec.runs);
    for (std::uint32_t run = 0; run < spec.runs; ++run) {
      const std::uint64_t run_seed = mix_seeds(point.seed, run);
      const RunResult res = run_coordination(
          inst, policy, run_seed, spec.max_iterations,
          oracle ? &*oracle : nullptr, spec.rank_mode);
      RunRecord rec;
      rec.strategy = policy.name();
      rec.n = point.n;
      rec.n_sol = point.n_sol;
      rec.instance_seed = point.seed;
      rec.run_index = run;
      rec.run_seed = run_seed;
      rec.converged = res.converged;
      rec.iterations = res.iterations;
      rec.eta = res.eta;
      rec.rank = res.rank;
      rec.regret_pct = res.regret_pct;
      records.push_back(std::move(rec));
    }
    const fs::path tmp = part.string() + ".tmp";
    write_records_csv(records, tmp.string(), /*sorted=*/true);
    fs::rename(tmp, part);
  });

  // Phase 3: merge, aggregate, manifest.
  report_progress("merge", "records.csv");
  std::vector<RunRecord> all_records;
  auto manifest_instances = nlohmann::ordered_json::array();
  auto manifest_parts = nlohmann::ordered_json::array();
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const auto& point = grid[gi];
    nlohmann::ordered_json entry;
    entry["n"] = point.n;
    entry["n_sol"] = point.n_sol;
    entry["seed"] = point.seed;
    entry["p_int"] = spec.p_int;
    entry["n_d"] = spec.n_d;

    const std::string inst_name =
        instance_file_name(point.n, point.n_sol, point.seed);
    const fs::path inst_path = inst_dir / inst_name;
    if (!fs::exists(inst_path)) {
      entry["status"] = "generation_failed";
      manifest_instances.push_back(std::move(entry));
      continue;
    }
    entry["status"] = "ok";
    entry["instance"] = "instances/" + inst_name;

    const std::string sol_name =
        solutions_file_name(point.n, point.n_sol, point.seed);
    const fs::path sol_path = sol_dir / sol_name;
    if (fs::exists(sol_path)) {
      entry["enumeration"] = "ok";
      entry["solutions"] = "solutions/" + sol_name;
      std::ifstream in(sol_path);
      nlohmann::json sol;
      in >> sol;
      entry["solution_count"] = sol.at("count");
    } else {
      entry["enumeration"] = "limit_exceeded";
    }

    for (const auto& policy : spec.strategies) {
      const fs::path part = part_path(point, policy);
      auto part_records = read_records_csv(part.string());
      all_records.insert(all_records.end(), part_records.begin(),
                         part_records.end());
      manifest_parts.push_back("parts/" + part.filename().string());
    }
    manifest_instances.push_back(std::move(entry));
  }

  write_records_csv(all_records, records_path.string(), /*sorted=*/true);
  all_records = read_records_csv(records_path.string());  // canonical order

  const auto reports = aggregate(all_records, spec.aggregate_options);
  write_reports(reports, (out_dir / "report").string());

  nlohmann::ordered_json manifest;
  manifest["spec"] = nlohmann::ordered_json::parse(spec_fingerprint);
  manifest["instances"] = std::move(manifest_instances);
  manifest["parts"] = std::move(manifest_parts);
  manifest["records"] = "records.csv";
  manifest["reports"] = {"report.csv", "report.json", "report_convtime.csv"};
  manifest["complete"] = true;
  detail::write_text_atomic(manifest_path, manifest.dump(2) + "\n");

  CampaignResult result;
  result.records = std::move(all_records);
  result.manifest = std::move(manifest);
  return result;
}

}  // namespace dcoord

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcoord/format.hpp"

namespace dcoord {

struct EmptyGroup : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RecordsFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One simulation run, flattened for the records CSV.
struct RunRecord {
  std::string strategy;
  std::uint32_t n = 0;
  std::uint32_t n_sol = 0;
  std::uint64_t instance_seed = 0;
  std::uint32_t run_index = 0;
  std::uint64_t run_seed = 0;
  bool converged = false;
  std::uint64_t iterations = 0;
  double eta = 0.0;
  std::optional<std::uint32_t> rank;
  std::optional<double> regret_pct;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

inline constexpr const char* kRecordsCsvHeader =
    "strategy,n,n_sol,instance_seed,run_index,run_seed,converged,iterations,"
    "eta,rank,regret_pct";

inline std::string record_to_csv_row(const RunRecord& r) {
  std::string row;
  row += r.strategy;
  row += ',' + std::to_string(r.n);
  row += ',' + std::to_string(r.n_sol);
  row += ',' + std::to_string(r.instance_seed);
  row += ',' + std::to_string(r.run_index);
  row += ',' + std::to_string(r.run_seed);
  row += r.converged ? ",1" : ",0";
  row += ',' + std::to_string(r.iterations);
  row += ',' + format_double(r.eta);
  row += ',';
  if (r.rank) row += std::to_string(*r.rank);
  row += ',';
  if (r.regret_pct) row += format_double(*r.regret_pct);
  return row;
}

/// Canonical row order of the records CSV: strategy, then instance key, then
/// run index.
inline bool record_less(const RunRecord& a, const RunRecord& b) {
  return std::tie(a.strategy, a.n, a.n_sol, a.instance_seed, a.run_index) <
         std::tie(b.strategy, b.n, b.n_sol, b.instance_seed, b.run_index);
}

inline void write_records_csv(std::vector<RunRecord> records,
                              const std::string& path, bool sorted = true) {
  if (sorted) std::sort(records.begin(), records.end(), record_less);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << kRecordsCsvHeader << "\n";
  for (const auto& r : records) out << record_to_csv_row(r) << "\n";
}

inline std::vector<RunRecord> parse_records_csv(std::istream& in,
                                                const std::string& origin) {
  std::string line;
  if (!std::getline(in, line) || line != kRecordsCsvHeader)
    throw RecordsFormatError("bad records header in " + origin);
  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != 11)
      throw RecordsFormatError("bad records row in " + origin + ": " + line);
    RunRecord r;
    r.strategy = fields[0];
    r.n = static_cast<std::uint32_t>(std::stoul(fields[1]));
    r.n_sol = static_cast<std::uint32_t>(std::stoul(fields[2]));
    r.instance_seed = std::stoull(fields[3]);
    r.run_index = static_cast<std::uint32_t>(std::stoul(fields[4]));
    r.run_seed = std::stoull(fields[5]);
    r.converged = fields[6] == "1";
    r.iterations = std::stoull(fields[7]);
    r.eta = std::stod(fields[8]);
    if (!fields[9].empty())
      r.rank = static_cast<std::uint32_t>(std::stoul(fields[9]));
    if (!fields[10].empty()) r.regret_pct = std::stod(fields[10]);
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<RunRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open records file: " + path);
  return parse_records_csv(in, path);
}

// ---------------------------------------------------------------------------
// Aggregation

struct GroupKey {
  std::string strategy;
  std::uint32_t n = 0;
  std::uint32_t n_sol = 0;

  friend auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

/// Rank buckets 1..9, ">=10" and "Fail".
inline constexpr std::size_t kRankBuckets = 11;
inline constexpr std::size_t kBucketGe10 = 9;
inline constexpr std::size_t kBucketFail = 10;

inline std::string rank_bucket_label(std::size_t bucket) {
  if (bucket == kBucketFail) return "Fail";
  if (bucket == kBucketGe10) return ">=10";
  return std::to_string(bucket + 1);
}

struct RegretStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::uint64_t count = 0;
};

struct ConvTimeBin {
  double lo = 0.0;
  double hi = 0.0;
  std::uint64_t count = 0;
};

struct AggregateReport {
  GroupKey key;
  std::uint64_t total_runs = 0;
  std::array<std::uint64_t, kRankBuckets> rank_counts{};
  std::array<double, kRankBuckets> rank_fractions{};
  double top3_rate = 0.0;
  std::optional<RegretStats> regret_rank23;  // over converged runs at rank 2-3
  std::vector<ConvTimeBin> convergence_hist;  // converged runs only
};

struct AggregateOptions {
  /// Default top-3 rate pools all runs of the group; with this set it is the
  /// mean of per-instance top-3 rates instead.
  bool top3_per_instance = false;
};

/// Nearest-rank quantile of an ascending-sorted, non-empty sample.
inline double quantile_nearest_rank(const std::vector<double>& sorted,
                                    double p) {
  const auto n = sorted.size();
  auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  if (idx < 1) idx = 1;
  if (idx > n) idx = n;
  return sorted[idx - 1];
}

/// Convergence-time bin edges: a [0, 1) bin, then 10 bins per decade up to
/// 10^5 inclusive.
inline const std::vector<double>& convergence_bin_edges() {
  static const std::vector<double> edges = [] {
    std::vector<double> e;
    e.push_back(0.0);
    for (int j = 0; j <= 51; ++j) e.push_back(std::pow(10.0, j / 10.0));
    return e;
  }();
  return edges;
}

namespace detail {

inline AggregateReport aggregate_one(const GroupKey& key,
                                     const std::vector<const RunRecord*>& runs,
                                     const AggregateOptions& opts) {
  AggregateReport rep;
  rep.key = key;
  rep.total_runs = runs.size();

  std::vector<double> regrets23;
  const auto& edges = convergence_bin_edges();
  std::vector<std::uint64_t> hist(edges.size() - 1, 0);
  std::uint64_t bucketed = 0;
  std::uint64_t top3 = 0;
  std::map<std::pair<std::uint64_t, std::uint32_t>,
           std::pair<std::uint64_t, std::uint64_t>>
      per_instance;  // (seed, n) -> (top3, total); n_sol fixed within group

  for (const RunRecord* r : runs) {
    if (!r->converged) {
      ++rep.rank_counts[kBucketFail];
      ++bucketed;
    } else if (r->rank) {
      const std::uint32_t rank = *r->rank;
      ++rep.rank_counts[rank >= 10 ? kBucketGe10 : rank - 1];
      ++bucketed;
      if (rank <= 3) ++top3;
      if ((rank == 2 || rank == 3) && r->regret_pct)
        regrets23.push_back(*r->regret_pct);
    }
    if (r->converged) {
      const auto it = std::upper_bound(edges.begin(), edges.end(),
                                       static_cast<double>(r->iterations));
      const auto bin = static_cast<std::size_t>(it - edges.begin()) - 1;
      if (bin < hist.size()) ++hist[bin];
    }
    auto& pi = per_instance[{r->instance_seed, r->n}];
    ++pi.second;
    if (r->converged && r->rank && *r->rank <= 3) ++pi.first;
  }

  for (std::size_t b = 0; b < kRankBuckets; ++b) {
    rep.rank_fractions[b] =
        bucketed == 0 ? 0.0
                      : static_cast<double>(rep.rank_counts[b]) /
                            static_cast<double>(bucketed);
  }

  if (opts.top3_per_instance) {
    double sum = 0.0;
    for (const auto& [id, counts] : per_instance)
      sum += static_cast<double>(counts.first) /
             static_cast<double>(counts.second);
    rep.top3_rate = sum / static_cast<double>(per_instance.size());
  } else {
    rep.top3_rate =
        static_cast<double>(top3) / static_cast<double>(runs.size());
  }

  if (!regrets23.empty()) {
    std::sort(regrets23.begin(), regrets23.end());
    RegretStats stats;
    stats.q1 = quantile_nearest_rank(regrets23, 0.25);
    stats.median = quantile_nearest_rank(regrets23, 0.50);
    stats.q3 = quantile_nearest_rank(regrets23, 0.75);
    stats.max = regrets23.back();
    stats.count = regrets23.size();
    rep.regret_rank23 = stats;
  }

  rep.convergence_hist.reserve(hist.size());
  for (std::size_t b = 0; b < hist.size(); ++b)
    rep.convergence_hist.push_back(ConvTimeBin{edges[b], edges[b + 1], hist[b]});
  return rep;
}

}  // namespace detail

/// Groups records by (strategy, n, n_sol) and computes the per-group report.
/// Groups come out sorted by key; input order does not matter.
inline std::vector<AggregateReport> aggregate(
    const std::vector<RunRecord>& records, const AggregateOptions& opts = {}) {
  std::map<GroupKey, std::vector<const RunRecord*>> groups;
  for (const auto& r : records)
    groups[GroupKey{r.strategy, r.n, r.n_sol}].push_back(&r);
  std::vector<AggregateReport> out;
  out.reserve(groups.size());
  for (const auto& [key, runs] : groups)
    out.push_back(detail::aggregate_one(key, runs, opts));
  return out;
}

/// Report for one requested group; throws EmptyGroup when no record matches.
inline AggregateReport aggregate_group(const std::vector<RunRecord>& records,
                                       const GroupKey& key,
                                       const AggregateOptions& opts = {}) {
  std::vector<const RunRecord*> runs;
  for (const auto& r : records) {
    if (r.strategy == key.strategy && r.n == key.n && r.n_sol == key.n_sol)
      runs.push_back(&r);
  }
  if (runs.empty())
    throw EmptyGroup("no records for group " + key.strategy + ",n=" +
                     std::to_string(key.n) + ",n_sol=" +
                     std::to_string(key.n_sol));
  return detail::aggregate_one(key, runs, opts);
}

// ---------------------------------------------------------------------------
// Report output

inline constexpr const char* kReportCsvHeader =
    "strategy,n,n_sol,runs,frac_rank_1,frac_rank_2,frac_rank_3,frac_rank_4,"
    "frac_rank_5,frac_rank_6,frac_rank_7,frac_rank_8,frac_rank_9,"
    "frac_rank_ge10,frac_fail,top3_rate,regret23_count,regret23_q1,"
    "regret23_median,regret23_q3,regret23_max";

inline std::string report_to_csv_row(const AggregateReport& rep) {
  std::string row = rep.key.strategy;
  row += ',' + std::to_string(rep.key.n);
  row += ',' + std::to_string(rep.key.n_sol);
  row += ',' + std::to_string(rep.total_runs);
  for (std::size_t b = 0; b < kRankBuckets; ++b)
    row += ',' + format_double(rep.rank_fractions[b]);
  row += ',' + format_double(rep.top3_rate);
  if (rep.regret_rank23) {
    row += ',' + std::to_string(rep.regret_rank23->count);
    row += ',' + format_double(rep.regret_rank23->q1);
    row += ',' + format_double(rep.regret_rank23->median);
    row += ',' + format_double(rep.regret_rank23->q3);
    row += ',' + format_double(rep.regret_rank23->max);
  } else {
    row += ",0,,,,";
  }
  return row;
}

inline nlohmann::ordered_json report_to_json(const AggregateReport& rep) {
  nlohmann::ordered_json j;
  j["strategy"] = rep.key.strategy;
  j["n"] = rep.key.n;
  j["n_sol"] = rep.key.n_sol;
  j["runs"] = rep.total_runs;
  nlohmann::ordered_json hist;
  for (std::size_t b = 0; b < kRankBuckets; ++b) {
    hist[rank_bucket_label(b)] = {{"count", rep.rank_counts[b]},
                                  {"fraction", rep.rank_fractions[b]}};
  }
  j["rank_histogram"] = std::move(hist);
  j["top3_rate"] = rep.top3_rate;
  if (rep.regret_rank23) {
    j["regret_rank23"] = {{"count", rep.regret_rank23->count},
                          {"q1", rep.regret_rank23->q1},
                          {"median", rep.regret_rank23->median},
                          {"q3", rep.regret_rank23->q3},
                          {"max", rep.regret_rank23->max}};
  } else {
    j["regret_rank23"] = nullptr;
  }
  auto bins = nlohmann::ordered_json::array();
  for (const auto& bin : rep.convergence_hist) {
    if (bin.count == 0) continue;
    bins.push_back({{"lo", bin.lo}, {"hi", bin.hi}, {"count", bin.count}});
  }
  j["convergence_time_histogram"] = std::move(bins);
  return j;
}

/// Writes <prefix>.csv, <prefix>.json and <prefix>_convtime.csv.
inline void write_reports(const std::vector<AggregateReport>& reports,
                          const std::string& prefix) {
  {
    std::ofstream out(prefix + ".csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + prefix + ".csv");
    out << kReportCsvHeader << "\n";
    for (const auto& rep : reports) out << report_to_csv_row(rep) << "\n";
  }
  {
    std::ofstream out(prefix + "_convtime.csv", std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write " + prefix + "_convtime.csv");
    out << "strategy,n,n_sol,bin_lo,bin_hi,count\n";
    for (const auto& rep : reports) {
      for (const auto& bin : rep.convergence_hist) {
        if (bin.count == 0) continue;
        out << rep.key.strategy << ',' << rep.key.n << ',' << rep.key.n_sol
            << ',' << format_double(bin.lo) << ',' << format_double(bin.hi)
            << ',' << bin.count << "\n";
      }
    }
  }
  {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& rep : reports) arr.push_back(report_to_json(rep));
    std::ofstream out(prefix + ".json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + prefix + ".json");
    out << arr.dump(2) << "\n";
  }
}

}  // namespace dcoord

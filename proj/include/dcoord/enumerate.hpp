#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcoord/core.hpp"

namespace dcoord {

/// Raised when an instance has more feasible assignments than the caller's
/// enumeration limit.
struct LimitExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised by rank/regret queries for a value that no solution attains.
struct NotASolutionValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every feasible complete assignment of an instance, with objective values.
/// Solutions are sorted by objective descending, ties by ascending assignment;
/// objective values are rounded to the 9-decimal comparison grid.
struct SolutionSet {
  std::vector<std::pair<Assignment, double>> solutions;
  std::vector<double> distinct_values;  // strictly decreasing
  double optimal_value = 0.0;

  bool empty() const { return solutions.empty(); }
  std::size_t size() const { return solutions.size(); }
};

namespace detail {

class ForwardCheckingEnumerator {
 public:
  ForwardCheckingEnumerator(const ProblemInstance& inst, std::uint64_t limit)
      : inst_(inst),
        limit_(limit),
        alive_(inst.path_count(), 1),
        alive_count_(inst.agent_count()),
        current_(inst.agent_count()) {
    for (AgentId a = 0; a < inst.agent_count(); ++a)
      alive_count_[a] = inst.domain_size(a);
    // Only forward neighbours (j > i) need pruning: agents are assigned in
    // index order, so backward edges are satisfied by construction.
    forward_.resize(inst.agent_count());
    for (AgentId a = 0; a < inst.agent_count(); ++a)
      for (AgentId b : inst.interaction().neighbours(a))
        if (b > a) forward_[a].push_back(b);
  }

  std::vector<std::pair<Assignment, double>> run() {
    descend(0);
    return std::move(found_);
  }

 private:
  void descend(AgentId agent) {
    if (agent == inst_.agent_count()) {
      if (found_.size() >= limit_)
        throw LimitExceeded("more than " + std::to_string(limit_) +
                            " solutions");
      Assignment s(current_);
      const double eta = round_eta(objective(inst_, s));
      found_.emplace_back(std::move(s), eta);
      return;
    }
    const std::uint32_t base = inst_.global_id(PathId{agent, 0});
    for (std::uint32_t local = 0; local < inst_.domain_size(agent); ++local) {
      if (!alive_[base + local]) continue;
      current_[agent] = local;
      const std::size_t trail_mark = trail_.size();
      if (prune_forward(agent, base + local)) descend(agent + 1);
      undo(trail_mark);
    }
  }

  // Removes forward-neighbour paths incompatible with `gid`. Returns false
  // on a wipe-out (some unassigned neighbour loses its whole domain).
  bool prune_forward(AgentId agent, std::uint32_t gid) {
    bool viable = true;
    for (AgentId nbr : forward_[agent]) {
      const std::uint32_t nbase = inst_.global_id(PathId{nbr, 0});
      for (std::uint32_t q = 0; q < inst_.domain_size(nbr); ++q) {
        const std::uint32_t ngid = nbase + q;
        if (!alive_[ngid]) continue;
        if (!inst_.compatible_by_gid(gid, ngid)) {
          alive_[ngid] = 0;
          --alive_count_[nbr];
          trail_.push_back(ngid);
        }
      }
      if (alive_count_[nbr] == 0) viable = false;  // keep trail consistent
    }
    return viable;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      const std::uint32_t gid = trail_.back();
      trail_.pop_back();
      alive_[gid] = 1;
      ++alive_count_[inst_.path_from_global(gid).owner];
    }
  }

  const ProblemInstance& inst_;
  std::uint64_t limit_;
  std::vector<char> alive_;
  std::vector<std::uint32_t> alive_count_;
  std::vector<std::uint32_t> current_;
  std::vector<std::uint32_t> trail_;
  std::vector<std::vector<AgentId>> forward_;
  std::vector<std::pair<Assignment, double>> found_;
};

}  // namespace detail

/// Enumerates every feasible complete assignment by depth-first backtracking
/// with forward checking, agents in index order and paths in local order.
/// Throws LimitExceeded when more than `limit` solutions exist.
inline SolutionSet enumerate_solutions(const ProblemInstance& inst,
                                       std::uint64_t limit = 1'000'000) {
  detail::ForwardCheckingEnumerator search(inst, limit);
  SolutionSet out;
  out.solutions = search.run();

  std::sort(out.solutions.begin(), out.solutions.end(),
            [](const auto& lhs, const auto& rhs) {
              const auto lk = eta_key(lhs.second), rk = eta_key(rhs.second);
              if (lk != rk) return lk > rk;
              return lhs.first < rhs.first;
            });

  std::int64_t prev_key = 0;
  for (std::size_t i = 0; i < out.solutions.size(); ++i) {
    const double eta = out.solutions[i].second;
    if (i == 0 || eta_key(eta) != prev_key) {
      out.distinct_values.push_back(eta);
      prev_key = eta_key(eta);
    }
  }
  if (!out.distinct_values.empty()) out.optimal_value = out.distinct_values[0];
  return out;
}

enum class RankMode { Dense, Ordinal };

/// Position of an objective value in the solution ranking. Dense mode ranks
/// distinct values (rank 1 = optimal); ordinal mode gives the 1-based
/// position of the first solution attaining the value in the sorted list.
inline std::uint32_t rank_of(const SolutionSet& set, double eta,
                             RankMode mode = RankMode::Dense) {
  const std::int64_t key = eta_key(eta);
  if (mode == RankMode::Dense) {
    for (std::size_t i = 0; i < set.distinct_values.size(); ++i) {
      if (eta_key(set.distinct_values[i]) == key)
        return static_cast<std::uint32_t>(i + 1);
    }
    throw NotASolutionValue("objective value not attained by any solution");
  }
  std::uint32_t position = 1;
  for (const auto& [assignment, value] : set.solutions) {
    const std::int64_t vk = eta_key(value);
    if (vk == key) return position;
    if (vk < key) break;  // sorted descending
    ++position;
  }
  throw NotASolutionValue("objective value not attained by any solution");
}

/// Percentage loss of `eta` against the optimal value.
inline double regret_pct(const SolutionSet& set, double eta) {
  rank_of(set, eta);  // validates eta
  const double opt = round_eta(set.optimal_value);
  if (eta_key(eta) == eta_key(opt)) return 0.0;
  return 100.0 * (opt - round_eta(eta)) / opt;
}

/// Canonical JSON for a solution set; the `solve` output format.
inline nlohmann::ordered_json solution_set_to_json(const SolutionSet& set) {
  nlohmann::ordered_json j;
  j["count"] = set.solutions.size();
  j["optimal_value"] = set.optimal_value;
  j["distinct_values"] = set.distinct_values;
  auto sols = nlohmann::ordered_json::array();
  for (const auto& [assignment, eta] : set.solutions)
    sols.push_back({{"values", assignment.locals()}, {"eta", eta}});
  j["solutions"] = std::move(sols);
  return j;
}

inline SolutionSet solution_set_from_json(const nlohmann::json& j) {
  SolutionSet set;
  for (const auto& s : j.at("solutions")) {
    set.solutions.emplace_back(
        Assignment(s.at("values").get<std::vector<std::uint32_t>>()),
        s.at("eta").get<double>());
  }
  set.distinct_values = j.at("distinct_values").get<std::vector<double>>();
  set.optimal_value = j.at("optimal_value").get<double>();
  return set;
}

inline void write_solution_set_file(const SolutionSet& set,
                                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << solution_set_to_json(set).dump() << "\n";
}

inline SolutionSet load_solution_set_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open solutions file: " + path);
  nlohmann::json j;
  in >> j;
  return solution_set_from_json(j);
}

}  // namespace dcoord

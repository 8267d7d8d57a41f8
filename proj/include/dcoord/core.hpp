#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dcoord {

using AgentId = std::uint32_t;

/// One value of an agent's domain, identified by its owner and its position
/// in the owner's domain list.
struct PathId {
  AgentId owner = 0;
  std::uint32_t local_index = 0;

  friend auto operator<=>(const PathId&, const PathId&) = default;
};

/// Rounds an objective value to 9 decimal places. Utilities are sums of 1.0
/// and 0.1 increments, so after rounding equal-by-construction scores compare
/// exactly equal regardless of summation order.
inline double round_eta(double eta) {
  return static_cast<double>(std::llround(eta * 1e9)) / 1e9;
}

/// Integer comparison key for rounded objective values.
inline std::int64_t eta_key(double eta) { return std::llround(eta * 1e9); }

/// Undirected graph over agents. An edge means the two agents must hold
/// mutually compatible values.
class InteractionGraph {
 public:
  explicit InteractionGraph(std::uint32_t n) : adj_(n) {
    if (n < 2) throw std::invalid_argument("interaction graph needs n >= 2");
  }

  std::uint32_t agent_count() const {
    return static_cast<std::uint32_t>(adj_.size());
  }

  void add_edge(AgentId a, AgentId b) {
    if (a == b) throw std::invalid_argument("self-loop in interaction graph");
    if (a >= agent_count() || b >= agent_count())
      throw std::invalid_argument("agent id out of range");
    if (has_edge(a, b)) return;
    adj_[a].push_back(b);
    adj_[b].push_back(a);
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }

  bool has_edge(AgentId a, AgentId b) const {
    const auto& nbrs = adj_[a].size() <= adj_[b].size() ? adj_[a] : adj_[b];
    const AgentId other = adj_[a].size() <= adj_[b].size() ? b : a;
    return std::find(nbrs.begin(), nbrs.end(), other) != nbrs.end();
  }

  const std::vector<AgentId>& neighbours(AgentId a) const { return adj_[a]; }

  std::size_t edge_count() const { return edges_.size(); }

  /// Edges with the smaller endpoint first, in insertion order (ascending
  /// lexicographic once canonicalize() has run).
  const std::vector<std::pair<AgentId, AgentId>>& edges() const {
    return edges_;
  }

  /// Edges with the smaller endpoint first, sorted lexicographically.
  std::vector<std::pair<AgentId, AgentId>> sorted_edges() const {
    auto out = edges_;
    std::sort(out.begin(), out.end());
    return out;
  }

  bool connected() const {
    std::vector<char> seen(agent_count(), 0);
    std::vector<AgentId> stack{0};
    seen[0] = 1;
    std::size_t visited = 1;
    while (!stack.empty()) {
      const AgentId a = stack.back();
      stack.pop_back();
      for (AgentId b : adj_[a]) {
        if (!seen[b]) {
          seen[b] = 1;
          ++visited;
          stack.push_back(b);
        }
      }
    }
    return visited == agent_count();
  }

  /// Sorts adjacency lists into canonical ascending order.
  void canonicalize() {
    for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());
    std::sort(edges_.begin(), edges_.end());
  }

 private:
  std::vector<std::vector<AgentId>> adj_;
  std::vector<std::pair<AgentId, AgentId>> edges_;
};

/// Parameters of the instance generator, kept as instance metadata.
struct GenerationParams {
  std::uint32_t n = 2;
  double p_int = 0.3;
  std::uint32_t n_d = 8;
  std::uint32_t n_sol = 1;
  std::uint64_t seed = 0;
};

/// A complete assignment: the local path index chosen by each agent. Storing
/// local indices keyed by agent makes "values[i] belongs to agent i" hold by
/// construction.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::uint32_t n) : local_(n, 0) {}
  explicit Assignment(std::vector<std::uint32_t> locals)
      : local_(std::move(locals)) {}

  std::uint32_t agent_count() const {
    return static_cast<std::uint32_t>(local_.size());
  }
  std::uint32_t local(AgentId a) const { return local_[a]; }
  void set_local(AgentId a, std::uint32_t idx) { local_[a] = idx; }
  PathId path_of(AgentId a) const { return PathId{a, local_[a]}; }
  const std::vector<std::uint32_t>& locals() const { return local_; }

  friend auto operator<=>(const Assignment&, const Assignment&) = default;

 private:
  std::vector<std::uint32_t> local_;
};

/// A coordination problem: interaction graph, per-agent path domains with
/// utilities, and the compatibility edges between paths of neighbouring
/// agents. Immutable once built (the generator and the JSON loader are the
/// only writers); safe to share across concurrent simulation runs.
class ProblemInstance {
 public:
  ProblemInstance(InteractionGraph graph,
                  std::vector<std::vector<double>> utilities)
      : graph_(std::move(graph)) {
    if (utilities.size() != graph_.agent_count())
      throw std::invalid_argument("one domain per agent required");
    path_offset_.reserve(utilities.size() + 1);
    path_offset_.push_back(0);
    for (const auto& dom : utilities) {
      if (dom.empty())
        throw std::invalid_argument("every agent needs at least one path");
      for (double u : dom) {
        if (!(u > 0.0 && u <= 1.0))
          throw std::invalid_argument("path utility outside (0, 1]");
        utility_.push_back(u);
      }
      path_offset_.push_back(static_cast<std::uint32_t>(utility_.size()));
    }
    compat_adj_.resize(utility_.size());
  }

  const InteractionGraph& interaction() const { return graph_; }
  std::uint32_t agent_count() const { return graph_.agent_count(); }

  std::uint32_t domain_size(AgentId a) const {
    return path_offset_[a + 1] - path_offset_[a];
  }
  std::uint32_t path_count() const {
    return static_cast<std::uint32_t>(utility_.size());
  }

  std::uint32_t global_id(PathId p) const {
    return path_offset_[p.owner] + p.local_index;
  }
  PathId path_from_global(std::uint32_t gid) const {
    const auto it =
        std::upper_bound(path_offset_.begin(), path_offset_.end(), gid);
    const auto owner =
        static_cast<AgentId>(std::distance(path_offset_.begin(), it) - 1);
    return PathId{owner, gid - path_offset_[owner]};
  }

  double utility(PathId p) const { return utility_[global_id(p)]; }
  double utility_local(AgentId a, std::uint32_t local) const {
    return utility_[path_offset_[a] + local];
  }

  void add_compat_edge(PathId a, PathId b) {
    validate_path(a);
    validate_path(b);
    if (a.owner == b.owner)
      throw std::invalid_argument("compat edge within a single agent");
    if (!graph_.has_edge(a.owner, b.owner))
      throw std::invalid_argument("compat edge between non-neighbours");
    const std::uint32_t ga = global_id(a), gb = global_id(b);
    auto& adj = compat_adj_[ga];
    const auto it = std::lower_bound(adj.begin(), adj.end(), gb);
    if (it != adj.end() && *it == gb) return;  // already present
    adj.insert(it, gb);
    auto& rev = compat_adj_[gb];
    rev.insert(std::lower_bound(rev.begin(), rev.end(), ga), ga);
    ++compat_edge_count_;
  }

  /// Whether the two paths may coexist (the pair is a compatibility edge).
  /// The paths must belong to distinct agents.
  bool compatible(PathId a, PathId b) const {
    if (a.owner == b.owner)
      throw std::invalid_argument("compatibility query within a single agent");
    return compatible_by_gid(global_id(a), global_id(b));
  }

  bool compatible_by_gid(std::uint32_t ga, std::uint32_t gb) const {
    const auto& adj = compat_adj_[ga];
    return std::binary_search(adj.begin(), adj.end(), gb);
  }

  std::size_t compat_degree(PathId p) const {
    return compat_adj_[global_id(p)].size();
  }

  std::size_t compat_edge_count() const { return compat_edge_count_; }

  const std::vector<std::uint32_t>& compat_partners(std::uint32_t gid) const {
    return compat_adj_[gid];
  }

  /// All compatibility edges with the lexicographically smaller PathId first,
  /// sorted; this is the canonical serialization order.
  std::vector<std::pair<PathId, PathId>> sorted_compat_edges() const {
    std::vector<std::pair<PathId, PathId>> out;
    out.reserve(compat_edge_count_);
    for (std::uint32_t ga = 0; ga < compat_adj_.size(); ++ga) {
      for (std::uint32_t gb : compat_adj_[ga]) {
        if (gb > ga) out.emplace_back(path_from_global(ga), path_from_global(gb));
      }
    }
    return out;  // ascending ga, then ascending gb == lexicographic PathId order
  }

  std::optional<GenerationParams> meta;

 private:
  void validate_path(PathId p) const {
    if (p.owner >= agent_count() || p.local_index >= domain_size(p.owner))
      throw std::invalid_argument("path id out of range");
  }

  InteractionGraph graph_;
  std::vector<std::uint32_t> path_offset_;  // domain start per agent, +1 sentinel
  std::vector<double> utility_;             // by global path id
  std::vector<std::vector<std::uint32_t>> compat_adj_;  // sorted partner gids
  std::size_t compat_edge_count_ = 0;
};

/// u_c as a 0/1 value on a pair of paths of distinct agents.
inline double compatibility_utility(const ProblemInstance& inst, PathId a,
                                    PathId b) {
  return inst.compatible(a, b) ? 1.0 : 0.0;
}

/// True iff every interaction edge holds a compatible pair under `s`.
inline bool is_solution(const ProblemInstance& inst, const Assignment& s) {
  for (const auto& [i, j] : inst.interaction().edges()) {
    if (!inst.compatible(s.path_of(i), s.path_of(j))) return false;
  }
  return true;
}

/// Objective: sum of chosen path utilities plus the number of satisfied
/// interaction edges. For a feasible assignment the edge term is |E_I|.
inline double objective(const ProblemInstance& inst, const Assignment& s) {
  double eta = 0.0;
  for (AgentId a = 0; a < inst.agent_count(); ++a) eta += inst.utility(s.path_of(a));
  for (const auto& [i, j] : inst.interaction().edges()) {
    if (inst.compatible(s.path_of(i), s.path_of(j))) eta += 1.0;
  }
  return eta;
}

/// Number of interaction edges violated by `s`; zero iff `s` is a solution.
inline std::uint32_t count_violated_edges(const ProblemInstance& inst,
                                          const Assignment& s) {
  std::uint32_t violated = 0;
  for (const auto& [i, j] : inst.interaction().edges()) {
    if (!inst.compatible(s.path_of(i), s.path_of(j))) ++violated;
  }
  return violated;
}

}  // namespace dcoord

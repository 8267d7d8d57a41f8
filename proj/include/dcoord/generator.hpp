#pragma once

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcoord/core.hpp"
#include "dcoord/rng.hpp"

namespace dcoord {

/// Raised when n_sol pairwise-distinct assignments cannot be drawn. Only
/// possible when the product of domain sizes is smaller than n_sol.
struct DistinctSolutionExhaustion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void validate_params(const GenerationParams& p) {
  if (p.n < 2) throw std::invalid_argument("n must be >= 2");
  if (!(p.p_int >= 0.0 && p.p_int <= 1.0))
    throw std::invalid_argument("p_int must be in [0, 1]");
  if (p.n_d < 1) throw std::invalid_argument("n_d must be >= 1");
  if (p.n_sol < 1) throw std::invalid_argument("n_sol must be >= 1");
}

/// Connected random graph: a uniformly labelled random attachment tree, then
/// every non-tree pair added independently with probability p_int.
inline InteractionGraph generate_interaction_graph(std::uint32_t n,
                                                   double p_int, Rng& rng) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  InteractionGraph graph(n);

  // Tree: shuffle labels, then attach node i to a uniform earlier node.
  std::vector<AgentId> label(n);
  for (std::uint32_t i = 0; i < n; ++i) label[i] = i;
  rng.shuffle(label);
  for (std::uint32_t i = 1; i < n; ++i) {
    const auto parent = static_cast<std::uint32_t>(rng.below(i));
    graph.add_edge(label[i], label[parent]);
  }

  // Extra edges over non-tree pairs, scanned in canonical (a, b) order.
  for (AgentId a = 0; a < n; ++a) {
    for (AgentId b = a + 1; b < n; ++b) {
      if (graph.has_edge(a, b)) continue;
      if (rng.bernoulli(p_int)) graph.add_edge(a, b);
    }
  }
  graph.canonicalize();
  return graph;
}

/// Per-agent domains: a uniform number of paths in {1, ..., n_d}. The path at
/// local index 0 is the preferred one with utility 1.0; the rest carry 0.1.
inline std::vector<std::vector<double>> generate_domains(std::uint32_t n,
                                                         std::uint32_t n_d,
                                                         Rng& rng) {
  if (n_d < 1) throw std::invalid_argument("n_d must be >= 1");
  std::vector<std::vector<double>> domains(n);
  for (std::uint32_t a = 0; a < n; ++a) {
    const auto m = static_cast<std::uint32_t>(rng.range(1, n_d));
    domains[a].assign(m, 0.1);
    domains[a][0] = 1.0;
  }
  return domains;
}

/// Uniform draw of one path per agent.
inline Assignment draw_assignment(const ProblemInstance& inst, Rng& rng) {
  Assignment s(inst.agent_count());
  for (AgentId a = 0; a < inst.agent_count(); ++a)
    s.set_local(a, static_cast<std::uint32_t>(rng.below(inst.domain_size(a))));
  return s;
}

/// Inserts the compatibility edges that make `s` feasible: one edge per
/// interaction edge, between the chosen paths of its endpoints.
inline void add_solution_edges(ProblemInstance& inst, const Assignment& s) {
  for (const auto& [i, j] : inst.interaction().edges())
    inst.add_compat_edge(s.path_of(i), s.path_of(j));
}

/// Draws a uniform assignment and plants it as a feasible solution.
inline Assignment plant_solution(ProblemInstance& inst, Rng& rng) {
  Assignment s = draw_assignment(inst, rng);
  add_solution_edges(inst, s);
  return s;
}

struct GeneratedInstance {
  ProblemInstance instance;
  std::vector<Assignment> planted;
};

/// Builds a reproducible instance from `params`. Draw order is fixed:
/// interaction graph, domains, planted solutions in order, then the degree-0
/// fix-up in path index order. Each planted solution is retried up to 1000
/// times until distinct from the previous ones.
inline GeneratedInstance generate_instance(const GenerationParams& params) {
  validate_params(params);
  Rng rng(params.seed);

  InteractionGraph graph =
      generate_interaction_graph(params.n, params.p_int, rng);
  std::vector<std::vector<double>> domains =
      generate_domains(params.n, params.n_d, rng);

  ProblemInstance inst(std::move(graph), std::move(domains));

  std::vector<Assignment> planted;
  std::set<Assignment> seen;
  for (std::uint32_t s = 0; s < params.n_sol; ++s) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      Assignment candidate = draw_assignment(inst, rng);
      if (seen.insert(candidate).second) {
        add_solution_edges(inst, candidate);
        planted.push_back(std::move(candidate));
        placed = true;
        break;
      }
    }
    if (!placed)
      throw DistinctSolutionExhaustion(
          "could not draw " + std::to_string(params.n_sol) +
          " distinct solutions (domain product too small)");
  }

  // Degree-0 fix-up: give each still-isolated path one edge to a uniform
  // path of a uniform interaction neighbour.
  for (AgentId a = 0; a < inst.agent_count(); ++a) {
    const auto& nbrs = inst.interaction().neighbours(a);
    for (std::uint32_t p = 0; p < inst.domain_size(a); ++p) {
      const PathId path{a, p};
      if (inst.compat_degree(path) > 0) continue;
      const AgentId partner_agent =
          nbrs[static_cast<std::size_t>(rng.below(nbrs.size()))];
      const auto partner_local = static_cast<std::uint32_t>(
          rng.below(inst.domain_size(partner_agent)));
      inst.add_compat_edge(path, PathId{partner_agent, partner_local});
    }
  }

  inst.meta = params;
  return GeneratedInstance{std::move(inst), std::move(planted)};
}

}  // namespace dcoord

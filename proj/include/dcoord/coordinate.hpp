#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dcoord/core.hpp"
#include "dcoord/enumerate.hpp"
#include "dcoord/format.hpp"
#include "dcoord/rng.hpp"

namespace dcoord {

// ---------------------------------------------------------------------------
// Agent strategies

/// Consult a fixed number of neighbours per step.
struct KFixed {
  std::uint32_t k = 1;
};

/// Consult every neighbour per step.
struct KAll {};

/// Start with every neighbour, then shrink the sample linearly to one.
/// Shrinking begins after `t_start` iterations and spans `window` iterations;
/// from t_start + window onward a single neighbour is consulted. t is the
/// global iteration counter shared by all agents.
struct KAdaptive {
  std::uint64_t t_start = 1000;
  std::uint64_t window = 10000;
};

/// Classic stochastic baseline: an activated agent greedily maximises path
/// utility plus compatibility count over all neighbours.
struct Dsa {
  double alpha = 0.9;    // activation probability, in (0, 1]
  double epsilon = 0.0;  // random-move probability, in [0, 1)
};

class PolicyConfig {
 public:
  using Strategy = std::variant<KFixed, KAll, KAdaptive, Dsa>;

  PolicyConfig(Strategy strategy) : strategy_(strategy) { validate(); }

  const Strategy& strategy() const { return strategy_; }
  bool is_dsa() const { return std::holds_alternative<Dsa>(strategy_); }

  /// Short name used in records and reports: k1, k3, kall, kada, dsa,
  /// dsa_a0.7, dsa_a0.9_e0.1, ...
  std::string name() const {
    struct Visitor {
      std::string operator()(const KFixed& s) const {
        return "k" + std::to_string(s.k);
      }
      std::string operator()(const KAll&) const { return "kall"; }
      std::string operator()(const KAdaptive&) const { return "kada"; }
      std::string operator()(const Dsa& s) const {
        std::string name = "dsa";
        if (s.alpha != 0.9) name += "_a" + format_double(s.alpha);
        if (s.epsilon != 0.0) name += "_e" + format_double(s.epsilon);
        return name;
      }
    };
    return std::visit(Visitor{}, strategy_);
  }

 private:
  void validate() const {
    if (const auto* f = std::get_if<KFixed>(&strategy_)) {
      if (f->k < 1) throw std::invalid_argument("k must be >= 1");
    } else if (const auto* a = std::get_if<KAdaptive>(&strategy_)) {
      if (a->window < 1) throw std::invalid_argument("window must be >= 1");
    } else if (const auto* d = std::get_if<Dsa>(&strategy_)) {
      if (!(d->alpha > 0.0 && d->alpha <= 1.0))
        throw std::invalid_argument("alpha must be in (0, 1]");
      if (!(d->epsilon >= 0.0 && d->epsilon < 1.0))
        throw std::invalid_argument("epsilon must be in [0, 1)");
    }
  }

  Strategy strategy_;
};

/// Neighbour sample size for one decision at iteration t. Always in
/// [1, degree]. The adaptive schedule is evaluated in integer arithmetic so
/// the linear ramp is exact.
inline std::uint32_t compute_k(const PolicyConfig& policy, std::uint64_t t,
                               std::uint32_t degree) {
  struct Visitor {
    std::uint64_t t;
    std::uint32_t degree;
    std::uint32_t operator()(const KFixed& s) const {
      return std::min(s.k, degree);
    }
    std::uint32_t operator()(const KAll&) const { return degree; }
    std::uint32_t operator()(const KAdaptive& s) const {
      if (t <= s.t_start) return degree;
      const std::uint64_t elapsed = t - s.t_start;
      if (elapsed >= s.window) return 1;
      // ceil(degree * (window - elapsed) / window), never below 1
      const std::uint64_t remaining = s.window - elapsed;
      const std::uint64_t k = (degree * remaining + s.window - 1) / s.window;
      return static_cast<std::uint32_t>(std::max<std::uint64_t>(1, k));
    }
    std::uint32_t operator()(const Dsa&) const { return degree; }
  };
  return std::visit(Visitor{t, degree}, policy.strategy());
}

// ---------------------------------------------------------------------------
// Simulation state

/// Mutable state of one simulation run. violated_edges tracks the number of
/// interaction edges whose endpoints currently hold incompatible paths; it
/// is maintained incrementally and reaches 0 exactly when the assignment is
/// a solution.
struct SimState {
  Assignment assignment;
  std::uint64_t t = 0;
  std::uint32_t violated_edges = 0;
};

inline SimState make_sim_state(const ProblemInstance& inst, Assignment a) {
  SimState st;
  st.violated_edges = count_violated_edges(inst, a);
  st.assignment = std::move(a);
  return st;
}

/// Assigns `new_local` to `agent` and updates the violated-edge counter from
/// the flipped edges only.
inline void apply_value(const ProblemInstance& inst, SimState& st,
                        AgentId agent, std::uint32_t new_local) {
  const std::uint32_t old_local = st.assignment.local(agent);
  if (new_local == old_local) return;
  const std::uint32_t old_gid = inst.global_id(PathId{agent, old_local});
  const std::uint32_t new_gid = inst.global_id(PathId{agent, new_local});
  for (AgentId j : inst.interaction().neighbours(agent)) {
    const std::uint32_t gj = inst.global_id(st.assignment.path_of(j));
    const bool was_ok = inst.compatible_by_gid(old_gid, gj);
    const bool now_ok = inst.compatible_by_gid(new_gid, gj);
    if (was_ok && !now_ok) ++st.violated_edges;
    if (!was_ok && now_ok) --st.violated_edges;
  }
  st.assignment.set_local(agent, new_local);
}

/// Greedy start: every agent takes a maximum-utility path, ties broken
/// uniformly at random.
inline Assignment greedy_init(const ProblemInstance& inst, Rng& rng) {
  Assignment s(inst.agent_count());
  std::vector<std::uint32_t> ties;
  for (AgentId a = 0; a < inst.agent_count(); ++a) {
    double best = 0.0;
    ties.clear();
    for (std::uint32_t d = 0; d < inst.domain_size(a); ++d) {
      const double u = inst.utility_local(a, d);
      if (u > best) {
        best = u;
        ties.assign(1, d);
      } else if (u == best) {
        ties.push_back(d);
      }
    }
    s.set_local(a, ties.size() == 1
                       ? ties[0]
                       : ties[static_cast<std::size_t>(rng.below(ties.size()))]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Decision steps

/// One decision of `agent` under a k-strategy:
///   1. sample min(k, degree) neighbours without replacement;
///   2. score every own path by its compatibility count against the sampled
///      neighbours' current paths;
///   3. keep the current path when it is compatible with the whole sample;
///   4. otherwise move to a maximally compatible path, drawn with probability
///      proportional to path utility (the current path competes too).
/// Returns the value held after the step.
inline std::uint32_t agent_step(const ProblemInstance& inst, SimState& st,
                                AgentId agent, const PolicyConfig& policy,
                                Rng& rng) {
  const auto& nbrs = inst.interaction().neighbours(agent);
  const auto degree = static_cast<std::uint32_t>(nbrs.size());
  const std::uint32_t k = compute_k(policy, st.t, degree);

  thread_local std::vector<std::uint32_t> sample;
  rng.sample_indices(degree, k, sample);

  const std::uint32_t m = inst.domain_size(agent);
  const std::uint32_t base = inst.global_id(PathId{agent, 0});
  thread_local std::vector<std::uint32_t> score;
  score.assign(m, 0);
  for (const std::uint32_t idx : sample) {
    const std::uint32_t gj = inst.global_id(st.assignment.path_of(nbrs[idx]));
    for (std::uint32_t d = 0; d < m; ++d) {
      if (inst.compatible_by_gid(base + d, gj)) ++score[d];
    }
  }

  const std::uint32_t current = st.assignment.local(agent);
  if (score[current] == sample.size()) return current;  // fully compatible

  std::uint32_t best = 0;
  for (std::uint32_t d = 1; d < m; ++d) {
    if (score[d] > score[best]) best = d;
  }
  thread_local std::vector<std::uint32_t> argmax;
  argmax.clear();
  double total_utility = 0.0;
  for (std::uint32_t d = 0; d < m; ++d) {
    if (score[d] == score[best]) {
      argmax.push_back(d);
      total_utility += inst.utility_local(agent, d);
    }
  }

  std::uint32_t chosen = argmax[0];
  if (argmax.size() > 1) {
    // utility-proportional draw over the argmax set
    const double x = rng.unit() * total_utility;
    double acc = 0.0;
    chosen = argmax.back();
    for (const std::uint32_t d : argmax) {
      acc += inst.utility_local(agent, d);
      if (x < acc) {
        chosen = d;
        break;
      }
    }
  }
  apply_value(inst, st, agent, chosen);
  return chosen;
}

/// One DSA decision: with probability 1 - alpha keep the current path;
/// otherwise, with probability epsilon pick a uniform path, else greedily
/// maximise utility + compatibility count over all neighbours, keeping the
/// current path when it ties for best.
inline std::uint32_t dsa_step(const ProblemInstance& inst, SimState& st,
                              AgentId agent, const Dsa& cfg, Rng& rng) {
  const std::uint32_t current = st.assignment.local(agent);
  if (!rng.bernoulli(cfg.alpha)) return current;  // not activated

  const std::uint32_t m = inst.domain_size(agent);
  if (cfg.epsilon > 0.0 && rng.bernoulli(cfg.epsilon)) {
    const auto pick = static_cast<std::uint32_t>(rng.below(m));
    apply_value(inst, st, agent, pick);
    return pick;
  }

  const std::uint32_t base = inst.global_id(PathId{agent, 0});
  thread_local std::vector<double> score;
  score.resize(m);
  for (std::uint32_t d = 0; d < m; ++d) score[d] = inst.utility_local(agent, d);
  for (const AgentId j : inst.interaction().neighbours(agent)) {
    const std::uint32_t gj = inst.global_id(st.assignment.path_of(j));
    for (std::uint32_t d = 0; d < m; ++d) {
      if (inst.compatible_by_gid(base + d, gj)) score[d] += 1.0;
    }
  }

  double best = score[0];
  for (std::uint32_t d = 1; d < m; ++d) best = std::max(best, score[d]);
  if (score[current] == best) return current;  // prefer staying put

  thread_local std::vector<std::uint32_t> argmax;
  argmax.clear();
  for (std::uint32_t d = 0; d < m; ++d) {
    if (score[d] == best) argmax.push_back(d);
  }
  const std::uint32_t chosen =
      argmax.size() == 1
          ? argmax[0]
          : argmax[static_cast<std::size_t>(rng.below(argmax.size()))];
  apply_value(inst, st, agent, chosen);
  return chosen;
}

// ---------------------------------------------------------------------------
// Whole-run driver

/// Outcome of one seeded run.
struct RunResult {
  bool converged = false;
  std::uint64_t iterations = 0;
  Assignment final_assignment;
  double eta = 0.0;  // rounded objective of the final assignment
  std::optional<std::uint32_t> rank;
  std::optional<double> regret_pct;
};

/// Runs the asynchronous scheduler: greedy start, then one uniformly chosen
/// agent updates per iteration until no interaction edge is violated or the
/// iteration bound is hit. Deterministic in (instance, policy, run_seed).
/// When `oracle` is given, rank and regret of converged runs are filled in.
inline RunResult run_coordination(const ProblemInstance& inst,
                                  const PolicyConfig& policy,
                                  std::uint64_t run_seed,
                                  std::uint64_t max_iterations = 100000,
                                  const SolutionSet* oracle = nullptr,
                                  RankMode rank_mode = RankMode::Dense) {
  Rng rng(run_seed);
  SimState st = make_sim_state(inst, greedy_init(inst, rng));
  const std::uint32_t n = inst.agent_count();
  const Dsa* dsa = std::get_if<Dsa>(&policy.strategy());

  bool converged = st.violated_edges == 0;  // greedy start may already solve
  while (!converged && st.t < max_iterations) {
    ++st.t;
    const auto agent = static_cast<AgentId>(rng.below(n));
    if (dsa) {
      dsa_step(inst, st, agent, *dsa, rng);
    } else {
      agent_step(inst, st, agent, policy, rng);
    }
    converged = st.violated_edges == 0;
  }

  RunResult result;
  result.converged = converged;
  result.iterations = st.t;
  result.eta = round_eta(objective(inst, st.assignment));
  result.final_assignment = std::move(st.assignment);
  if (converged && oracle && !oracle->empty()) {
    result.rank = rank_of(*oracle, result.eta, rank_mode);
    result.regret_pct = regret_pct(*oracle, result.eta);
  }
  return result;
}

}  // namespace dcoord

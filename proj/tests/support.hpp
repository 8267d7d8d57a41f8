#pragma once

// Shared helpers for the test suite. The brute-force enumerator and the
// union-find connectivity check are intentionally independent of the library
// implementations they validate.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dcoord/core.hpp"

namespace testsupport {

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

inline bool connected_by_union_find(const dcoord::InteractionGraph& g) {
  UnionFind uf(g.agent_count());
  for (const auto& [a, b] : g.edges()) uf.unite(a, b);
  const std::size_t root = uf.find(0);
  for (std::size_t a = 1; a < g.agent_count(); ++a) {
    if (uf.find(a) != root) return false;
  }
  return true;
}

/// All feasible assignments by filtering the full Cartesian product of the
/// domains, sorted like the library's solution sets (objective descending,
/// ties by ascending assignment).
inline std::vector<std::pair<dcoord::Assignment, double>> brute_force_solutions(
    const dcoord::ProblemInstance& inst) {
  using dcoord::Assignment;
  const std::uint32_t n = inst.agent_count();
  std::vector<std::pair<Assignment, double>> out;
  std::vector<std::uint32_t> locals(n, 0);
  for (;;) {
    Assignment s(locals);
    if (dcoord::is_solution(inst, s))
      out.emplace_back(s, dcoord::round_eta(dcoord::objective(inst, s)));
    // odometer increment, last agent fastest
    std::uint32_t pos = n;
    while (pos > 0) {
      --pos;
      if (++locals[pos] < inst.domain_size(pos)) break;
      locals[pos] = 0;
      if (pos == 0) {
        std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
          const auto lk = dcoord::eta_key(l.second);
          const auto rk = dcoord::eta_key(r.second);
          if (lk != rk) return lk > rk;
          return l.first < r.first;
        });
        return out;
      }
    }
  }
}

/// Two agents joined by one interaction edge; compat pairs are given as
/// (local of agent 0, local of agent 1).
inline dcoord::ProblemInstance make_two_agent(
    std::vector<double> dom0, std::vector<double> dom1,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& compat) {
  dcoord::InteractionGraph g(2);
  g.add_edge(0, 1);
  dcoord::ProblemInstance inst(std::move(g),
                               {std::move(dom0), std::move(dom1)});
  for (const auto& [p, q] : compat)
    inst.add_compat_edge(dcoord::PathId{0, p}, dcoord::PathId{1, q});
  return inst;
}

/// Chain 0-1-2; compat01 pairs (local of 0, local of 1), compat12 likewise.
inline dcoord::ProblemInstance make_chain3(
    std::vector<double> dom0, std::vector<double> dom1,
    std::vector<double> dom2,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& compat01,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& compat12) {
  dcoord::InteractionGraph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  dcoord::ProblemInstance inst(
      std::move(g), {std::move(dom0), std::move(dom1), std::move(dom2)});
  for (const auto& [p, q] : compat01)
    inst.add_compat_edge(dcoord::PathId{0, p}, dcoord::PathId{1, q});
  for (const auto& [p, q] : compat12)
    inst.add_compat_edge(dcoord::PathId{1, p}, dcoord::PathId{2, q});
  return inst;
}

/// Both agents on their secondary paths form a feasible but suboptimal
/// solution; agent 0 can hop to its preferred path and stay feasible.
inline dcoord::ProblemInstance make_escape_instance() {
  return make_two_agent({1.0, 0.1}, {1.0, 0.1},
                        {{0, 0}, {1, 1}, {0, 1}});
}

/// Fresh scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 gen(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(gen()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& leaf = "") const {
    return leaf.empty() ? path_.string() : (path_ / leaf).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace testsupport

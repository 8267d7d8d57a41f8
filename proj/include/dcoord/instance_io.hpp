#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dcoord/core.hpp"

namespace dcoord {

struct InstanceFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Canonical JSON form of an instance. Field order is fixed, edge pairs carry
/// the smaller endpoint first and all edge arrays are sorted, so equal
/// instances serialize to identical bytes.
inline nlohmann::ordered_json instance_to_json(const ProblemInstance& inst) {
  nlohmann::ordered_json j;
  j["n"] = inst.agent_count();

  auto edges = nlohmann::ordered_json::array();
  for (const auto& [a, b] : inst.interaction().sorted_edges())
    edges.push_back({a, b});
  j["interaction_edges"] = std::move(edges);

  auto domains = nlohmann::ordered_json::array();
  for (AgentId a = 0; a < inst.agent_count(); ++a) {
    auto dom = nlohmann::ordered_json::array();
    for (std::uint32_t p = 0; p < inst.domain_size(a); ++p)
      dom.push_back({{"utility", inst.utility_local(a, p)}});
    domains.push_back(std::move(dom));
  }
  j["domains"] = std::move(domains);

  auto compat = nlohmann::ordered_json::array();
  for (const auto& [p, q] : inst.sorted_compat_edges()) {
    compat.push_back({{p.owner, p.local_index}, {q.owner, q.local_index}});
  }
  j["compat_edges"] = std::move(compat);

  if (inst.meta) {
    j["meta"] = {{"p_int", inst.meta->p_int},
                 {"n_d", inst.meta->n_d},
                 {"n_sol", inst.meta->n_sol},
                 {"seed", inst.meta->seed}};
  }
  return j;
}

inline std::string instance_to_string(const ProblemInstance& inst) {
  return instance_to_json(inst).dump() + "\n";
}

/// Parses and validates an instance. Checks everything the generator
/// guarantees: connected interaction graph, utilities in (0,1], compat edges
/// between distinct neighbouring agents only, and compat degree >= 1 for
/// every path.
inline ProblemInstance instance_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::uint32_t>();
    if (n < 2) throw InstanceFormatError("instance needs n >= 2 agents");

    InteractionGraph graph(n);
    for (const auto& e : j.at("interaction_edges")) {
      if (!e.is_array() || e.size() != 2)
        throw InstanceFormatError("malformed interaction edge");
      graph.add_edge(e[0].get<AgentId>(), e[1].get<AgentId>());
    }
    if (!graph.connected())
      throw InstanceFormatError("interaction graph is not connected");
    graph.canonicalize();

    std::vector<std::vector<double>> utilities;
    for (const auto& dom : j.at("domains")) {
      std::vector<double> u;
      for (const auto& path : dom) u.push_back(path.at("utility").get<double>());
      utilities.push_back(std::move(u));
    }

    ProblemInstance inst(std::move(graph), std::move(utilities));
    for (const auto& e : j.at("compat_edges")) {
      if (!e.is_array() || e.size() != 2)
        throw InstanceFormatError("malformed compat edge");
      const PathId p{e[0][0].get<AgentId>(), e[0][1].get<std::uint32_t>()};
      const PathId q{e[1][0].get<AgentId>(), e[1][1].get<std::uint32_t>()};
      inst.add_compat_edge(p, q);
    }

    for (AgentId a = 0; a < inst.agent_count(); ++a) {
      for (std::uint32_t p = 0; p < inst.domain_size(a); ++p) {
        if (inst.compat_degree(PathId{a, p}) == 0)
          throw InstanceFormatError("path with no compatibility edge");
      }
    }

    if (j.contains("meta")) {
      const auto& m = j.at("meta");
      inst.meta = GenerationParams{n, m.at("p_int").get<double>(),
                                   m.at("n_d").get<std::uint32_t>(),
                                   m.at("n_sol").get<std::uint32_t>(),
                                   m.at("seed").get<std::uint64_t>()};
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw InstanceFormatError(std::string("invalid instance JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InstanceFormatError(std::string("invalid instance: ") + e.what());
  }
}

inline ProblemInstance instance_from_string(const std::string& text) {
  return instance_from_json(nlohmann::json::parse(text));
}

inline void write_instance_file(const ProblemInstance& inst,
                                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << instance_to_string(inst);
}

inline ProblemInstance load_instance_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return instance_from_string(buf.str());
}

}  // namespace dcoord

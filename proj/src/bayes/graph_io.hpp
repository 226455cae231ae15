#pragma once

// Graph file format:
//   {"cpt_mode": "any_parent_or" | "noisy_or",
//    "nodes": [{"id", "label", "cve"?, "score"?, "layer"?, "kind"}],
//    "edges": [{"from", "to"}],
//    "root_priors": {id: p}}

#include <filesystem>

#include <nlohmann/json.hpp>

#include "bayes/graph.hpp"

namespace vulnprio::bayes {

/// Structural parse only (types, enum spellings, CVE syntax, score format);
/// graph-level problems are left to validate(). Throws Error(Parse).
AttackGraph graph_from_json(const nlohmann::json& doc);
nlohmann::json graph_to_json(const AttackGraph& graph);

/// Throws Error(Io) or Error(Parse).
AttackGraph load_graph(const std::filesystem::path& path);
void save_graph(const AttackGraph& graph, const std::filesystem::path& path);

}  // namespace vulnprio::bayes

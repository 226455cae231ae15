#include "bayes/graph_io.hpp"

#include <fstream>

#include "common/error.hpp"
#include "vulndb/records.hpp"

namespace vulnprio::bayes {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::Parse, "graph: " + what);
}

std::string required_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) bad(where + ": missing string '" + key + "'");
  return it->get<std::string>();
}

BagNode node_from_json(const json& j, std::size_t index) {
  const std::string where = "nodes[" + std::to_string(index) + "]";
  if (!j.is_object()) bad(where + " is not an object");
  BagNode node;
  node.id = required_string(j, "id", where);
  if (node.id.empty()) bad(where + ": empty id");
  node.label = j.contains("label") ? required_string(j, "label", where) : node.id;

  auto kind = parse_node_kind(required_string(j, "kind", where));
  if (!kind) bad(where + ": kind must be attacker_entry or compromise_event");
  node.kind = *kind;

  if (auto it = j.find("cve"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) bad(where + ": cve must be a string");
    auto cve = vulndb::CveId::try_parse(it->get<std::string>());
    if (!cve) bad(where + ": invalid CVE id '" + it->get<std::string>() + "'");
    node.cve = cve->str();
  }
  if (auto it = j.find("score"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) bad(where + ": score must be a number");
    try {
      node.score = Score::from_decimal(it->get<double>());
    } catch (const Error& e) {
      bad(where + ": " + e.what());
    }
  }
  if (auto it = j.find("layer"); it != j.end() && !it->is_null()) {
    if (!it->is_number_integer()) bad(where + ": layer must be an integer");
    const int layer = it->get<int>();
    if (layer < 1 || layer > 5) bad(where + ": layer must be within 1..5");
    node.layer = layer;
  }
  return node;
}

}  // namespace

AttackGraph graph_from_json(const json& doc) {
  if (!doc.is_object()) bad("document is not an object");
  AttackGraph g;
  if (auto it = doc.find("cpt_mode"); it != doc.end()) {
    auto mode = it->is_string() ? parse_cpt_mode(it->get<std::string>()) : std::nullopt;
    if (!mode) bad("cpt_mode must be any_parent_or or noisy_or");
    g.cpt_mode = *mode;
  }
  auto nodes = doc.find("nodes");
  if (nodes == doc.end() || !nodes->is_array()) bad("missing 'nodes' array");
  for (std::size_t i = 0; i < nodes->size(); ++i) g.nodes.push_back(node_from_json((*nodes)[i], i));

  if (auto edges = doc.find("edges"); edges != doc.end()) {
    if (!edges->is_array()) bad("'edges' must be an array");
    for (std::size_t i = 0; i < edges->size(); ++i) {
      const auto& e = (*edges)[i];
      const std::string where = "edges[" + std::to_string(i) + "]";
      if (!e.is_object()) bad(where + " is not an object");
      g.edges.push_back({required_string(e, "from", where), required_string(e, "to", where)});
    }
  }
  if (auto priors = doc.find("root_priors"); priors != doc.end()) {
    if (!priors->is_object()) bad("'root_priors' must be an object");
    for (const auto& [id, p] : priors->items()) {
      if (!p.is_number()) bad("root_priors['" + id + "'] must be a number");
      g.root_priors[id] = p.get<double>();
    }
  }
  return g;
}

json graph_to_json(const AttackGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json j = {{"id", n.id}, {"label", n.label}, {"kind", std::string(to_string(n.kind))}};
    if (n.cve) j["cve"] = *n.cve;
    if (n.score) j["score"] = n.score->value();
    if (n.layer) j["layer"] = *n.layer;
    nodes.push_back(std::move(j));
  }
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back({{"from", e.from}, {"to", e.to}});
  json priors = json::object();
  for (const auto& [id, p] : g.root_priors) priors[id] = p;
  return {{"cpt_mode", std::string(to_string(g.cpt_mode))},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)},
          {"root_priors", std::move(priors)}};
}

AttackGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open graph file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
  return graph_from_json(doc);
}

void save_graph(const AttackGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write graph file " + path.string());
  out << graph_to_json(graph).dump(2) << '\n';
}

}  // namespace vulnprio::bayes

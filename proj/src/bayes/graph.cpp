#include "bayes/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include "common/error.hpp"

namespace vulnprio::bayes {

std::string_view to_string(NodeKind kind) noexcept {
  return kind == NodeKind::AttackerEntry ? "attacker_entry" : "compromise_event";
}

std::string_view to_string(CptMode mode) noexcept {
  return mode == CptMode::NoisyOr ? "noisy_or" : "any_parent_or";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) noexcept {
  if (text == "attacker_entry") return NodeKind::AttackerEntry;
  if (text == "compromise_event") return NodeKind::CompromiseEvent;
  return std::nullopt;
}

std::optional<CptMode> parse_cpt_mode(std::string_view text) noexcept {
  if (text == "any_parent_or") return CptMode::AnyParentOr;
  if (text == "noisy_or") return CptMode::NoisyOr;
  return std::nullopt;
}

std::string_view to_string(Finding::Kind kind) noexcept {
  switch (kind) {
    case Finding::Kind::DuplicateNode: return "DuplicateNode";
    case Finding::Kind::DuplicateEdge: return "DuplicateEdge";
    case Finding::Kind::DanglingEdge: return "DanglingEdge";
    case Finding::Kind::Cycle: return "Cycle";
    case Finding::Kind::MissingScore: return "MissingScore";
    case Finding::Kind::EntryHasParents: return "EntryHasParents";
    case Finding::Kind::MissingRootPrior: return "MissingRootPrior";
    case Finding::Kind::ExtraRootPrior: return "ExtraRootPrior";
    case Finding::Kind::PriorOutOfRange: return "PriorOutOfRange";
  }
  return "Unknown";
}

const BagNode* AttackGraph::find(std::string_view id) const noexcept {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

bool ValidationReport::has(Finding::Kind kind) const noexcept {
  return std::any_of(findings.begin(), findings.end(),
                     [kind](const Finding& f) { return f.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < findings.size(); ++i) {
    if (i) out << "; ";
    out << to_string(findings[i].kind) << ": " << findings[i].message;
  }
  return out.str();
}

nlohmann::json ValidationReport::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& f : findings) {
    arr.push_back({{"kind", std::string(to_string(f.kind))},
                   {"message", f.message},
                   {"witness", f.witness}});
  }
  return {{"valid", ok()}, {"findings", std::move(arr)}};
}

namespace {

using Adjacency = std::map<std::string, std::vector<std::string>>;

// First cycle reachable in id order, as [v0, v1, ..., v0].
std::optional<std::vector<std::string>> find_cycle(const Adjacency& succ,
                                                   const std::vector<std::string>& order) {
  enum class Mark { White, Grey, Black };
  std::map<std::string, Mark> mark;
  std::vector<std::string> stack;
  std::optional<std::vector<std::string>> found;

  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    mark[v] = Mark::Grey;
    stack.push_back(v);
    if (auto it = succ.find(v); it != succ.end()) {
      for (const auto& w : it->second) {
        if (found) return;
        const Mark m = mark.contains(w) ? mark[w] : Mark::White;
        if (m == Mark::Grey) {
          auto start = std::find(stack.begin(), stack.end(), w);
          found.emplace(start, stack.end());
          found->push_back(w);
          return;
        }
        if (m == Mark::White) visit(w);
      }
    }
    stack.pop_back();
    mark[v] = Mark::Black;
  };

  for (const auto& v : order) {
    if (found) break;
    if (!mark.contains(v)) visit(v);
  }
  return found;
}

}  // namespace

ValidationReport validate(const AttackGraph& graph) {
  ValidationReport report;
  auto add = [&](Finding::Kind kind, std::string message, std::vector<std::string> witness = {}) {
    report.findings.push_back({kind, std::move(message), std::move(witness)});
  };

  std::map<std::string, const BagNode*> by_id;
  for (const auto& n : graph.nodes) {
    if (!by_id.emplace(n.id, &n).second) add(Finding::Kind::DuplicateNode, "node '" + n.id + "' defined twice", {n.id});
  }

  Adjacency succ;
  std::map<std::string, std::size_t> in_degree;
  std::set<std::pair<std::string, std::string>> seen_edges;
  for (const auto& e : graph.edges) {
    const bool from_ok = by_id.contains(e.from);
    const bool to_ok = by_id.contains(e.to);
    if (!from_ok || !to_ok) {
      const std::string missing = !from_ok ? e.from : e.to;
      add(Finding::Kind::DanglingEdge,
          "edge " + e.from + " -> " + e.to + " references unknown node '" + missing + "'",
          {e.from, e.to});
      continue;
    }
    if (!seen_edges.emplace(e.from, e.to).second) {
      add(Finding::Kind::DuplicateEdge, "edge " + e.from + " -> " + e.to + " listed twice",
          {e.from, e.to});
      continue;
    }
    succ[e.from].push_back(e.to);
    ++in_degree[e.to];
  }
  for (auto& [_, targets] : succ) std::sort(targets.begin(), targets.end());

  std::vector<std::string> ids;
  for (const auto& [id, _] : by_id) ids.push_back(id);
  if (auto cycle = find_cycle(succ, ids)) {
    std::string path;
    for (std::size_t i = 0; i < cycle->size(); ++i) path += (i ? " -> " : "") + (*cycle)[i];
    add(Finding::Kind::Cycle, "directed cycle " + path, *cycle);
  }

  for (const auto& [id, node] : by_id) {
    const bool root = !in_degree.contains(id);
    if (node->kind == NodeKind::CompromiseEvent && !node->score) {
      add(Finding::Kind::MissingScore, "compromise event '" + id + "' has no score", {id});
    }
    if (node->kind == NodeKind::AttackerEntry && !root) {
      add(Finding::Kind::EntryHasParents, "attacker entry '" + id + "' has incoming edges", {id});
    }
    if (root && !graph.root_priors.contains(id) && node->kind == NodeKind::CompromiseEvent &&
        !node->score) {
      add(Finding::Kind::MissingRootPrior,
          "root '" + id + "' has neither a prior nor a score to derive one", {id});
    }
  }

  for (const auto& [id, p] : graph.root_priors) {
    if (!by_id.contains(id)) {
      add(Finding::Kind::ExtraRootPrior, "prior for unknown node '" + id + "'", {id});
    } else if (in_degree.contains(id)) {
      add(Finding::Kind::ExtraRootPrior, "prior given for non-root node '" + id + "'", {id});
    }
    if (!(p >= 0.0 && p <= 1.0)) {
      add(Finding::Kind::PriorOutOfRange, "prior of '" + id + "' is outside [0, 1]", {id});
    }
  }
  return report;
}

Cpt build_cpt(const BagNode& node, const std::vector<std::string>& parents, CptMode mode) {
  if (!node.score) throw Error(ErrorCode::MissingScore, "node '" + node.id + "' has no score");
  if (parents.empty()) {
    throw Error(ErrorCode::RootNode, "node '" + node.id + "' has no parents; roots take a prior");
  }
  if (!std::is_sorted(parents.begin(), parents.end()) ||
      std::adjacent_find(parents.begin(), parents.end()) != parents.end()) {
    throw Error(ErrorCode::InvalidArgument, "parents of '" + node.id + "' must be sorted and unique");
  }
  if (parents.size() > 24) {
    throw Error(ErrorCode::GraphTooLarge, "node '" + node.id + "' has more than 24 parents");
  }
  const double p = node.score->probability();
  Cpt cpt{node.id, parents, std::vector<double>(std::size_t{1} << parents.size(), 0.0)};
  for (std::uint64_t row = 1; row < cpt.table.size(); ++row) {
    if (mode == CptMode::AnyParentOr) {
      cpt.table[row] = p;
    } else {
      const int active = std::popcount(row);
      cpt.table[row] = 1.0 - std::pow(1.0 - p, active);
    }
  }
  return cpt;
}

AttackGraph rescore(const AttackGraph& graph, const std::map<std::string, Score>& scores) {
  AttackGraph out = graph;
  for (auto& node : out.nodes) {
    if (!node.cve) continue;
    auto it = scores.find(*node.cve);
    if (it == scores.end()) {
      throw Error(ErrorCode::MissingScoreFor, "no score for " + *node.cve + " (node '" + node.id + "')");
    }
    node.score = it->second;
  }
  return out;
}

BayesNet BayesNet::compile(const AttackGraph& graph) {
  auto report = validate(graph);
  if (!report.ok()) throw Error(ErrorCode::Validation, report.summary());

  BayesNet net;
  net.graph_ = graph;
  const std::size_t n = graph.nodes.size();
  net.ids_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    net.ids_.push_back(graph.nodes[i].id);
    net.index_.emplace(graph.nodes[i].id, i);
  }
  net.parents_.assign(n, {});
  for (const auto& e : graph.edges) net.parents_[net.index_.at(e.to)].push_back(net.index_.at(e.from));
  for (auto& ps : net.parents_) {
    std::sort(ps.begin(), ps.end(),
              [&](std::size_t a, std::size_t b) { return net.ids_[a] < net.ids_[b]; });
  }

  net.tables_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const BagNode& node = graph.nodes[i];
    if (net.parents_[i].empty()) {
      double prior;
      if (auto it = graph.root_priors.find(node.id); it != graph.root_priors.end()) {
        prior = it->second;
      } else if (node.kind == NodeKind::AttackerEntry) {
        prior = kDefaultEntryPrior;
      } else {
        prior = node.score->probability();
      }
      net.tables_[i] = {prior};
    } else {
      std::vector<std::string> parent_ids;
      for (auto p : net.parents_[i]) parent_ids.push_back(net.ids_[p]);
      net.tables_[i] = build_cpt(node, parent_ids, graph.cpt_mode).table;
    }
  }

  // Kahn's algorithm, smallest id first among ready nodes.
  std::vector<std::size_t> remaining(n);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    remaining[i] = net.parents_[i].size();
    for (auto p : net.parents_[i]) children[p].push_back(i);
  }
  auto by_id = [&](std::size_t a, std::size_t b) { return net.ids_[a] > net.ids_[b]; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(by_id)> ready(by_id);
  for (std::size_t i = 0; i < n; ++i) {
    if (remaining[i] == 0) ready.push(i);
  }
  while (!ready.empty()) {
    auto v = ready.top();
    ready.pop();
    net.topo_.push_back(v);
    for (auto c : children[v]) {
      if (--remaining[c] == 0) ready.push(c);
    }
  }
  return net;
}

std::optional<std::size_t> BayesNet::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t BayesNet::require(std::string_view id) const {
  auto idx = index_of(id);
  if (!idx) throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(id) + "'");
  return *idx;
}

double BayesNet::local_probability(std::size_t i, bool state, std::uint64_t parent_mask) const {
  const auto& table = tables_.at(i);
  const double p_true = parents_[i].empty() ? table[0] : table.at(parent_mask);
  return state ? p_true : 1.0 - p_true;
}

}  // namespace vulnprio::bayes

#pragma once

// Bayesian Attack Graph model: boolean compromise-event nodes whose
// conditional tables derive from vulnerability scores (P = score / 10).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "scoring/cvss_temporal.hpp"

namespace vulnprio::bayes {

using scoring::Score;

enum class NodeKind { AttackerEntry, CompromiseEvent };
enum class CptMode { AnyParentOr, NoisyOr };

std::string_view to_string(NodeKind kind) noexcept;
std::string_view to_string(CptMode mode) noexcept;
std::optional<NodeKind> parse_node_kind(std::string_view text) noexcept;
std::optional<CptMode> parse_cpt_mode(std::string_view text) noexcept;

/// Prior of an AttackerEntry root without an explicit override.
inline constexpr double kDefaultEntryPrior = 0.5;

struct BagNode {
  std::string id;
  std::string label;
  std::optional<std::string> cve;  // normalized CVE id
  std::optional<Score> score;
  std::optional<int> layer;        // Purdue layer 1..5
  NodeKind kind = NodeKind::CompromiseEvent;

  bool operator==(const BagNode&) const = default;
};

struct BagEdge {
  std::string from;
  std::string to;

  bool operator==(const BagEdge&) const = default;
};

/// Plain description of a graph as loaded; may be invalid until validate()
/// says otherwise. `root_priors` holds explicit overrides only: roots
/// without one fall back to kDefaultEntryPrior (entry nodes) or score / 10.
struct AttackGraph {
  CptMode cpt_mode = CptMode::AnyParentOr;
  std::vector<BagNode> nodes;
  std::vector<BagEdge> edges;
  std::map<std::string, double> root_priors;

  const BagNode* find(std::string_view id) const noexcept;

  bool operator==(const AttackGraph&) const = default;
};

struct Finding {
  enum class Kind {
    DuplicateNode,
    DuplicateEdge,
    DanglingEdge,
    Cycle,
    MissingScore,
    EntryHasParents,
    MissingRootPrior,
    ExtraRootPrior,
    PriorOutOfRange,
  };
  Kind kind;
  std::string message;
  std::vector<std::string> witness;  // node ids, e.g. the cycle A -> B -> A
};

std::string_view to_string(Finding::Kind kind) noexcept;

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const noexcept { return findings.empty(); }
  bool has(Finding::Kind kind) const noexcept;
  std::string summary() const;
  nlohmann::json to_json() const;
};

ValidationReport validate(const AttackGraph& graph);

/// Conditional table of a non-root node. Bit i of the row index is the
/// state of parents[i].
struct Cpt {
  std::string node;
  std::vector<std::string> parents;  // sorted by id
  std::vector<double> table;         // P(node = true | row), size 2^|parents|

  double p_true(std::uint64_t parent_mask) const { return table.at(parent_mask); }
};

/// AnyParentOr: p when any parent is true, else 0.
/// NoisyOr: 1 - (1 - p)^(true parents), 0 when none.
/// Throws MissingScore (no score) or RootNode (no parents).
Cpt build_cpt(const BagNode& node, const std::vector<std::string>& parents, CptMode mode);

/// Replaces the score of every CVE-bearing node. Throws
/// Error(MissingScoreFor) naming the first CVE absent from `scores`.
AttackGraph rescore(const AttackGraph& graph, const std::map<std::string, Score>& scores);

/// Validated, index-based form used for inference. Immutable.
class BayesNet {
 public:
  /// Throws Error(Validation) carrying the report summary.
  static BayesNet compile(const AttackGraph& graph);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  std::optional<std::size_t> index_of(std::string_view id) const;
  /// Throws Error(UnknownNode).
  std::size_t require(std::string_view id) const;

  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }
  const std::vector<std::size_t>& topological_order() const noexcept { return topo_; }
  bool is_root(std::size_t i) const { return parents_.at(i).empty(); }

  /// P(node i = state | parents per mask); the mask is ignored for roots.
  double local_probability(std::size_t i, bool state, std::uint64_t parent_mask) const;

  const AttackGraph& graph() const noexcept { return graph_; }

 private:
  AttackGraph graph_;
  std::vector<std::string> ids_;                   // same order as graph_.nodes
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::vector<std::size_t>> parents_;  // sorted by parent id
  std::vector<std::vector<double>> tables_;        // root: {prior}; else CPT
  std::vector<std::size_t> topo_;                  // ties broken by id
};

}  // namespace vulnprio::bayes

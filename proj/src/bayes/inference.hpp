#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "bayes/graph.hpp"

namespace vulnprio::bayes {

/// Known node states, keyed by node id.
using EvidenceSet = std::map<std::string, bool>;

enum class ScoreVariant { Base, Temporal };

std::string_view to_string(ScoreVariant variant) noexcept;
std::optional<ScoreVariant> parse_score_variant(std::string_view text) noexcept;

struct QueryResult {
  std::string target;
  EvidenceSet evidence;
  double probability = 0.0;  // P(target = true | evidence)
  std::optional<ScoreVariant> score_variant;

  nlohmann::json to_json() const;
};

/// Parses {"id": true, ...}. Throws Error(Parse).
EvidenceSet evidence_from_json(const nlohmann::json& doc);
nlohmann::json evidence_to_json(const EvidenceSet& evidence);

/// Chain-rule product of priors and CPT entries. `assignment` must cover
/// every node (Error(IncompleteAssignment)); unknown ids raise UnknownNode.
double joint_probability(const BayesNet& net, const EvidenceSet& assignment);

/// Default node cap for posterior_enumeration.
inline constexpr std::size_t kEnumerationCap = 20;

/// Brute-force P(target | evidence): sums joint_probability over every
/// completion. Throws GraphTooLarge beyond `max_nodes`,
/// ZeroProbabilityEvidence when P(evidence) == 0.
QueryResult posterior_enumeration(const BayesNet& net, std::string_view target,
                                  const EvidenceSet& evidence,
                                  std::size_t max_nodes = kEnumerationCap);

/// Exact posterior by variable elimination over the ancestral closure of
/// target and evidence, eliminating in min-degree order.
/// Returns {P(target = false | e), P(target = true | e)}.
std::array<double, 2> posterior_distribution(const BayesNet& net, std::string_view target,
                                             const EvidenceSet& evidence);

QueryResult posterior(const BayesNet& net, std::string_view target, const EvidenceSet& evidence);

}  // namespace vulnprio::bayes

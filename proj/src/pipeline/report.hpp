#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bayes/graph.hpp"
#include "bayes/inference.hpp"
#include "pipeline/scored.hpp"

namespace vulnprio::pipeline {

/// An attack graph bound to a score run: compiled once with base scores and
/// once with temporal scores. Immutable after construction.
class ScoredModel {
 public:
  /// Throws Error(MissingScoreFor) when a graph CVE is not scored and
  /// Error(Validation) when the graph is invalid.
  ScoredModel(bayes::AttackGraph graph, ScoreRun scores);

  const bayes::AttackGraph& graph() const noexcept { return graph_; }
  const ScoreRun& scores() const noexcept { return scores_; }
  const bayes::BayesNet& net(bayes::ScoreVariant variant) const noexcept;

  bayes::QueryResult query(const std::string& target, const bayes::EvidenceSet& evidence,
                           bayes::ScoreVariant variant) const;

 private:
  bayes::AttackGraph graph_;
  ScoreRun scores_;
  bayes::BayesNet base_;
  bayes::BayesNet temporal_;
};

struct Scenario {
  std::string name;
  bayes::EvidenceSet evidence;
  std::vector<std::string> targets;
};

/// JSON list of {"name", "evidence": {id: bool}, "targets": [id]}. Names
/// must be unique. Throws Error(Parse).
std::vector<Scenario> scenarios_from_json(const nlohmann::json& doc);
nlohmann::json scenarios_to_json(const std::vector<Scenario>& scenarios);
std::vector<Scenario> load_scenarios(const std::filesystem::path& path);

struct ScenarioOutcome {
  std::string scenario;
  std::string target;
  bayes::EvidenceSet evidence;
  std::optional<double> base;      // P(target | evidence) with base scores
  std::optional<double> temporal;  // ... with temporal scores
  std::optional<std::string> error;  // e.g. ZeroProbabilityEvidence
  std::string error_detail;

  /// base - temporal
  std::optional<double> delta() const;
  /// (base - temporal) / base; unset when base is 0.
  std::optional<double> relative_delta() const;
  /// Temporal posterior above the base one beyond float noise.
  bool monotonicity_violation() const;
};

struct Report {
  std::vector<ScoredVulnerability> scored;  // priority order
  std::vector<SkippedCve> skipped;
  std::vector<ScenarioOutcome> outcomes;    // scenario order, then target order
  RunMetadata metadata;
};

/// Per-scenario failures are recorded on the outcome; other scenarios still
/// run. Throws Error(MissingScoreFor) if a graph CVE is not in `scored`.
Report run_scenarios(const bayes::AttackGraph& graph, const std::vector<Scenario>& scenarios,
                     const ScoreRun& scored);
Report run_scenarios(const ScoredModel& model, const std::vector<Scenario>& scenarios);

enum class Format { Json, Csv, Markdown };

std::optional<Format> parse_format(std::string_view text) noexcept;

/// Deterministic; CSV and Markdown print probabilities with three decimals.
std::string emit(const Report& report, Format format);
std::string emit(const ScoreRun& run, Format format);

nlohmann::json report_to_json(const Report& report);

}  // namespace vulnprio::pipeline

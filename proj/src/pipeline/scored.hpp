#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scoring/cvss_temporal.hpp"
#include "vulndb/backend.hpp"
#include "vulndb/mapping.hpp"

namespace vulnprio::pipeline {

struct ScoredVulnerability {
  vulndb::CveId cve;
  scoring::BaseScore base;
  scoring::TemporalMetrics metrics;
  scoring::TemporalScore temporal;
  vulndb::MetricProvenance provenance;

  bool operator==(const ScoredVulnerability&) const = default;
};

struct SkippedCve {
  std::string cve;     // as given on input
  std::string reason;  // UnknownCve, InvalidCveId, DuplicateCve, TransportError, ...
  std::string detail;

  bool operator==(const SkippedCve&) const = default;
};

struct RunMetadata {
  std::string mode = "fixture";
  std::string config_hash;
  std::optional<std::string> generated_at;  // unset for fixture runs

  bool operator==(const RunMetadata&) const = default;
};

struct ScoreRun {
  std::vector<ScoredVulnerability> scored;  // priority order
  std::vector<SkippedCve> skipped;          // input order
  RunMetadata metadata;

  std::map<std::string, scoring::Score> base_scores() const;
  std::map<std::string, scoring::Score> temporal_scores() const;
  const ScoredVulnerability* find(const std::string& cve) const;
};

/// Temporal score descending, CVE id ascending on ties.
void sort_by_priority(std::vector<ScoredVulnerability>& scored);

/// Scores every CVE through `backend` on a pool of `workers` threads.
/// Unresolvable inputs land in `skipped` with a reason; |cves| ==
/// |scored| + |skipped| always holds.
ScoreRun score_cves(const std::vector<std::string>& cves, vulndb::EvidenceBackend& backend,
                    const vulndb::RcPolicy& rc_policy = {}, unsigned workers = 4);

ScoredVulnerability score_bundle(const vulndb::EvidenceBundle& bundle,
                                 const vulndb::RcPolicy& rc_policy = {});

nlohmann::json scored_to_json(const ScoredVulnerability& v);
nlohmann::json score_run_to_json(const ScoreRun& run);
/// Rejects entries whose temporal score disagrees with base and metrics.
/// Throws Error(Parse).
ScoreRun score_run_from_json(const nlohmann::json& doc);
ScoreRun load_score_run(const std::filesystem::path& path);

/// One CVE per line; blank lines and '#' comments ignored.
std::vector<std::string> read_cve_list(const std::filesystem::path& path);

}  // namespace vulnprio::pipeline

#pragma once

// Evidence -> Temporal Metric level rules.

#include <map>
#include <optional>
#include <span>
#include <string>

#include "scoring/cvss_temporal.hpp"
#include "vulndb/records.hpp"

namespace vulnprio::vulndb {

using scoring::ExploitCodeMaturity;
using scoring::RemediationLevel;
using scoring::ReportConfidence;

// Excellent/Great -> High, Good/Normal -> Functional, anything else ->
// ProofOfConcept. Max over entries; nullopt for no entries.
ExploitCodeMaturity ecm_for_rank(MetasploitRank rank) noexcept;
std::optional<ExploitCodeMaturity> ecm_from_metasploit(std::span<const MetasploitEntry> entries);

// verified -> Functional, otherwise ProofOfConcept.
std::optional<ExploitCodeMaturity> ecm_from_exploitdb(std::span<const ExploitDbEntry> entries);

std::optional<ExploitCodeMaturity> ecm_from_packetstorm(const PacketStormResult& result);

/// Join in the severity order; Unproven when every source is empty.
ExploitCodeMaturity aggregate_ecm(std::optional<ExploitCodeMaturity> metasploit,
                                  std::optional<ExploitCodeMaturity> exploitdb,
                                  std::optional<ExploitCodeMaturity> packetstorm);

RemediationLevel rl_for_solution(SolutionType type) noexcept;
/// Most remediated record wins (smallest multiplier); NotDefined when empty.
RemediationLevel rl_from_openvas(std::span<const OpenVasRecord> records);

struct RcPolicy {
  std::map<CveId, ReportConfidence> overrides;
};

/// Confirmed when NVD knows the CVE, Unknown otherwise, unless overridden.
ReportConfidence derive_rc(const NvdRecord& nvd, const RcPolicy& policy = {});

/// Which rule produced each metric.
struct MetricProvenance {
  std::string ecm;  // e.g. "metasploit", "exploitdb+packetstorm", "default"
  std::string rl;   // "openvas" or "default"
  std::string rc;   // "config" or "default"

  bool operator==(const MetricProvenance&) const = default;
};

struct AssembledMetrics {
  scoring::BaseScore base;
  scoring::TemporalMetrics metrics;
  MetricProvenance provenance;
};

/// Throws Error(UnknownCve) if the bundle's NVD record does not exist.
AssembledMetrics assemble_metrics(const EvidenceBundle& bundle, const RcPolicy& policy = {});

}  // namespace vulnprio::vulndb

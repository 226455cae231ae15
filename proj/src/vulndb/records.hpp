#pragma once

// Per-source evidence records and their JSON fixture form.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "scoring/cvss_temporal.hpp"

namespace vulnprio::vulndb {

class CveId {
 public:
  /// Validates CVE-YYYY-NNNN+ (year >= 1999, suffix >= 4 digits) and
  /// uppercases. Throws Error(InvalidArgument).
  static CveId parse(std::string_view text);
  static std::optional<CveId> try_parse(std::string_view text) noexcept;

  const std::string& str() const noexcept { return id_; }

  auto operator<=>(const CveId&) const = default;

 private:
  explicit CveId(std::string id) : id_(std::move(id)) {}
  std::string id_;
};

struct NvdRecord {
  CveId cve;
  bool exists = false;
  std::optional<scoring::BaseScore> base_score;  // present iff exists

  bool operator==(const NvdRecord&) const = default;
};

enum class MetasploitRank { Excellent, Great, Good, Normal, Average, Low, Manual };

/// Case-insensitive; unknown strings normalize to Manual.
MetasploitRank parse_metasploit_rank(std::string_view text) noexcept;
std::string_view to_string(MetasploitRank rank) noexcept;

struct MetasploitEntry {
  std::string name;
  std::string description;
  MetasploitRank rank = MetasploitRank::Manual;

  bool operator==(const MetasploitEntry&) const = default;
};

struct ExploitDbEntry {
  std::string id;
  std::string description;
  std::string date_published;  // YYYY-MM-DD
  std::string author;
  std::string type;
  std::string platform;
  std::string url;
  bool verified = false;

  bool operator==(const ExploitDbEntry&) const = default;
};

struct PacketStormResult {
  bool found = false;

  bool operator==(const PacketStormResult&) const = default;
};

enum class SolutionType { NoneAvailable, WillNotFix, Workaround, Mitigation, VendorFix };

std::optional<SolutionType> parse_solution_type(std::string_view text) noexcept;
std::string_view to_string(SolutionType type) noexcept;

struct OpenVasRecord {
  SolutionType solution_type = SolutionType::NoneAvailable;

  bool operator==(const OpenVasRecord&) const = default;
};

struct EvidenceBundle {
  CveId cve;
  NvdRecord nvd;
  std::vector<MetasploitEntry> metasploit;
  std::vector<ExploitDbEntry> exploitdb;
  PacketStormResult packetstorm;
  std::vector<OpenVasRecord> openvas;
  std::optional<std::string> fetched_at;  // ISO-8601 UTC; unset for fixtures

  /// Equality ignoring fetched_at.
  bool same_evidence(const EvidenceBundle& other) const;
};

// JSON fixture documents, one per source. Field names match the record
// members. Each document carries the "cve" it belongs to.
nlohmann::json to_json(const NvdRecord& record);
nlohmann::json metasploit_to_json(const CveId& cve, const std::vector<MetasploitEntry>& entries);
nlohmann::json exploitdb_to_json(const CveId& cve, const std::vector<ExploitDbEntry>& entries);
nlohmann::json packetstorm_to_json(const CveId& cve, const PacketStormResult& result);
nlohmann::json openvas_to_json(const CveId& cve, const std::vector<OpenVasRecord>& records);

// Parsers throw Error(MalformedResponse) on schema violations, including a
// "cve" field that disagrees with `expected`.
NvdRecord nvd_from_json(const nlohmann::json& doc, const CveId& expected);
std::vector<MetasploitEntry> metasploit_from_json(const nlohmann::json& doc, const CveId& expected);
std::vector<ExploitDbEntry> exploitdb_from_json(const nlohmann::json& doc, const CveId& expected);
PacketStormResult packetstorm_from_json(const nlohmann::json& doc, const CveId& expected);
std::vector<OpenVasRecord> openvas_from_json(const nlohmann::json& doc, const CveId& expected);

/// NVD REST API 2.0 response (`/rest/json/cves/2.0?cveId=...`). Prefers the
/// Primary cvssMetricV31 entry, falling back to the first one.
NvdRecord nvd_from_api_v2(const nlohmann::json& doc, const CveId& expected);

nlohmann::json bundle_to_json(const EvidenceBundle& bundle);

}  // namespace vulnprio::vulndb

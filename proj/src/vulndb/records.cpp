#include "vulndb/records.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "common/error.hpp"

namespace vulnprio::vulndb {

using nlohmann::json;

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

[[noreturn]] void malformed(const CveId& cve, const std::string& what) {
  throw Error(ErrorCode::MalformedResponse, cve.str() + ": " + what);
}

void check_cve_field(const json& doc, const CveId& expected) {
  if (!doc.is_object()) malformed(expected, "document is not a JSON object");
  auto it = doc.find("cve");
  if (it == doc.end()) return;
  if (!it->is_string()) malformed(expected, "'cve' is not a string");
  auto parsed = CveId::try_parse(it->get<std::string>());
  if (!parsed || *parsed != expected) {
    malformed(expected, "document belongs to " + it->get<std::string>());
  }
}

const json& array_field(const json& doc, const char* key, const CveId& cve) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_array()) {
    malformed(cve, std::string("missing array field '") + key + "'");
  }
  return *it;
}

std::string string_field(const json& obj, const char* key, const CveId& cve,
                         bool required = false) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) malformed(cve, std::string("missing field '") + key + "'");
    return {};
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  malformed(cve, std::string("field '") + key + "' is not a string");
}

bool coerce_bool(const json& v, const CveId& cve) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) {
    auto n = v.get<long long>();
    if (n == 0 || n == 1) return n == 1;
  }
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "0" || s == "false") return false;
    if (s == "1" || s == "true") return true;
  }
  malformed(cve, "'verified' is not 0/1/true/false");
}

}  // namespace

CveId CveId::parse(std::string_view text) {
  auto id = try_parse(text);
  if (!id) {
    throw Error(ErrorCode::InvalidArgument, "invalid CVE id: '" + std::string(text) + "'");
  }
  return *id;
}

std::optional<CveId> CveId::try_parse(std::string_view text) noexcept {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  std::string_view s = upper;
  if (s.size() < 13 || s.substr(0, 4) != "CVE-" || s[8] != '-') return std::nullopt;
  auto year = s.substr(4, 4);
  auto suffix = s.substr(9);
  if (!all_digits(year) || !all_digits(suffix) || suffix.size() < 4) return std::nullopt;
  if (std::stoi(std::string(year)) < 1999) return std::nullopt;
  return CveId(std::move(upper));
}

MetasploitRank parse_metasploit_rank(std::string_view text) noexcept {
  static constexpr std::array<MetasploitRank, 7> kAll = {
      MetasploitRank::Excellent, MetasploitRank::Great,   MetasploitRank::Good,
      MetasploitRank::Normal,    MetasploitRank::Average, MetasploitRank::Low,
      MetasploitRank::Manual};
  std::string needle = lower(text);
  // Metasploit module metadata often reports "ExcellentRanking" etc.
  if (needle.size() > 7 && needle.ends_with("ranking")) needle.resize(needle.size() - 7);
  for (auto rank : kAll) {
    if (lower(to_string(rank)) == needle) return rank;
  }
  return MetasploitRank::Manual;
}

std::string_view to_string(MetasploitRank rank) noexcept {
  switch (rank) {
    case MetasploitRank::Excellent: return "Excellent";
    case MetasploitRank::Great: return "Great";
    case MetasploitRank::Good: return "Good";
    case MetasploitRank::Normal: return "Normal";
    case MetasploitRank::Average: return "Average";
    case MetasploitRank::Low: return "Low";
    case MetasploitRank::Manual: return "Manual";
  }
  return "Manual";
}

std::optional<SolutionType> parse_solution_type(std::string_view text) noexcept {
  static constexpr std::array<SolutionType, 5> kAll = {
      SolutionType::NoneAvailable, SolutionType::WillNotFix, SolutionType::Workaround,
      SolutionType::Mitigation, SolutionType::VendorFix};
  for (auto t : kAll) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::string_view to_string(SolutionType type) noexcept {
  switch (type) {
    case SolutionType::NoneAvailable: return "NoneAvailable";
    case SolutionType::WillNotFix: return "WillNotFix";
    case SolutionType::Workaround: return "Workaround";
    case SolutionType::Mitigation: return "Mitigation";
    case SolutionType::VendorFix: return "VendorFix";
  }
  return "NoneAvailable";
}

bool EvidenceBundle::same_evidence(const EvidenceBundle& other) const {
  return cve == other.cve && nvd == other.nvd && metasploit == other.metasploit &&
         exploitdb == other.exploitdb && packetstorm == other.packetstorm &&
         openvas == other.openvas;
}

json to_json(const NvdRecord& record) {
  json doc = {{"cve", record.cve.str()}, {"exists", record.exists}};
  if (record.base_score) doc["base_score"] = record.base_score->value();
  return doc;
}

json metasploit_to_json(const CveId& cve, const std::vector<MetasploitEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) {
    arr.push_back({{"name", e.name},
                   {"description", e.description},
                   {"rank", std::string(to_string(e.rank))}});
  }
  return {{"cve", cve.str()}, {"entries", std::move(arr)}};
}

json exploitdb_to_json(const CveId& cve, const std::vector<ExploitDbEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) {
    arr.push_back({{"id", e.id},
                   {"description", e.description},
                   {"date_published", e.date_published},
                   {"author", e.author},
                   {"type", e.type},
                   {"platform", e.platform},
                   {"url", e.url},
                   {"verified", e.verified}});
  }
  return {{"cve", cve.str()}, {"entries", std::move(arr)}};
}

json packetstorm_to_json(const CveId& cve, const PacketStormResult& result) {
  return {{"cve", cve.str()}, {"found", result.found}};
}

json openvas_to_json(const CveId& cve, const std::vector<OpenVasRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) {
    arr.push_back({{"solution_type", std::string(to_string(r.solution_type))}});
  }
  return {{"cve", cve.str()}, {"records", std::move(arr)}};
}

NvdRecord nvd_from_json(const json& doc, const CveId& expected) {
  check_cve_field(doc, expected);
  NvdRecord rec{expected, false, std::nullopt};
  auto exists = doc.find("exists");
  if (exists == doc.end() || !exists->is_boolean()) {
    malformed(expected, "nvd: missing boolean 'exists'");
  }
  rec.exists = exists->get<bool>();
  auto score = doc.find("base_score");
  const bool has_score = score != doc.end() && !score->is_null();
  if (rec.exists) {
    if (!has_score || !score->is_number()) malformed(expected, "nvd: missing 'base_score'");
    try {
      rec.base_score = scoring::Score::from_decimal(score->get<double>());
    } catch (const Error& e) {
      malformed(expected, std::string("nvd: ") + e.what());
    }
  } else if (has_score) {
    malformed(expected, "nvd: 'base_score' present for a CVE that does not exist");
  }
  return rec;
}

std::vector<MetasploitEntry> metasploit_from_json(const json& doc, const CveId& expected) {
  check_cve_field(doc, expected);
  std::vector<MetasploitEntry> out;
  for (const auto& e : array_field(doc, "entries", expected)) {
    if (!e.is_object()) malformed(expected, "metasploit: entry is not an object");
    out.push_back({string_field(e, "name", expected), string_field(e, "description", expected),
                   parse_metasploit_rank(string_field(e, "rank", expected))});
  }
  return out;
}

std::vector<ExploitDbEntry> exploitdb_from_json(const json& doc, const CveId& expected) {
  check_cve_field(doc, expected);
  std::vector<ExploitDbEntry> out;
  for (const auto& e : array_field(doc, "entries", expected)) {
    if (!e.is_object()) malformed(expected, "exploitdb: entry is not an object");
    auto verified = e.find("verified");
    if (verified == e.end()) malformed(expected, "exploitdb: missing 'verified'");
    out.push_back({string_field(e, "id", expected, true), string_field(e, "description", expected),
                   string_field(e, "date_published", expected), string_field(e, "author", expected),
                   string_field(e, "type", expected), string_field(e, "platform", expected),
                   string_field(e, "url", expected), coerce_bool(*verified, expected)});
  }
  return out;
}

PacketStormResult packetstorm_from_json(const json& doc, const CveId& expected) {
  check_cve_field(doc, expected);
  auto found = doc.find("found");
  if (found == doc.end() || !found->is_boolean()) {
    malformed(expected, "packetstorm: missing boolean 'found'");
  }
  return {found->get<bool>()};
}

std::vector<OpenVasRecord> openvas_from_json(const json& doc, const CveId& expected) {
  check_cve_field(doc, expected);
  std::vector<OpenVasRecord> out;
  for (const auto& r : array_field(doc, "records", expected)) {
    if (!r.is_object()) malformed(expected, "openvas: record is not an object");
    auto text = string_field(r, "solution_type", expected, true);
    auto type = parse_solution_type(text);
    if (!type) malformed(expected, "openvas: unknown solution_type '" + text + "'");
    out.push_back({*type});
  }
  return out;
}

NvdRecord nvd_from_api_v2(const json& doc, const CveId& expected) {
  if (!doc.is_object()) malformed(expected, "nvd api: response is not an object");
  auto vulns = doc.find("vulnerabilities");
  if (vulns == doc.end() || !vulns->is_array()) {
    if (doc.value("totalResults", -1) == 0) return {expected, false, std::nullopt};
    malformed(expected, "nvd api: missing 'vulnerabilities'");
  }
  for (const auto& v : *vulns) {
    const auto& cve = v.value("cve", json::object());
    if (CveId::try_parse(cve.value("id", std::string{})) != expected) continue;
    const auto metrics = cve.value("metrics", json::object()).value("cvssMetricV31", json::array());
    if (!metrics.is_array() || metrics.empty()) {
      malformed(expected, "nvd api: no cvssMetricV31 for CVE");
    }
    const json* chosen = &metrics.front();
    for (const auto& m : metrics) {
      if (m.value("type", std::string{}) == "Primary") {
        chosen = &m;
        break;
      }
    }
    const auto data = chosen->value("cvssData", json::object());
    auto score = data.find("baseScore");
    if (score == data.end() || !score->is_number()) {
      malformed(expected, "nvd api: cvssData.baseScore missing");
    }
    try {
      return {expected, true, scoring::Score::from_decimal(score->get<double>())};
    } catch (const Error& e) {
      malformed(expected, std::string("nvd api: ") + e.what());
    }
  }
  return {expected, false, std::nullopt};
}

json bundle_to_json(const EvidenceBundle& bundle) {
  json doc = {{"cve", bundle.cve.str()},
              {"nvd", to_json(bundle.nvd)},
              {"metasploit", metasploit_to_json(bundle.cve, bundle.metasploit)["entries"]},
              {"exploitdb", exploitdb_to_json(bundle.cve, bundle.exploitdb)["entries"]},
              {"packetstorm", packetstorm_to_json(bundle.cve, bundle.packetstorm)["found"]},
              {"openvas", openvas_to_json(bundle.cve, bundle.openvas)["records"]}};
  doc["fetched_at"] = bundle.fetched_at ? json(*bundle.fetched_at) : json(nullptr);
  return doc;
}

}  // namespace vulnprio::vulndb

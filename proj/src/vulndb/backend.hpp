#pragma once

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vulndb/records.hpp"

namespace vulnprio::vulndb {

enum class Source { Nvd, Metasploit, ExploitDb, PacketStorm, OpenVas };

inline constexpr std::array<Source, 5> kAllSources = {
    Source::Nvd, Source::Metasploit, Source::ExploitDb, Source::PacketStorm, Source::OpenVas};

/// "nvd", "metasploit", ... (also the fixture file stem).
std::string_view to_string(Source source) noexcept;
std::optional<Source> parse_source(std::string_view name) noexcept;

/// Raw per-source results for one CVE. Empty/absent means the source had
/// nothing.
class EvidenceBackend {
 public:
  virtual ~EvidenceBackend() = default;

  virtual NvdRecord fetch_nvd(const CveId& cve) = 0;
  virtual std::vector<MetasploitEntry> fetch_metasploit(const CveId& cve) = 0;
  virtual std::vector<ExploitDbEntry> fetch_exploitdb(const CveId& cve) = 0;
  virtual PacketStormResult fetch_packetstorm(const CveId& cve) = 0;
  virtual std::vector<OpenVasRecord> fetch_openvas(const CveId& cve) = 0;

  /// "fixture" or "live".
  virtual std::string_view mode() const noexcept = 0;

  /// Queries all five sources concurrently and joins the results.
  EvidenceBundle fetch_bundle(const CveId& cve);

 protected:
  virtual std::optional<std::string> timestamp() const { return std::nullopt; }
};

/// Reads fixtures/<CVE-ID>/{nvd,metasploit,exploitdb,packetstorm,openvas}.json.
/// Read-only; safe for concurrent use.
class FixtureBackend final : public EvidenceBackend {
 public:
  /// Throws Error(Config) if `root` is not a directory.
  explicit FixtureBackend(std::filesystem::path root);

  NvdRecord fetch_nvd(const CveId& cve) override;
  std::vector<MetasploitEntry> fetch_metasploit(const CveId& cve) override;
  std::vector<ExploitDbEntry> fetch_exploitdb(const CveId& cve) override;
  PacketStormResult fetch_packetstorm(const CveId& cve) override;
  std::vector<OpenVasRecord> fetch_openvas(const CveId& cve) override;

  std::string_view mode() const noexcept override { return "fixture"; }

 private:
  std::optional<nlohmann::json> load(const CveId& cve, Source source) const;

  std::filesystem::path root_;
};

/// Writes records in fixture layout. Empty results produce no file.
void write_fixture(const std::filesystem::path& root, const EvidenceBundle& bundle);

enum class ResponseFormat {
  Fixture,    // body is the fixture document for the source
  NvdApiV2,   // NVD REST API 2.0 (nvd only)
};

struct SourceEndpoint {
  bool enabled = true;
  std::string base_url;                  // scheme://host[:port]
  std::string path;                      // "{cve}" is substituted
  ResponseFormat format = ResponseFormat::Fixture;
  std::string api_key_env;               // environment variable holding the key
  std::string api_key_header;            // header that carries it
  std::chrono::milliseconds delay{0};    // minimum spacing between requests
  int retries = 2;                       // extra attempts on transient failure
  std::chrono::milliseconds timeout{10000};
};

struct LiveConfig {
  std::map<Source, SourceEndpoint> endpoints;
  std::optional<std::filesystem::path> record_dir;

  /// The "sources" object of the configuration file. Throws Error(Config).
  static LiveConfig from_json(const nlohmann::json& sources);
  nlohmann::json to_json() const;
};

/// HTTP GET backend. Requests to one source are serialized and spaced by
/// the endpoint delay; distinct sources proceed in parallel.
class LiveBackend final : public EvidenceBackend {
 public:
  explicit LiveBackend(LiveConfig config);
  ~LiveBackend() override;

  NvdRecord fetch_nvd(const CveId& cve) override;
  std::vector<MetasploitEntry> fetch_metasploit(const CveId& cve) override;
  std::vector<ExploitDbEntry> fetch_exploitdb(const CveId& cve) override;
  PacketStormResult fetch_packetstorm(const CveId& cve) override;
  std::vector<OpenVasRecord> fetch_openvas(const CveId& cve) override;

  std::string_view mode() const noexcept override { return "live"; }

 protected:
  std::optional<std::string> timestamp() const override;

 private:
  struct Lane;
  /// nullopt on 404 or disabled source.
  std::optional<nlohmann::json> get(Source source, const CveId& cve);
  void record(Source source, const CveId& cve, const nlohmann::json& doc) const;

  LiveConfig config_;
  std::map<Source, std::unique_ptr<Lane>> lanes_;
};

}  // namespace vulnprio::vulndb

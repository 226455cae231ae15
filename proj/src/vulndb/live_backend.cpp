#include <cstdlib>
#include <ctime>
#include <thread>

#include <httplib.h>

#include "common/error.hpp"
#include "vulndb/backend.hpp"

namespace vulnprio::vulndb {

using nlohmann::json;
using namespace std::chrono_literals;

namespace {

std::optional<ResponseFormat> parse_format(std::string_view s) {
  if (s == "fixture") return ResponseFormat::Fixture;
  if (s == "nvd_api_v2") return ResponseFormat::NvdApiV2;
  return std::nullopt;
}

std::string_view to_string(ResponseFormat f) {
  return f == ResponseFormat::NvdApiV2 ? "nvd_api_v2" : "fixture";
}

std::string substitute(std::string path, const std::string& cve) {
  static constexpr std::string_view kToken = "{cve}";
  for (auto pos = path.find(kToken); pos != std::string::npos; pos = path.find(kToken, pos)) {
    path.replace(pos, kToken.size(), cve);
    pos += cve.size();
  }
  return path;
}

bool transient(int status) { return status == 429 || status >= 500; }

}  // namespace

LiveConfig LiveConfig::from_json(const json& sources) {
  if (!sources.is_object()) throw Error(ErrorCode::Config, "'sources' must be an object");
  LiveConfig cfg;
  for (const auto& [name, spec] : sources.items()) {
    auto source = parse_source(name);
    if (!source) throw Error(ErrorCode::Config, "unknown source '" + name + "'");
    if (!spec.is_object()) throw Error(ErrorCode::Config, "source '" + name + "' must be an object");
    SourceEndpoint ep;
    try {
      ep.enabled = spec.value("enabled", true);
      ep.base_url = spec.value("base_url", std::string{});
      ep.path = spec.value("path", std::string{});
      auto fmt = parse_format(spec.value("format", std::string("fixture")));
      if (!fmt) throw Error(ErrorCode::Config, "source '" + name + "': unknown format");
      if (*fmt == ResponseFormat::NvdApiV2 && *source != Source::Nvd) {
        throw Error(ErrorCode::Config, "format nvd_api_v2 only applies to source 'nvd'");
      }
      ep.format = *fmt;
      ep.api_key_env = spec.value("api_key_env", std::string{});
      ep.api_key_header = spec.value("api_key_header", std::string{});
      ep.delay = std::chrono::milliseconds(spec.value("delay_ms", 0));
      ep.retries = spec.value("retries", 2);
      ep.timeout = std::chrono::milliseconds(spec.value("timeout_ms", 10000));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Config, "source '" + name + "': " + e.what());
    }
    if (ep.enabled && (ep.base_url.empty() || ep.path.empty())) {
      throw Error(ErrorCode::Config, "source '" + name + "' needs base_url and path");
    }
    if (ep.retries < 0 || ep.delay.count() < 0) {
      throw Error(ErrorCode::Config, "source '" + name + "': negative retries or delay");
    }
    cfg.endpoints[*source] = std::move(ep);
  }
  for (auto s : kAllSources) {
    if (!cfg.endpoints.contains(s)) {
      throw Error(ErrorCode::Config,
                  "live backend: no endpoint configured for '" + std::string(vulndb::to_string(s)) + "'");
    }
  }
  return cfg;
}

json LiveConfig::to_json() const {
  json out = json::object();
  for (const auto& [source, ep] : endpoints) {
    out[std::string(vulndb::to_string(source))] = {
        {"enabled", ep.enabled},          {"base_url", ep.base_url},
        {"path", ep.path},                {"format", std::string(to_string(ep.format))},
        {"api_key_env", ep.api_key_env},  {"api_key_header", ep.api_key_header},
        {"delay_ms", ep.delay.count()},   {"retries", ep.retries},
        {"timeout_ms", ep.timeout.count()}};
  }
  return out;
}

struct LiveBackend::Lane {
  std::mutex mutex;
  std::chrono::steady_clock::time_point last_request{};
};

LiveBackend::LiveBackend(LiveConfig config) : config_(std::move(config)) {
  for (auto s : kAllSources) lanes_[s] = std::make_unique<Lane>();
}

LiveBackend::~LiveBackend() = default;

std::optional<std::string> LiveBackend::timestamp() const {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return std::string(buf);
}

std::optional<json> LiveBackend::get(Source source, const CveId& cve) {
  const auto it = config_.endpoints.find(source);
  if (it == config_.endpoints.end() || !it->second.enabled) return std::nullopt;
  const SourceEndpoint& ep = it->second;
  Lane& lane = *lanes_.at(source);
  std::lock_guard lock(lane.mutex);

  httplib::Client client(ep.base_url);
  if (!client.is_valid()) {
    throw Error(ErrorCode::Config, "invalid base_url '" + ep.base_url + "'");
  }
  client.set_connection_timeout(ep.timeout);
  client.set_read_timeout(ep.timeout);
  client.set_follow_location(true);
  httplib::Headers headers{{"Accept", "application/json"}};
  if (!ep.api_key_env.empty() && !ep.api_key_header.empty()) {
    if (const char* key = std::getenv(ep.api_key_env.c_str()); key && *key) {
      headers.emplace(ep.api_key_header, key);
    }
  }
  const std::string path = substitute(ep.path, cve.str());
  const std::string where = std::string(vulndb::to_string(source)) + " " + ep.base_url + path;

  std::string last_failure;
  for (int attempt = 0; attempt <= ep.retries; ++attempt) {
    const auto earliest =
        lane.last_request + ep.delay * (attempt + 1) + std::chrono::milliseconds(100) * attempt;
    std::this_thread::sleep_until(earliest);
    lane.last_request = std::chrono::steady_clock::now();

    auto res = client.Get(path, headers);
    if (!res) {
      last_failure = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 404) return std::nullopt;
    if (transient(res->status)) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::Transport, where + ": HTTP " + std::to_string(res->status));
    }
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::MalformedResponse, where + ": " + e.what());
    }
  }
  throw Error(ErrorCode::Transport, where + ": " + last_failure + " after " +
                                        std::to_string(ep.retries + 1) + " attempt(s)");
}

void LiveBackend::record(Source source, const CveId& cve, const json& doc) const {
  if (!config_.record_dir) return;
  EvidenceBundle partial{cve, {cve, false, std::nullopt}, {}, {}, {}, {}, std::nullopt};
  switch (source) {
    case Source::Nvd: partial.nvd = nvd_from_json(doc, cve); break;
    case Source::Metasploit: partial.metasploit = metasploit_from_json(doc, cve); break;
    case Source::ExploitDb: partial.exploitdb = exploitdb_from_json(doc, cve); break;
    case Source::PacketStorm: partial.packetstorm = packetstorm_from_json(doc, cve); break;
    case Source::OpenVas: partial.openvas = openvas_from_json(doc, cve); break;
  }
  write_fixture(*config_.record_dir, partial);
}

NvdRecord LiveBackend::fetch_nvd(const CveId& cve) {
  auto doc = get(Source::Nvd, cve);
  if (!doc) return {cve, false, std::nullopt};
  NvdRecord rec = config_.endpoints.at(Source::Nvd).format == ResponseFormat::NvdApiV2
                      ? nvd_from_api_v2(*doc, cve)
                      : nvd_from_json(*doc, cve);
  record(Source::Nvd, cve, to_json(rec));
  return rec;
}

std::vector<MetasploitEntry> LiveBackend::fetch_metasploit(const CveId& cve) {
  auto doc = get(Source::Metasploit, cve);
  if (!doc) return {};
  auto out = metasploit_from_json(*doc, cve);
  record(Source::Metasploit, cve, metasploit_to_json(cve, out));
  return out;
}

std::vector<ExploitDbEntry> LiveBackend::fetch_exploitdb(const CveId& cve) {
  auto doc = get(Source::ExploitDb, cve);
  if (!doc) return {};
  auto out = exploitdb_from_json(*doc, cve);
  record(Source::ExploitDb, cve, exploitdb_to_json(cve, out));
  return out;
}

PacketStormResult LiveBackend::fetch_packetstorm(const CveId& cve) {
  auto doc = get(Source::PacketStorm, cve);
  if (!doc) return {};
  auto out = packetstorm_from_json(*doc, cve);
  record(Source::PacketStorm, cve, packetstorm_to_json(cve, out));
  return out;
}

std::vector<OpenVasRecord> LiveBackend::fetch_openvas(const CveId& cve) {
  auto doc = get(Source::OpenVas, cve);
  if (!doc) return {};
  auto out = openvas_from_json(*doc, cve);
  record(Source::OpenVas, cve, openvas_to_json(cve, out));
  return out;
}

}  // namespace vulnprio::vulndb

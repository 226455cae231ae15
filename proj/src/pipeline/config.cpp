#include "pipeline/config.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include <openssl/evp.h>

#include "common/error.hpp"

namespace vulnprio::pipeline {

using nlohmann::json;

std::string_view to_string(BackendMode mode) noexcept {
  return mode == BackendMode::Live ? "live" : "fixture";
}

std::optional<BackendMode> parse_backend_mode(std::string_view text) noexcept {
  if (text == "fixture") return BackendMode::Fixture;
  if (text == "live") return BackendMode::Live;
  return std::nullopt;
}

PipelineConfig PipelineConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Config, "configuration must be a JSON object");
  PipelineConfig cfg;
  try {
    if (doc.contains("backend")) {
      auto mode = parse_backend_mode(doc.at("backend").get<std::string>());
      if (!mode) throw Error(ErrorCode::Config, "backend must be 'fixture' or 'live'");
      cfg.backend = *mode;
    }
    if (doc.contains("fixtures_dir")) cfg.fixtures_dir = doc.at("fixtures_dir").get<std::string>();
    if (doc.contains("record_dir")) cfg.record_dir = doc.at("record_dir").get<std::string>();
    if (doc.contains("workers")) {
      const int w = doc.at("workers").get<int>();
      if (w < 1) throw Error(ErrorCode::Config, "workers must be >= 1");
      cfg.workers = static_cast<unsigned>(w);
    }
    if (auto it = doc.find("report_confidence_overrides"); it != doc.end()) {
      for (const auto& [cve, level] : it->items()) {
        auto id = vulndb::CveId::try_parse(cve);
        auto rc = scoring::parse_rc(level.get<std::string>());
        if (!id || !rc) {
          throw Error(ErrorCode::Config, "bad report confidence override " + cve);
        }
        cfg.rc_policy.overrides[*id] = *rc;
      }
    }
    if (doc.contains("sources")) cfg.sources = doc.at("sources");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("configuration: ") + e.what());
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open configuration " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, path.string() + ": " + e.what());
  }
}

json PipelineConfig::canonical() const {
  json overrides = json::object();
  for (const auto& [cve, rc] : rc_policy.overrides) overrides[cve.str()] = std::string(scoring::to_string(rc));
  json out = {{"backend", std::string(to_string(backend))},
              {"report_confidence_overrides", std::move(overrides)}};
  if (backend == BackendMode::Fixture) {
    out["fixtures_dir"] = fixtures_dir.generic_string();
  } else {
    out["sources"] = sources ? vulndb::LiveConfig::from_json(*sources).to_json() : json(nullptr);
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Config, "SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string PipelineConfig::hash() const { return sha256_hex(canonical().dump()); }

std::unique_ptr<vulndb::EvidenceBackend> PipelineConfig::make_backend() const {
  if (backend == BackendMode::Fixture) {
    return std::make_unique<vulndb::FixtureBackend>(fixtures_dir);
  }
  if (!sources) throw Error(ErrorCode::Config, "live backend requires a 'sources' section");
  auto live = vulndb::LiveConfig::from_json(*sources);
  live.record_dir = record_dir;
  return std::make_unique<vulndb::LiveBackend>(std::move(live));
}

}  // namespace vulnprio::pipeline

#pragma once

// Pipeline configuration file (JSON):
//   {"backend": "fixture" | "live",
//    "fixtures_dir": "data/fixtures",
//    "record_dir": "recorded/",              // live only, optional
//    "workers": 4,
//    "report_confidence_overrides": {"CVE-2021-34527": "Reasonable"},
//    "sources": {"nvd": {...}, "metasploit": {...}, ...}}   // live only
// API keys are never read from this file; endpoints name the environment
// variable that holds them.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "vulndb/backend.hpp"
#include "vulndb/mapping.hpp"

namespace vulnprio::pipeline {

enum class BackendMode { Fixture, Live };

std::string_view to_string(BackendMode mode) noexcept;
std::optional<BackendMode> parse_backend_mode(std::string_view text) noexcept;

struct PipelineConfig {
  BackendMode backend = BackendMode::Fixture;
  std::filesystem::path fixtures_dir = "data/fixtures";
  std::optional<std::filesystem::path> record_dir;
  unsigned workers = 4;
  vulndb::RcPolicy rc_policy;
  std::optional<nlohmann::json> sources;  // raw "sources" object

  /// Throws Error(Config).
  static PipelineConfig from_json(const nlohmann::json& doc);
  static PipelineConfig load(const std::filesystem::path& path);

  /// Canonical JSON (sorted keys) of every setting that affects results.
  nlohmann::json canonical() const;
  /// Hex SHA-256 of canonical().dump().
  std::string hash() const;

  /// Throws Error(Config) when the selected backend cannot be built.
  std::unique_ptr<vulndb::EvidenceBackend> make_backend() const;
};

std::string sha256_hex(std::string_view data);

}  // namespace vulnprio::pipeline

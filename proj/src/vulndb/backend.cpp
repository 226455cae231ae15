#include "vulndb/backend.hpp"

#include <fstream>
#include <future>
#include <sstream>

#include "common/error.hpp"

namespace vulnprio::vulndb {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Source source) noexcept {
  switch (source) {
    case Source::Nvd: return "nvd";
    case Source::Metasploit: return "metasploit";
    case Source::ExploitDb: return "exploitdb";
    case Source::PacketStorm: return "packetstorm";
    case Source::OpenVas: return "openvas";
  }
  return "nvd";
}

std::optional<Source> parse_source(std::string_view name) noexcept {
  for (auto s : kAllSources) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

EvidenceBundle EvidenceBackend::fetch_bundle(const CveId& cve) {
  auto nvd = std::async(std::launch::async, [&] { return fetch_nvd(cve); });
  auto ms = std::async(std::launch::async, [&] { return fetch_metasploit(cve); });
  auto edb = std::async(std::launch::async, [&] { return fetch_exploitdb(cve); });
  auto ps = std::async(std::launch::async, [&] { return fetch_packetstorm(cve); });
  auto ov = std::async(std::launch::async, [&] { return fetch_openvas(cve); });
  // get() in a fixed order; every future is drained before an exception
  // escapes so no task outlives `cve`.
  std::exception_ptr first_error;
  auto take = [&](auto& fut) {
    using T = decltype(fut.get());
    try {
      return std::optional<T>(fut.get());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
      return std::optional<T>();
    }
  };
  auto nvd_r = take(nvd);
  auto ms_r = take(ms);
  auto edb_r = take(edb);
  auto ps_r = take(ps);
  auto ov_r = take(ov);
  if (first_error) std::rethrow_exception(first_error);
  return EvidenceBundle{cve,           std::move(*nvd_r), std::move(*ms_r), std::move(*edb_r),
                        *ps_r,         std::move(*ov_r),  timestamp()};
}

FixtureBackend::FixtureBackend(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  if (!fs::is_directory(root_, ec)) {
    throw Error(ErrorCode::Config, "fixture directory not found: " + root_.string());
  }
}

std::optional<json> FixtureBackend::load(const CveId& cve, Source source) const {
  const fs::path file = root_ / cve.str() / (std::string(to_string(source)) + ".json");
  std::ifstream in(file);
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedResponse, file.string() + ": " + e.what());
  }
}

NvdRecord FixtureBackend::fetch_nvd(const CveId& cve) {
  auto doc = load(cve, Source::Nvd);
  if (!doc) return {cve, false, std::nullopt};
  return nvd_from_json(*doc, cve);
}

std::vector<MetasploitEntry> FixtureBackend::fetch_metasploit(const CveId& cve) {
  auto doc = load(cve, Source::Metasploit);
  return doc ? metasploit_from_json(*doc, cve) : std::vector<MetasploitEntry>{};
}

std::vector<ExploitDbEntry> FixtureBackend::fetch_exploitdb(const CveId& cve) {
  auto doc = load(cve, Source::ExploitDb);
  return doc ? exploitdb_from_json(*doc, cve) : std::vector<ExploitDbEntry>{};
}

PacketStormResult FixtureBackend::fetch_packetstorm(const CveId& cve) {
  auto doc = load(cve, Source::PacketStorm);
  return doc ? packetstorm_from_json(*doc, cve) : PacketStormResult{};
}

std::vector<OpenVasRecord> FixtureBackend::fetch_openvas(const CveId& cve) {
  auto doc = load(cve, Source::OpenVas);
  return doc ? openvas_from_json(*doc, cve) : std::vector<OpenVasRecord>{};
}

namespace {

void write_doc(const fs::path& dir, Source source, const json& doc) {
  fs::create_directories(dir);
  const fs::path file = dir / (std::string(to_string(source)) + ".json");
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + file.string());
  out << doc.dump(2) << '\n';
}

}  // namespace

void write_fixture(const fs::path& root, const EvidenceBundle& b) {
  const fs::path dir = root / b.cve.str();
  if (b.nvd.exists) write_doc(dir, Source::Nvd, to_json(b.nvd));
  if (!b.metasploit.empty()) {
    write_doc(dir, Source::Metasploit, metasploit_to_json(b.cve, b.metasploit));
  }
  if (!b.exploitdb.empty()) {
    write_doc(dir, Source::ExploitDb, exploitdb_to_json(b.cve, b.exploitdb));
  }
  if (b.packetstorm.found) {
    write_doc(dir, Source::PacketStorm, packetstorm_to_json(b.cve, b.packetstorm));
  }
  if (!b.openvas.empty()) write_doc(dir, Source::OpenVas, openvas_to_json(b.cve, b.openvas));
}

}  // namespace vulnprio::vulndb

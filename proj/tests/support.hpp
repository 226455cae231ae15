#pragma once

// Helpers shared by the test binaries.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path source_dir() { return VULNPRIO_SOURCE_DIR; }
inline fs::path data_dir() { return source_dir() / "data"; }
inline fs::path fixtures_dir() { return data_dir() / "fixtures"; }
inline fs::path mapping_dir() { return source_dir() / "tests" / "data" / "mapping"; }

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json(const fs::path& path) { return nlohmann::json::parse(read_text(path)); }

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("vulnprio-test-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Serves GET /<source>/<CVE> from <root>/<CVE>/<source>.json (404 when the
// file is absent), and the NVD record in API 2.0 shape at /nvd2/<CVE>.
// `fail_first` makes every route answer 503 that many times before
// succeeding.
class FixtureServer {
 public:
  explicit FixtureServer(fs::path root, int fail_first = 0)
      : root_(std::move(root)), failures_left_(fail_first) {
    server_.Get(R"(/(nvd|metasploit|exploitdb|packetstorm|openvas)/([^/]+))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  ++requests_;
                  if (inject_failure(res)) return;
                  {
                    std::lock_guard lock(mutex_);
                    last_api_key_ = req.get_header_value("X-Api-Key");
                  }
                  const fs::path file = root_ / req.matches[2].str() / (req.matches[1].str() + ".json");
                  if (!fs::exists(file)) {
                    res.status = 404;
                    return;
                  }
                  res.set_content(read_text(file), "application/json");
                });
    server_.Get(R"(/nvd2/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      if (inject_failure(res)) return;
      const fs::path file = root_ / req.matches[1].str() / "nvd.json";
      if (!fs::exists(file)) {
        res.set_content(R"({"totalResults": 0, "vulnerabilities": []})", "application/json");
        return;
      }
      const auto rec = read_json(file);
      nlohmann::json doc = {
          {"totalResults", 1},
          {"vulnerabilities",
           {{{"cve",
              {{"id", rec["cve"]},
               {"metrics",
                {{"cvssMetricV31",
                  {{{"source", "other@example.org"}, {"type", "Secondary"}, {"cvssData", {{"baseScore", 1.0}}}},
                   {{"source", "nvd@nist.gov"},
                    {"type", "Primary"},
                    {"cvssData", {{"baseScore", rec["base_score"]}}}}}}}}}}}}}};
      res.set_content(doc.dump(), "application/json");
    });
    server_.Get(R"(/status/(\d+)/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      res.status = std::stoi(req.matches[1].str());
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FixtureServer() {
    server_.stop();
    thread_.join();
  }

  int port() const { return port_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_; }
  std::string last_api_key() const {
    std::lock_guard lock(mutex_);
    return last_api_key_;
  }

  // "sources" section pointing every source at this server.
  nlohmann::json sources(bool nvd_api_v2 = false, int retries = 2) const {
    nlohmann::json out;
    for (const char* s : {"nvd", "metasploit", "exploitdb", "packetstorm", "openvas"}) {
      out[s] = {{"base_url", base_url()}, {"path", std::string("/") + s + "/{cve}"},
                {"retries", retries}, {"delay_ms", 0}, {"timeout_ms", 5000}};
    }
    if (nvd_api_v2) {
      out["nvd"]["path"] = "/nvd2/{cve}";
      out["nvd"]["format"] = "nvd_api_v2";
    }
    return out;
  }

 private:
  bool inject_failure(httplib::Response& res) {
    if (failures_left_.fetch_sub(1) > 0) {
      res.status = 503;
      return true;
    }
    return false;
  }

  fs::path root_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
  std::atomic<int> failures_left_;
  std::atomic<int> requests_{0};
  mutable std::mutex mutex_;
  std::string last_api_key_;
};

}  // namespace testsupport

#include "pipeline/run.hpp"

#include <ctime>

namespace vulnprio::pipeline {

namespace {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

}  // namespace

ScoreRun run_scoring(const PipelineConfig& config, const std::vector<std::string>& cves) {
  auto backend = config.make_backend();
  auto run = score_cves(cves, *backend, config.rc_policy, config.workers);
  run.metadata.config_hash = config.hash();
  if (config.backend == BackendMode::Live) run.metadata.generated_at = utc_now();
  return run;
}

}  // namespace vulnprio::pipeline

#pragma once

#include <string>
#include <vector>

#include "pipeline/config.hpp"
#include "pipeline/scored.hpp"

namespace vulnprio::pipeline {

/// Scores `cves` with the backend selected by `config` and stamps the run
/// metadata. Live runs carry a generation time; fixture runs do not, so
/// their output is byte-identical across invocations.
ScoreRun run_scoring(const PipelineConfig& config, const std::vector<std::string>& cves);

}  // namespace vulnprio::pipeline

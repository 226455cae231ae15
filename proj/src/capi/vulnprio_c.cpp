#include "vulnprio/vulnprio.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "bayes/graph_io.hpp"
#include "bayes/inference.hpp"
#include "common/error.hpp"
#include "pipeline/config.hpp"
#include "pipeline/report.hpp"
#include "pipeline/run.hpp"
#include "service/service.hpp"

using nlohmann::json;
using namespace vulnprio;

struct vp_graph {
  bayes::AttackGraph graph;
};

struct vp_scores {
  pipeline::ScoreRun run;
};

namespace {

thread_local std::string g_last_error;

vp_status status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return VP_ERR_INVALID_ARGUMENT;
    case ErrorCode::Parse: return VP_ERR_PARSE;
    case ErrorCode::Io: return VP_ERR_IO;
    case ErrorCode::Config: return VP_ERR_CONFIG;
    case ErrorCode::Validation: return VP_ERR_VALIDATION;
    case ErrorCode::UnknownCve: return VP_ERR_UNKNOWN_CVE;
    case ErrorCode::UnknownNode: return VP_ERR_UNKNOWN_NODE;
    case ErrorCode::MissingScore: return VP_ERR_MISSING_SCORE;
    case ErrorCode::MissingScoreFor: return VP_ERR_MISSING_SCORE_FOR;
    case ErrorCode::RootNode: return VP_ERR_ROOT_NODE;
    case ErrorCode::IncompleteAssignment: return VP_ERR_INCOMPLETE_ASSIGNMENT;
    case ErrorCode::GraphTooLarge: return VP_ERR_GRAPH_TOO_LARGE;
    case ErrorCode::ZeroProbabilityEvidence: return VP_ERR_ZERO_PROBABILITY_EVIDENCE;
    case ErrorCode::Transport: return VP_ERR_TRANSPORT;
    case ErrorCode::MalformedResponse: return VP_ERR_MALFORMED_RESPONSE;
    case ErrorCode::NotFound: return VP_ERR_NOT_FOUND;
  }
  return VP_ERR_INTERNAL;
}

vp_status fail(vp_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
vp_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return VP_OK;
  } catch (const Error& e) {
    return fail(status_for(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(VP_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(VP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(VP_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw Error(ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

scoring::ExploitCodeMaturity to_ecm(vp_ecm v) {
  switch (v) {
    case VP_ECM_NOT_DEFINED: return scoring::ExploitCodeMaturity::NotDefined;
    case VP_ECM_HIGH: return scoring::ExploitCodeMaturity::High;
    case VP_ECM_FUNCTIONAL: return scoring::ExploitCodeMaturity::Functional;
    case VP_ECM_PROOF_OF_CONCEPT: return scoring::ExploitCodeMaturity::ProofOfConcept;
    case VP_ECM_UNPROVEN: return scoring::ExploitCodeMaturity::Unproven;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown exploit code maturity " + std::to_string(v));
}

scoring::RemediationLevel to_rl(vp_rl v) {
  switch (v) {
    case VP_RL_NOT_DEFINED: return scoring::RemediationLevel::NotDefined;
    case VP_RL_UNAVAILABLE: return scoring::RemediationLevel::Unavailable;
    case VP_RL_WORKAROUND: return scoring::RemediationLevel::Workaround;
    case VP_RL_TEMPORARY_FIX: return scoring::RemediationLevel::TemporaryFix;
    case VP_RL_OFFICIAL_FIX: return scoring::RemediationLevel::OfficialFix;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown remediation level " + std::to_string(v));
}

scoring::ReportConfidence to_rc(vp_rc v) {
  switch (v) {
    case VP_RC_NOT_DEFINED: return scoring::ReportConfidence::NotDefined;
    case VP_RC_CONFIRMED: return scoring::ReportConfidence::Confirmed;
    case VP_RC_REASONABLE: return scoring::ReportConfidence::Reasonable;
    case VP_RC_UNKNOWN: return scoring::ReportConfidence::Unknown;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown report confidence " + std::to_string(v));
}

bayes::ScoreVariant to_variant(vp_variant v) {
  if (v == VP_VARIANT_BASE) return bayes::ScoreVariant::Base;
  if (v == VP_VARIANT_TEMPORAL) return bayes::ScoreVariant::Temporal;
  throw Error(ErrorCode::InvalidArgument, "unknown score variant");
}

pipeline::Format to_format(vp_format f) {
  switch (f) {
    case VP_FORMAT_JSON: return pipeline::Format::Json;
    case VP_FORMAT_CSV: return pipeline::Format::Csv;
    case VP_FORMAT_MARKDOWN: return pipeline::Format::Markdown;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown output format");
}

bayes::EvidenceSet to_evidence(const vp_evidence* evidence, size_t count) {
  if (count > 0) require(evidence, "evidence");
  bayes::EvidenceSet out;
  for (size_t i = 0; i < count; ++i) {
    require(evidence[i].node_id, "evidence node_id");
    out[evidence[i].node_id] = evidence[i].state != 0;
  }
  return out;
}

std::map<std::string, scoring::Score> variant_scores(const pipeline::ScoreRun& run,
                                                     bayes::ScoreVariant variant) {
  return variant == bayes::ScoreVariant::Base ? run.base_scores() : run.temporal_scores();
}

pipeline::PipelineConfig make_config(const vp_score_options& options) {
  auto config = options.config_path ? pipeline::PipelineConfig::load(options.config_path)
                                    : pipeline::PipelineConfig{};
  if (options.backend == VP_BACKEND_LIVE) {
    config.backend = pipeline::BackendMode::Live;
  } else if (!options.config_path) {
    config.backend = pipeline::BackendMode::Fixture;
  }
  if (options.fixtures_dir) config.fixtures_dir = options.fixtures_dir;
  if (options.record_dir) config.record_dir = options.record_dir;
  if (options.workers > 0) config.workers = options.workers;
  return config;
}

bayes::QueryResult run_query(const vp_graph* graph, const vp_scores* scores, vp_variant variant,
                             const char* target, const vp_evidence* evidence, size_t count) {
  require(graph, "graph");
  require(target, "target");
  auto ev = to_evidence(evidence, count);
  if (scores == nullptr) {
    return bayes::posterior(bayes::BayesNet::compile(graph->graph), target, ev);
  }
  return pipeline::ScoredModel(graph->graph, scores->run).query(target, ev, to_variant(variant));
}

}  // namespace

extern "C" {

const char* vp_version(void) { return "0.1.0"; }

const char* vp_status_name(vp_status status) {
  switch (status) {
    case VP_OK: return "OK";
    case VP_ERR_INTERNAL: return "Internal";
    case VP_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case VP_ERR_PARSE: return "Parse";
    case VP_ERR_IO: return "Io";
    case VP_ERR_CONFIG: return "Config";
    case VP_ERR_VALIDATION: return "Validation";
    case VP_ERR_UNKNOWN_CVE: return "UnknownCve";
    case VP_ERR_UNKNOWN_NODE: return "UnknownNode";
    case VP_ERR_MISSING_SCORE: return "MissingScore";
    case VP_ERR_MISSING_SCORE_FOR: return "MissingScoreFor";
    case VP_ERR_ROOT_NODE: return "RootNode";
    case VP_ERR_INCOMPLETE_ASSIGNMENT: return "IncompleteAssignment";
    case VP_ERR_GRAPH_TOO_LARGE: return "GraphTooLarge";
    case VP_ERR_ZERO_PROBABILITY_EVIDENCE: return "ZeroProbabilityEvidence";
    case VP_ERR_TRANSPORT: return "TransportError";
    case VP_ERR_MALFORMED_RESPONSE: return "MalformedResponse";
    case VP_ERR_NOT_FOUND: return "NotFound";
  }
  return "Unknown";
}

const char* vp_last_error(void) { return g_last_error.c_str(); }

void vp_string_free(char* str) { std::free(str); }

vp_status vp_ecm_multiplier(vp_ecm level, int* out_hundredths) {
  return guarded([&] {
    require(out_hundredths, "out_hundredths");
    *out_hundredths = scoring::multiplier_hundredths(to_ecm(level));
  });
}

vp_status vp_rl_multiplier(vp_rl level, int* out_hundredths) {
  return guarded([&] {
    require(out_hundredths, "out_hundredths");
    *out_hundredths = scoring::multiplier_hundredths(to_rl(level));
  });
}

vp_status vp_rc_multiplier(vp_rc level, int* out_hundredths) {
  return guarded([&] {
    require(out_hundredths, "out_hundredths");
    *out_hundredths = scoring::multiplier_hundredths(to_rc(level));
  });
}

vp_status vp_temporal_score(int base_tenths, vp_ecm ecm, vp_rl rl, vp_rc rc, int* out_tenths) {
  return guarded([&] {
    require(out_tenths, "out_tenths");
    auto base = scoring::Score::from_tenths(base_tenths);
    *out_tenths = scoring::temporal_score(base, {to_ecm(ecm), to_rl(rl), to_rc(rc)}).tenths();
  });
}

vp_status vp_feasible_assignments(int base_tenths, int target_tenths, char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    auto base = scoring::Score::from_tenths(base_tenths);
    auto target = scoring::Score::from_tenths(target_tenths);
    json arr = json::array();
    for (const auto& m : scoring::feasible_metric_assignments(base, target)) {
      arr.push_back({{"ecm", std::string(scoring::to_string(m.ecm))},
                     {"rl", std::string(scoring::to_string(m.rl))},
                     {"rc", std::string(scoring::to_string(m.rc))},
                     {"vector", m.vector()}});
    }
    *out_json = dup_string(arr.dump());
  });
}

vp_status vp_graph_parse(const char* text, vp_graph** out) {
  return guarded([&] {
    require(text, "json");
    require(out, "out");
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Parse, e.what());
    }
    *out = new vp_graph{bayes::graph_from_json(doc)};
  });
}

vp_status vp_graph_load(const char* path, vp_graph** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new vp_graph{bayes::load_graph(path)};
  });
}

void vp_graph_free(vp_graph* graph) { delete graph; }

vp_status vp_graph_to_json(const vp_graph* graph, char** out_json) {
  return guarded([&] {
    require(graph, "graph");
    require(out_json, "out_json");
    *out_json = dup_string(bayes::graph_to_json(graph->graph).dump(2));
  });
}

vp_status vp_graph_node_count(const vp_graph* graph, size_t* out) {
  return guarded([&] {
    require(graph, "graph");
    require(out, "out");
    *out = graph->graph.nodes.size();
  });
}

vp_status vp_graph_validate(const vp_graph* graph, int* out_valid, char** out_report_json) {
  return guarded([&] {
    require(graph, "graph");
    auto report = bayes::validate(graph->graph);
    if (out_valid) *out_valid = report.ok() ? 1 : 0;
    if (out_report_json) *out_report_json = dup_string(report.to_json().dump(2));
  });
}

vp_status vp_graph_rescore(const vp_graph* graph, const vp_scores* scores, vp_variant variant,
                           vp_graph** out) {
  return guarded([&] {
    require(graph, "graph");
    require(scores, "scores");
    require(out, "out");
    auto rescored = bayes::rescore(graph->graph, variant_scores(scores->run, to_variant(variant)));
    *out = new vp_graph{std::move(rescored)};
  });
}

vp_status vp_graph_query(const vp_graph* graph, const char* target, const vp_evidence* evidence,
                         size_t evidence_count, double* out_probability) {
  return guarded([&] {
    require(out_probability, "out_probability");
    *out_probability =
        run_query(graph, nullptr, VP_VARIANT_BASE, target, evidence, evidence_count).probability;
  });
}

vp_status vp_graph_query_scored(const vp_graph* graph, const vp_scores* scores, vp_variant variant,
                                const char* target, const vp_evidence* evidence,
                                size_t evidence_count, double* out_probability) {
  return guarded([&] {
    require(scores, "scores");
    require(out_probability, "out_probability");
    *out_probability =
        run_query(graph, scores, variant, target, evidence, evidence_count).probability;
  });
}

vp_status vp_graph_query_json(const vp_graph* graph, const vp_scores* scores, vp_variant variant,
                              const char* target, const vp_evidence* evidence,
                              size_t evidence_count, char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    auto result = run_query(graph, scores, variant, target, evidence, evidence_count);
    *out_json = dup_string(result.to_json().dump());
  });
}

vp_status vp_graph_query_enumeration(const vp_graph* graph, const char* target,
                                     const vp_evidence* evidence, size_t evidence_count,
                                     size_t max_nodes, double* out_probability) {
  return guarded([&] {
    require(graph, "graph");
    require(target, "target");
    require(out_probability, "out_probability");
    auto net = bayes::BayesNet::compile(graph->graph);
    *out_probability =
        bayes::posterior_enumeration(net, target, to_evidence(evidence, evidence_count), max_nodes)
            .probability;
  });
}

vp_status vp_score_cves(const vp_score_options* options, const char* const* cves, size_t count,
                        vp_scores** out) {
  return guarded([&] {
    require(options, "options");
    require(out, "out");
    if (count > 0) require(cves, "cves");
    std::vector<std::string> list;
    for (size_t i = 0; i < count; ++i) {
      require(cves[i], "cve");
      list.emplace_back(cves[i]);
    }
    *out = new vp_scores{pipeline::run_scoring(make_config(*options), list)};
  });
}

vp_status vp_score_cve_file(const vp_score_options* options, const char* path, vp_scores** out) {
  return guarded([&] {
    require(options, "options");
    require(path, "path");
    require(out, "out");
    auto config = make_config(*options);
    *out = new vp_scores{pipeline::run_scoring(config, pipeline::read_cve_list(path))};
  });
}

vp_status vp_scores_parse(const char* text, vp_scores** out) {
  return guarded([&] {
    require(text, "json");
    require(out, "out");
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Parse, e.what());
    }
    *out = new vp_scores{pipeline::score_run_from_json(doc)};
  });
}

vp_status vp_scores_load(const char* path, vp_scores** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new vp_scores{pipeline::load_score_run(path)};
  });
}

void vp_scores_free(vp_scores* scores) { delete scores; }

vp_status vp_scores_counts(const vp_scores* scores, size_t* out_scored, size_t* out_skipped) {
  return guarded([&] {
    require(scores, "scores");
    if (out_scored) *out_scored = scores->run.scored.size();
    if (out_skipped) *out_skipped = scores->run.skipped.size();
  });
}

vp_status vp_scores_emit(const vp_scores* scores, vp_format format, char** out) {
  return guarded([&] {
    require(scores, "scores");
    require(out, "out");
    *out = dup_string(pipeline::emit(scores->run, to_format(format)));
  });
}

vp_status vp_report(const vp_graph* graph, const char* scenarios_json, const vp_scores* scores,
                    vp_format format, char** out) {
  return guarded([&] {
    require(graph, "graph");
    require(scenarios_json, "scenarios_json");
    require(scores, "scores");
    require(out, "out");
    json doc;
    try {
      doc = json::parse(scenarios_json);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Parse, e.what());
    }
    auto scenarios = pipeline::scenarios_from_json(doc);
    auto report = pipeline::run_scenarios(graph->graph, scenarios, scores->run);
    *out = dup_string(pipeline::emit(report, to_format(format)));
  });
}

vp_status vp_serve(const vp_serve_options* options) {
  return guarded([&] {
    require(options, "options");
    service::ServiceOptions opts;
    if (options->host) opts.host = options->host;
    opts.port = options->port;
    if (options->cors_origin) opts.cors_origin = options->cors_origin;
    if (options->max_models > 0) opts.max_models = options->max_models;
    service::Server server(opts);
    const int port = server.start();
    std::fprintf(stderr, "vulnprio: serving on http://%s:%d\n", opts.host.c_str(), port);
    server.wait();
  });
}

}  // extern "C"

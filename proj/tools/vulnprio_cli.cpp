// vulnprio command-line front end. Talks to the library only through the C
// interface in vulnprio/vulnprio.h.
//
// Exit codes: 0 success, 1 usage/input/config error, 2 graph validation
// failure, 3 CVEs skipped under --strict.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vulnprio/vulnprio.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitSkipped = 3;

struct Failure {
  int exit_code;
};

void check(vp_status status, const std::string& what) {
  if (status == VP_OK) return;
  std::cerr << "vulnprio: " << what << ": " << vp_status_name(status) << ": " << vp_last_error()
            << '\n';
  throw Failure{status == VP_ERR_VALIDATION ? kExitInvalid : kExitError};
}

// Owning wrappers for the C handles.
struct Text {
  char* p = nullptr;
  ~Text() { vp_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Graph {
  vp_graph* p = nullptr;
  ~Graph() { vp_graph_free(p); }
};

struct Scores {
  vp_scores* p = nullptr;
  ~Scores() { vp_scores_free(p); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "vulnprio: cannot open " << path << '\n';
    throw Failure{kExitError};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out || !(out << text)) {
    std::cerr << "vulnprio: cannot write " << out_path << '\n';
    throw Failure{kExitError};
  }
}

vp_format parse_format(const std::string& name) {
  if (name == "csv") return VP_FORMAT_CSV;
  if (name == "markdown" || name == "md") return VP_FORMAT_MARKDOWN;
  return VP_FORMAT_JSON;
}

// Loads a graph and refuses to continue when it does not validate.
void load_valid_graph(const std::string& path, Graph& graph) {
  check(vp_graph_load(path.c_str(), &graph.p), "loading " + path);
  int valid = 0;
  Text report;
  check(vp_graph_validate(graph.p, &valid, &report.p), "validating " + path);
  if (!valid) {
    std::cerr << "vulnprio: " << path << " is not a valid attack graph\n" << report.str() << '\n';
    throw Failure{kExitInvalid};
  }
}

struct ScoreArgs {
  std::string cve_file;
  std::vector<std::string> cves;
  std::string backend = "fixture";
  std::string fixtures;
  std::string config;
  std::string record;
  std::string out;
  std::string format = "json";
  unsigned workers = 0;
  bool strict = false;
};

int run_score(const ScoreArgs& a) {
  if (a.cve_file.empty() == a.cves.empty()) {
    std::cerr << "vulnprio: score needs either a CVE list file or --cve, not both\n";
    return kExitError;
  }
  vp_score_options options{};
  options.backend = a.backend == "live" ? VP_BACKEND_LIVE : VP_BACKEND_FIXTURE;
  options.fixtures_dir = a.fixtures.empty() ? nullptr : a.fixtures.c_str();
  options.config_path = a.config.empty() ? nullptr : a.config.c_str();
  options.record_dir = a.record.empty() ? nullptr : a.record.c_str();
  options.workers = a.workers;

  Scores scores;
  if (!a.cve_file.empty()) {
    check(vp_score_cve_file(&options, a.cve_file.c_str(), &scores.p), "scoring " + a.cve_file);
  } else {
    std::vector<const char*> ids;
    for (const auto& c : a.cves) ids.push_back(c.c_str());
    check(vp_score_cves(&options, ids.data(), ids.size(), &scores.p), "scoring");
  }
  Text text;
  check(vp_scores_emit(scores.p, parse_format(a.format), &text.p), "rendering scores");
  write_output(text.str(), a.out);

  size_t scored = 0;
  size_t skipped = 0;
  check(vp_scores_counts(scores.p, &scored, &skipped), "counting");
  std::cerr << "vulnprio: scored " << scored << ", skipped " << skipped << '\n';
  return a.strict && skipped > 0 ? kExitSkipped : kExitOk;
}

int run_validate(const std::string& path) {
  Graph graph;
  check(vp_graph_load(path.c_str(), &graph.p), "loading " + path);
  int valid = 0;
  Text report;
  check(vp_graph_validate(graph.p, &valid, &report.p), "validating " + path);
  std::cout << report.str() << '\n';
  return valid ? kExitOk : kExitInvalid;
}

struct QueryArgs {
  std::string graph;
  std::string target;
  std::vector<std::string> evidence;
  std::string scores;
  std::string variant = "temporal";
  bool enumerate = false;
};

int run_query(const QueryArgs& a) {
  std::vector<std::string> ids;
  std::vector<int> states;
  for (const auto& e : a.evidence) {
    const auto eq = e.rfind('=');
    const std::string value = eq == std::string::npos ? "" : e.substr(eq + 1);
    if (eq == std::string::npos || (value != "true" && value != "false")) {
      std::cerr << "vulnprio: evidence must look like NODE=true or NODE=false, got '" << e << "'\n";
      return kExitError;
    }
    ids.push_back(e.substr(0, eq));
    states.push_back(value == "true");
  }
  std::vector<vp_evidence> evidence;
  for (std::size_t i = 0; i < ids.size(); ++i) evidence.push_back({ids[i].c_str(), states[i]});

  Graph graph;
  load_valid_graph(a.graph, graph);
  Scores scores;
  if (!a.scores.empty()) check(vp_scores_load(a.scores.c_str(), &scores.p), "loading " + a.scores);
  const vp_variant variant = a.variant == "base" ? VP_VARIANT_BASE : VP_VARIANT_TEMPORAL;

  if (a.enumerate) {
    Graph rescored;
    const vp_graph* target_graph = graph.p;
    if (scores.p) {
      check(vp_graph_rescore(graph.p, scores.p, variant, &rescored.p), "rescoring");
      target_graph = rescored.p;
    }
    double p = 0.0;
    check(vp_graph_query_enumeration(target_graph, a.target.c_str(), evidence.data(),
                                     evidence.size(), 20, &p),
          "enumeration query");
    std::printf("%.12f\n", p);
    return kExitOk;
  }
  Text result;
  check(vp_graph_query_json(graph.p, scores.p, variant, a.target.c_str(), evidence.data(),
                            evidence.size(), &result.p),
        "query");
  std::cout << result.str() << '\n';
  return kExitOk;
}

struct ReportArgs {
  std::string graph;
  std::string scenarios;
  std::string scores;
  std::string format = "markdown";
  std::string out;
};

int run_report(const ReportArgs& a) {
  Graph graph;
  load_valid_graph(a.graph, graph);
  Scores scores;
  check(vp_scores_load(a.scores.c_str(), &scores.p), "loading " + a.scores);
  const std::string scenarios = read_file(a.scenarios);
  Text text;
  check(vp_report(graph.p, scenarios.c_str(), scores.p, parse_format(a.format), &text.p),
        "building report");
  write_output(text.str(), a.out);
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  std::size_t max_models = 16;
};

int run_serve(const ServeArgs& a) {
  vp_serve_options options{a.host.c_str(), a.port, a.cors_origin.c_str(), a.max_models};
  check(vp_serve(&options), "serve");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal CVSS scoring and attack-graph inference"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(vp_version()));
  const std::vector<std::string> formats{"json", "csv", "markdown", "md"};

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Compute temporal scores for a list of CVEs");
  score_cmd->add_option("cve_file", score.cve_file, "File with one CVE id per line");
  score_cmd->add_option("--cve", score.cves, "CVE id (repeatable)");
  score_cmd->add_option("--backend", score.backend, "Evidence backend")
      ->check(CLI::IsMember({"fixture", "live"}));
  score_cmd->add_option("--fixtures", score.fixtures, "Fixture directory");
  score_cmd->add_option("--config", score.config, "Pipeline configuration (JSON)")
      ->check(CLI::ExistingFile);
  score_cmd->add_option("--record", score.record, "Record live responses as fixtures here");
  score_cmd->add_option("--workers", score.workers, "Parallel lookups");
  score_cmd->add_option("-o,--out", score.out, "Output file (default stdout)");
  score_cmd->add_option("-f,--format", score.format, "json, csv or markdown")
      ->check(CLI::IsMember(formats));
  score_cmd->add_flag("--strict", score.strict, "Exit 3 when any CVE is skipped");

  auto* bag_cmd = app.add_subcommand("bag", "Attack graph operations");
  bag_cmd->require_subcommand(1);
  std::string validate_path;
  auto* validate_cmd = bag_cmd->add_subcommand("validate", "Check an attack graph file");
  validate_cmd->add_option("graph", validate_path, "Graph JSON")->required();

  QueryArgs query;
  auto* query_cmd = bag_cmd->add_subcommand("query", "Posterior probability of a node");
  query_cmd->add_option("graph", query.graph, "Graph JSON")->required();
  query_cmd->add_option("-t,--target", query.target, "Target node id")->required();
  query_cmd->add_option("-e,--evidence", query.evidence, "NODE=true|false (repeatable)");
  query_cmd->add_option("--scores", query.scores, "Score run JSON used to rescore the graph");
  query_cmd->add_option("--variant", query.variant, "base or temporal (with --scores)")
      ->check(CLI::IsMember({"base", "temporal"}));
  query_cmd->add_flag("--enumerate", query.enumerate, "Brute-force enumeration (small graphs)");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Base vs temporal scenario report");
  report_cmd->add_option("graph", report.graph, "Graph JSON")->required();
  report_cmd->add_option("scenarios", report.scenarios, "Scenario list JSON")->required();
  report_cmd->add_option("scores", report.scores, "Score run JSON")->required();
  report_cmd->add_option("-f,--format", report.format, "json, csv or markdown")
      ->check(CLI::IsMember(formats));
  report_cmd->add_option("-o,--out", report.out, "Output file (default stdout)");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP query service");
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--port", serve.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--cors-origin", serve.cors_origin, "Allowed origin; empty disables CORS");
  serve_cmd->add_option("--max-models", serve.max_models, "Models kept in memory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (score_cmd->parsed()) return run_score(score);
    if (validate_cmd->parsed()) return run_validate(validate_path);
    if (query_cmd->parsed()) return run_query(query);
    if (report_cmd->parsed()) return run_report(report);
    if (serve_cmd->parsed()) return run_serve(serve);
  } catch (const Failure& f) {
    return f.exit_code;
  }
  return kExitError;
}

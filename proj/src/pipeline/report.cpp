#include "pipeline/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "common/error.hpp"

namespace vulnprio::pipeline {

using bayes::ScoreVariant;
using nlohmann::json;

ScoredModel::ScoredModel(bayes::AttackGraph graph, ScoreRun scores)
    : graph_(std::move(graph)),
      scores_(std::move(scores)),
      base_(bayes::BayesNet::compile(bayes::rescore(graph_, scores_.base_scores()))),
      temporal_(bayes::BayesNet::compile(bayes::rescore(graph_, scores_.temporal_scores()))) {}

const bayes::BayesNet& ScoredModel::net(ScoreVariant variant) const noexcept {
  return variant == ScoreVariant::Temporal ? temporal_ : base_;
}

bayes::QueryResult ScoredModel::query(const std::string& target, const bayes::EvidenceSet& evidence,
                                      ScoreVariant variant) const {
  auto result = bayes::posterior(net(variant), target, evidence);
  result.score_variant = variant;
  return result;
}

std::vector<Scenario> scenarios_from_json(const json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::Parse, "scenarios: document must be a JSON list");
  std::vector<Scenario> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& j = doc[i];
    const std::string where = "scenarios[" + std::to_string(i) + "]";
    try {
      Scenario s;
      s.name = j.at("name").get<std::string>();
      s.evidence = bayes::evidence_from_json(j.value("evidence", json::object()));
      s.targets = j.at("targets").get<std::vector<std::string>>();
      if (s.targets.empty()) throw Error(ErrorCode::Parse, where + ": no targets");
      if (!names.insert(s.name).second) {
        throw Error(ErrorCode::Parse, where + ": duplicate scenario name '" + s.name + "'");
      }
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, where + ": " + e.what());
    }
  }
  return out;
}

json scenarios_to_json(const std::vector<Scenario>& scenarios) {
  json out = json::array();
  for (const auto& s : scenarios) {
    out.push_back({{"name", s.name},
                   {"evidence", bayes::evidence_to_json(s.evidence)},
                   {"targets", s.targets}});
  }
  return out;
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scenarios file " + path.string());
  try {
    return scenarios_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

std::optional<double> ScenarioOutcome::delta() const {
  if (!base || !temporal) return std::nullopt;
  return *base - *temporal;
}

std::optional<double> ScenarioOutcome::relative_delta() const {
  auto d = delta();
  if (!d || *base == 0.0) return std::nullopt;
  return *d / *base;
}

bool ScenarioOutcome::monotonicity_violation() const {
  auto d = delta();
  return d && *d < -1e-9;
}

Report run_scenarios(const ScoredModel& model, const std::vector<Scenario>& scenarios) {
  // Scenarios are independent read-only queries; evaluate them in parallel
  // and assemble in input order.
  std::vector<std::future<std::vector<ScenarioOutcome>>> jobs;
  for (const auto& s : scenarios) {
    jobs.push_back(std::async(std::launch::async, [&model, &s] {
      std::vector<ScenarioOutcome> rows;
      for (const auto& target : s.targets) {
        ScenarioOutcome row{s.name, target, s.evidence, std::nullopt, std::nullopt, std::nullopt, {}};
        try {
          row.base = model.query(target, s.evidence, ScoreVariant::Base).probability;
          row.temporal = model.query(target, s.evidence, ScoreVariant::Temporal).probability;
        } catch (const Error& e) {
          row.base.reset();
          row.temporal.reset();
          row.error = std::string(to_string(e.code()));
          row.error_detail = e.what();
        }
        rows.push_back(std::move(row));
      }
      return rows;
    }));
  }
  Report report;
  report.scored = model.scores().scored;
  sort_by_priority(report.scored);
  report.skipped = model.scores().skipped;
  report.metadata = model.scores().metadata;
  for (auto& job : jobs) {
    for (auto& row : job.get()) report.outcomes.push_back(std::move(row));
  }
  return report;
}

Report run_scenarios(const bayes::AttackGraph& graph, const std::vector<Scenario>& scenarios,
                     const ScoreRun& scored) {
  return run_scenarios(ScoredModel(graph, scored), scenarios);
}

std::optional<Format> parse_format(std::string_view text) noexcept {
  if (text == "json") return Format::Json;
  if (text == "csv") return Format::Csv;
  if (text == "markdown" || text == "md") return Format::Markdown;
  return std::nullopt;
}

namespace {

std::string fixed3(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", p);
  return buf;
}

std::string opt3(const std::optional<double>& p) { return p ? fixed3(*p) : ""; }

std::string evidence_text(const bayes::EvidenceSet& evidence) {
  std::string out;
  for (const auto& [id, state] : evidence) {
    out += (out.empty() ? "" : " ") + id + "=" + (state ? "true" : "false");
  }
  return out;
}

// RFC 4180 quoting for fields carrying separators.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

json metadata_json(const RunMetadata& m) {
  json out = {{"mode", m.mode}, {"config_hash", m.config_hash}};
  out["generated_at"] = m.generated_at ? json(*m.generated_at) : json(nullptr);
  return out;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void scored_csv(std::ostringstream& out, const std::vector<ScoredVulnerability>& scored) {
  out << "rank,cve,base_score,vector,temporal_score,ecm_source,rl_source,rc_source\n";
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto& v = scored[i];
    out << i + 1 << ',' << v.cve.str() << ',' << v.base.to_string() << ',' << v.metrics.vector()
        << ',' << v.temporal.to_string() << ',' << csv_field(v.provenance.ecm) << ','
        << csv_field(v.provenance.rl) << ',' << csv_field(v.provenance.rc) << '\n';
  }
}

void scored_markdown(std::ostringstream& out, const std::vector<ScoredVulnerability>& scored,
                     const std::vector<SkippedCve>& skipped) {
  out << "| Rank | CVE | Base | Vector | Temporal | ECM source | RL source | RC source |\n"
      << "|---:|---|---:|---|---:|---|---|---|\n";
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto& v = scored[i];
    out << "| " << i + 1 << " | " << v.cve.str() << " | " << v.base.to_string() << " | "
        << v.metrics.vector() << " | " << v.temporal.to_string() << " | "
        << md_cell(v.provenance.ecm) << " | " << md_cell(v.provenance.rl) << " | "
        << md_cell(v.provenance.rc) << " |\n";
  }
  if (std::any_of(scored.begin(), scored.end(), [](const auto& v) { return v.provenance.rc == "default"; })) {
    out << "\nRC source `default`: Confirmed when NVD lists the CVE, Unknown otherwise.\n";
  }
  if (!skipped.empty()) {
    out << "\nSkipped:\n\n";
    for (const auto& s : skipped) {
      out << "- " << md_cell(s.cve) << ": " << s.reason << " (" << md_cell(s.detail) << ")\n";
    }
  }
}

}  // namespace

json report_to_json(const Report& report) {
  json scored = json::array();
  for (const auto& v : report.scored) scored.push_back(scored_to_json(v));
  json skipped = json::array();
  for (const auto& s : report.skipped) {
    skipped.push_back({{"cve", s.cve}, {"reason", s.reason}, {"detail", s.detail}});
  }
  json outcomes = json::array();
  for (const auto& o : report.outcomes) {
    json row = {{"scenario", o.scenario},
                {"target", o.target},
                {"evidence", bayes::evidence_to_json(o.evidence)},
                {"base", opt_json(o.base)},
                {"temporal", opt_json(o.temporal)},
                {"delta", opt_json(o.delta())},
                {"relative_delta", opt_json(o.relative_delta())},
                {"monotonicity_violation", o.monotonicity_violation()}};
    row["error"] = o.error ? json(*o.error) : json(nullptr);
    if (o.error) row["error_detail"] = o.error_detail;
    outcomes.push_back(std::move(row));
  }
  return {{"metadata", metadata_json(report.metadata)},
          {"scored", std::move(scored)},
          {"skipped", std::move(skipped)},
          {"scenarios", std::move(outcomes)}};
}

std::string emit(const Report& report, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::Json:
      out << report_to_json(report).dump(2) << '\n';
      break;
    case Format::Csv:
      scored_csv(out, report.scored);
      out << '\n'
          << "scenario,target,evidence,p_base,p_temporal,delta,relative_delta,error\n";
      for (const auto& o : report.outcomes) {
        out << csv_field(o.scenario) << ',' << csv_field(o.target) << ','
            << csv_field(evidence_text(o.evidence)) << ',' << opt3(o.base) << ','
            << opt3(o.temporal) << ',' << opt3(o.delta()) << ',' << opt3(o.relative_delta())
            << ',' << o.error.value_or("") << '\n';
      }
      break;
    case Format::Markdown:
      out << "# Vulnerability prioritization report\n\n"
          << "Mode: " << report.metadata.mode << "  \n"
          << "Config hash: `" << report.metadata.config_hash << "`  \n"
          << "Generated: " << report.metadata.generated_at.value_or("n/a") << "\n\n"
          << "## Temporal scores\n\n";
      scored_markdown(out, report.scored, report.skipped);
      out << "\n## Scenarios\n\n"
          << "| Scenario | Target | Evidence | P (base) | P (temporal) | Delta | Relative |\n"
          << "|---|---|---|---:|---:|---:|---:|\n";
      for (const auto& o : report.outcomes) {
        out << "| " << md_cell(o.scenario) << " | " << md_cell(o.target) << " | "
            << md_cell(evidence_text(o.evidence)) << " | ";
        if (o.error) {
          out << o.error.value() << " | | | |\n";
        } else {
          out << fixed3(*o.base) << " | " << fixed3(*o.temporal) << " | " << opt3(o.delta())
              << " | " << opt3(o.relative_delta()) << " |\n";
        }
      }
      for (const auto& o : report.outcomes) {
        if (o.monotonicity_violation()) {
          out << "\nWarning: " << md_cell(o.scenario) << " / " << md_cell(o.target)
              << " has a temporal posterior above its base posterior.\n";
        }
      }
      break;
  }
  return out.str();
}

std::string emit(const ScoreRun& run, Format format) {
  std::ostringstream out;
  switch (format) {
    case Format::Json:
      out << score_run_to_json(run).dump(2) << '\n';
      break;
    case Format::Csv:
      scored_csv(out, run.scored);
      break;
    case Format::Markdown:
      out << "# Temporal scores\n\n";
      scored_markdown(out, run.scored, run.skipped);
      break;
  }
  return out.str();
}

}  // namespace vulnprio::pipeline

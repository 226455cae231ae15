#include "pipeline/scored.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <thread>
#include <variant>

#include "common/error.hpp"

namespace vulnprio::pipeline {

using nlohmann::json;

std::map<std::string, scoring::Score> ScoreRun::base_scores() const {
  std::map<std::string, scoring::Score> out;
  for (const auto& v : scored) out.emplace(v.cve.str(), v.base);
  return out;
}

std::map<std::string, scoring::Score> ScoreRun::temporal_scores() const {
  std::map<std::string, scoring::Score> out;
  for (const auto& v : scored) out.emplace(v.cve.str(), v.temporal);
  return out;
}

const ScoredVulnerability* ScoreRun::find(const std::string& cve) const {
  for (const auto& v : scored) {
    if (v.cve.str() == cve) return &v;
  }
  return nullptr;
}

void sort_by_priority(std::vector<ScoredVulnerability>& scored) {
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.temporal != b.temporal) return a.temporal > b.temporal;
    return a.cve < b.cve;
  });
}

ScoredVulnerability score_bundle(const vulndb::EvidenceBundle& bundle,
                                 const vulndb::RcPolicy& rc_policy) {
  auto assembled = vulndb::assemble_metrics(bundle, rc_policy);
  return {bundle.cve, assembled.base, assembled.metrics,
          scoring::temporal_score(assembled.base, assembled.metrics), assembled.provenance};
}

ScoreRun score_cves(const std::vector<std::string>& cves, vulndb::EvidenceBackend& backend,
                    const vulndb::RcPolicy& rc_policy, unsigned workers) {
  using Outcome = std::variant<std::monostate, ScoredVulnerability, SkippedCve>;
  std::vector<Outcome> outcomes(cves.size());

  // Syntax and duplicate checks happen up front, in input order.
  std::vector<std::size_t> pending;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < cves.size(); ++i) {
    auto id = vulndb::CveId::try_parse(cves[i]);
    if (!id) {
      outcomes[i] = SkippedCve{cves[i], "InvalidCveId", "not of the form CVE-YYYY-NNNN"};
    } else if (!seen.insert(id->str()).second) {
      outcomes[i] = SkippedCve{cves[i], "DuplicateCve", id->str() + " listed more than once"};
    } else {
      pending.push_back(i);
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < pending.size(); k = next++) {
      const std::size_t i = pending[k];
      const auto id = vulndb::CveId::parse(cves[i]);
      try {
        outcomes[i] = score_bundle(backend.fetch_bundle(id), rc_policy);
      } catch (const Error& e) {
        outcomes[i] = SkippedCve{cves[i], std::string(to_string(e.code())), e.what()};
      } catch (const std::exception& e) {
        outcomes[i] = SkippedCve{cves[i], "InternalError", e.what()};
      }
    }
  };
  const unsigned pool = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(pending.size())));
  std::vector<std::thread> threads;
  for (unsigned w = 1; w < pool; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  ScoreRun run;
  run.metadata.mode = std::string(backend.mode());
  for (auto& o : outcomes) {
    if (auto* v = std::get_if<ScoredVulnerability>(&o)) run.scored.push_back(std::move(*v));
    if (auto* s = std::get_if<SkippedCve>(&o)) run.skipped.push_back(std::move(*s));
  }
  sort_by_priority(run.scored);
  return run;
}

json scored_to_json(const ScoredVulnerability& v) {
  return {{"cve", v.cve.str()},
          {"base_score", v.base.value()},
          {"temporal_score", v.temporal.value()},
          {"metrics",
           {{"ecm", std::string(scoring::to_string(v.metrics.ecm))},
            {"rl", std::string(scoring::to_string(v.metrics.rl))},
            {"rc", std::string(scoring::to_string(v.metrics.rc))}}},
          {"vector", v.metrics.vector()},
          {"provenance",
           {{"ecm", v.provenance.ecm}, {"rl", v.provenance.rl}, {"rc", v.provenance.rc}}}};
}

json score_run_to_json(const ScoreRun& run) {
  json scored = json::array();
  for (const auto& v : run.scored) scored.push_back(scored_to_json(v));
  json skipped = json::array();
  for (const auto& s : run.skipped) {
    skipped.push_back({{"cve", s.cve}, {"reason", s.reason}, {"detail", s.detail}});
  }
  json meta = {{"mode", run.metadata.mode}, {"config_hash", run.metadata.config_hash}};
  meta["generated_at"] = run.metadata.generated_at ? json(*run.metadata.generated_at) : json(nullptr);
  return {{"metadata", std::move(meta)}, {"scored", std::move(scored)}, {"skipped", std::move(skipped)}};
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::Parse, "scores: " + what); }

ScoredVulnerability scored_from_json(const json& j) {
  try {
    const auto cve = vulndb::CveId::parse(j.at("cve").get<std::string>());
    const auto base = scoring::Score::from_decimal(j.at("base_score").get<double>());
    const auto temporal = scoring::Score::from_decimal(j.at("temporal_score").get<double>());
    const auto& m = j.at("metrics");
    auto ecm = scoring::parse_ecm(m.at("ecm").get<std::string>());
    auto rl = scoring::parse_rl(m.at("rl").get<std::string>());
    auto rc = scoring::parse_rc(m.at("rc").get<std::string>());
    if (!ecm || !rl || !rc) bad(cve.str() + ": unknown metric level");
    const scoring::TemporalMetrics metrics{*ecm, *rl, *rc};
    if (scoring::temporal_score(base, metrics) != temporal) {
      bad(cve.str() + ": temporal_score does not match base_score and metrics");
    }
    vulndb::MetricProvenance prov;
    if (auto p = j.find("provenance"); p != j.end()) {
      prov = {p->value("ecm", std::string{}), p->value("rl", std::string{}),
              p->value("rc", std::string{})};
    }
    return {cve, base, metrics, temporal, prov};
  } catch (const json::exception& e) {
    bad(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw;
    bad(e.what());
  }
}

}  // namespace

ScoreRun score_run_from_json(const json& doc) {
  if (!doc.is_object()) bad("document is not an object");
  ScoreRun run;
  auto scored = doc.find("scored");
  if (scored == doc.end() || !scored->is_array()) bad("missing 'scored' array");
  std::set<std::string> seen;
  for (const auto& j : *scored) {
    auto v = scored_from_json(j);
    if (!seen.insert(v.cve.str()).second) bad(v.cve.str() + " listed twice");
    run.scored.push_back(std::move(v));
  }
  if (auto skipped = doc.find("skipped"); skipped != doc.end() && skipped->is_array()) {
    for (const auto& s : *skipped) {
      run.skipped.push_back({s.value("cve", std::string{}), s.value("reason", std::string{}),
                             s.value("detail", std::string{})});
    }
  }
  if (auto meta = doc.find("metadata"); meta != doc.end() && meta->is_object()) {
    run.metadata.mode = meta->value("mode", std::string("fixture"));
    run.metadata.config_hash = meta->value("config_hash", std::string{});
    if (auto g = meta->find("generated_at"); g != meta->end() && g->is_string()) {
      run.metadata.generated_at = g->get<std::string>();
    }
  }
  sort_by_priority(run.scored);
  return run;
}

ScoreRun load_score_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scores file " + path.string());
  try {
    return score_run_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

std::vector<std::string> read_cve_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open CVE list " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(first, last - first + 1));
  }
  return out;
}

}  // namespace vulnprio::pipeline

#include "vulndb/mapping.hpp"

#include "common/error.hpp"

namespace vulnprio::vulndb {

namespace {

std::optional<ExploitCodeMaturity> join(std::optional<ExploitCodeMaturity> a,
                                        std::optional<ExploitCodeMaturity> b) {
  if (!a) return b;
  if (!b) return a;
  return scoring::severity_rank(*a) >= scoring::severity_rank(*b) ? a : b;
}

}  // namespace

ExploitCodeMaturity ecm_for_rank(MetasploitRank rank) noexcept {
  switch (rank) {
    case MetasploitRank::Excellent:
    case MetasploitRank::Great:
      return ExploitCodeMaturity::High;
    case MetasploitRank::Good:
    case MetasploitRank::Normal:
      return ExploitCodeMaturity::Functional;
    default:
      return ExploitCodeMaturity::ProofOfConcept;
  }
}

std::optional<ExploitCodeMaturity> ecm_from_metasploit(std::span<const MetasploitEntry> entries) {
  std::optional<ExploitCodeMaturity> out;
  for (const auto& e : entries) out = join(out, ecm_for_rank(e.rank));
  return out;
}

std::optional<ExploitCodeMaturity> ecm_from_exploitdb(std::span<const ExploitDbEntry> entries) {
  std::optional<ExploitCodeMaturity> out;
  for (const auto& e : entries) {
    out = join(out, e.verified ? ExploitCodeMaturity::Functional
                               : ExploitCodeMaturity::ProofOfConcept);
  }
  return out;
}

std::optional<ExploitCodeMaturity> ecm_from_packetstorm(const PacketStormResult& result) {
  if (result.found) return ExploitCodeMaturity::ProofOfConcept;
  return std::nullopt;
}

ExploitCodeMaturity aggregate_ecm(std::optional<ExploitCodeMaturity> metasploit,
                                  std::optional<ExploitCodeMaturity> exploitdb,
                                  std::optional<ExploitCodeMaturity> packetstorm) {
  return join(join(metasploit, exploitdb), packetstorm)
      .value_or(ExploitCodeMaturity::Unproven);
}

RemediationLevel rl_for_solution(SolutionType type) noexcept {
  switch (type) {
    case SolutionType::NoneAvailable:
    case SolutionType::WillNotFix:
      return RemediationLevel::Unavailable;
    // The OpenVAS and CVSS vocabularies are shifted by one step here.
    case SolutionType::Workaround:
      return RemediationLevel::TemporaryFix;
    case SolutionType::Mitigation:
      return RemediationLevel::Workaround;
    case SolutionType::VendorFix:
      return RemediationLevel::OfficialFix;
  }
  return RemediationLevel::Unavailable;
}

RemediationLevel rl_from_openvas(std::span<const OpenVasRecord> records) {
  std::optional<RemediationLevel> out;
  for (const auto& r : records) {
    auto level = rl_for_solution(r.solution_type);
    if (!out || scoring::severity_rank(level) < scoring::severity_rank(*out)) out = level;
  }
  return out.value_or(RemediationLevel::NotDefined);
}

ReportConfidence derive_rc(const NvdRecord& nvd, const RcPolicy& policy) {
  if (auto it = policy.overrides.find(nvd.cve); it != policy.overrides.end()) {
    return it->second;
  }
  return nvd.exists ? ReportConfidence::Confirmed : ReportConfidence::Unknown;
}

AssembledMetrics assemble_metrics(const EvidenceBundle& bundle, const RcPolicy& policy) {
  if (!bundle.nvd.exists || !bundle.nvd.base_score) {
    throw Error(ErrorCode::UnknownCve, bundle.cve.str() + " is not known to NVD");
  }
  const auto ms = ecm_from_metasploit(bundle.metasploit);
  const auto edb = ecm_from_exploitdb(bundle.exploitdb);
  const auto ps = ecm_from_packetstorm(bundle.packetstorm);
  const auto ecm = aggregate_ecm(ms, edb, ps);

  AssembledMetrics out{*bundle.nvd.base_score,
                       {ecm, rl_from_openvas(bundle.openvas), derive_rc(bundle.nvd, policy)},
                       {}};

  std::string sources;
  auto credit = [&](const std::optional<ExploitCodeMaturity>& level, const char* name) {
    if (level && *level == ecm) {
      if (!sources.empty()) sources += '+';
      sources += name;
    }
  };
  credit(ms, "metasploit");
  credit(edb, "exploitdb");
  credit(ps, "packetstorm");
  out.provenance.ecm = sources.empty() ? "default" : sources;
  out.provenance.rl = bundle.openvas.empty() ? "default" : "openvas";
  out.provenance.rc = policy.overrides.contains(bundle.cve) ? "config" : "default";
  return out;
}

}  // namespace vulnprio::vulndb

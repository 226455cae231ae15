#include "scoring/cvss_temporal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"

namespace vulnprio::scoring {

int multiplier_hundredths(ExploitCodeMaturity level) noexcept {
  switch (level) {
    case ExploitCodeMaturity::NotDefined: return 100;
    case ExploitCodeMaturity::High: return 100;
    case ExploitCodeMaturity::Functional: return 97;
    case ExploitCodeMaturity::ProofOfConcept: return 94;
    case ExploitCodeMaturity::Unproven: return 91;
  }
  return 100;
}

int multiplier_hundredths(RemediationLevel level) noexcept {
  switch (level) {
    case RemediationLevel::NotDefined: return 100;
    case RemediationLevel::Unavailable: return 100;
    case RemediationLevel::Workaround: return 97;
    case RemediationLevel::TemporaryFix: return 96;
    case RemediationLevel::OfficialFix: return 95;
  }
  return 100;
}

int multiplier_hundredths(ReportConfidence level) noexcept {
  switch (level) {
    case ReportConfidence::NotDefined: return 100;
    case ReportConfidence::Confirmed: return 100;
    case ReportConfidence::Reasonable: return 96;
    case ReportConfidence::Unknown: return 92;
  }
  return 100;
}

int severity_rank(ExploitCodeMaturity level) noexcept {
  switch (level) {
    case ExploitCodeMaturity::Unproven: return 0;
    case ExploitCodeMaturity::ProofOfConcept: return 1;
    case ExploitCodeMaturity::Functional: return 2;
    case ExploitCodeMaturity::High: return 3;
    case ExploitCodeMaturity::NotDefined: return 4;
  }
  return 4;
}

int severity_rank(RemediationLevel level) noexcept {
  switch (level) {
    case RemediationLevel::OfficialFix: return 0;
    case RemediationLevel::TemporaryFix: return 1;
    case RemediationLevel::Workaround: return 2;
    case RemediationLevel::Unavailable: return 3;
    case RemediationLevel::NotDefined: return 4;
  }
  return 4;
}

int severity_rank(ReportConfidence level) noexcept {
  switch (level) {
    case ReportConfidence::Unknown: return 0;
    case ReportConfidence::Reasonable: return 1;
    case ReportConfidence::Confirmed: return 2;
    case ReportConfidence::NotDefined: return 3;
  }
  return 3;
}

std::string_view to_string(ExploitCodeMaturity level) noexcept {
  switch (level) {
    case ExploitCodeMaturity::NotDefined: return "NotDefined";
    case ExploitCodeMaturity::High: return "High";
    case ExploitCodeMaturity::Functional: return "Functional";
    case ExploitCodeMaturity::ProofOfConcept: return "ProofOfConcept";
    case ExploitCodeMaturity::Unproven: return "Unproven";
  }
  return "NotDefined";
}

std::string_view to_string(RemediationLevel level) noexcept {
  switch (level) {
    case RemediationLevel::NotDefined: return "NotDefined";
    case RemediationLevel::Unavailable: return "Unavailable";
    case RemediationLevel::Workaround: return "Workaround";
    case RemediationLevel::TemporaryFix: return "TemporaryFix";
    case RemediationLevel::OfficialFix: return "OfficialFix";
  }
  return "NotDefined";
}

std::string_view to_string(ReportConfidence level) noexcept {
  switch (level) {
    case ReportConfidence::NotDefined: return "NotDefined";
    case ReportConfidence::Confirmed: return "Confirmed";
    case ReportConfidence::Reasonable: return "Reasonable";
    case ReportConfidence::Unknown: return "Unknown";
  }
  return "NotDefined";
}

char vector_letter(ExploitCodeMaturity level) noexcept {
  switch (level) {
    case ExploitCodeMaturity::NotDefined: return 'X';
    case ExploitCodeMaturity::High: return 'H';
    case ExploitCodeMaturity::Functional: return 'F';
    case ExploitCodeMaturity::ProofOfConcept: return 'P';
    case ExploitCodeMaturity::Unproven: return 'U';
  }
  return 'X';
}

char vector_letter(RemediationLevel level) noexcept {
  switch (level) {
    case RemediationLevel::NotDefined: return 'X';
    case RemediationLevel::Unavailable: return 'U';
    case RemediationLevel::Workaround: return 'W';
    case RemediationLevel::TemporaryFix: return 'T';
    case RemediationLevel::OfficialFix: return 'O';
  }
  return 'X';
}

char vector_letter(ReportConfidence level) noexcept {
  switch (level) {
    case ReportConfidence::NotDefined: return 'X';
    case ReportConfidence::Confirmed: return 'C';
    case ReportConfidence::Reasonable: return 'R';
    case ReportConfidence::Unknown: return 'U';
  }
  return 'X';
}

namespace {

template <class Level, std::size_t N>
std::optional<Level> parse_level(const std::array<Level, N>& all,
                                 std::string_view name) {
  for (Level level : all) {
    if (to_string(level) == name) return level;
    if (name.size() == 1 && vector_letter(level) == name[0]) return level;
  }
  return std::nullopt;
}

}  // namespace

std::optional<ExploitCodeMaturity> parse_ecm(std::string_view name) {
  return parse_level(kAllEcm, name);
}
std::optional<RemediationLevel> parse_rl(std::string_view name) {
  return parse_level(kAllRl, name);
}
std::optional<ReportConfidence> parse_rc(std::string_view name) {
  return parse_level(kAllRc, name);
}

Score Score::from_tenths(int tenths) {
  if (tenths < 0 || tenths > kMaxTenths) {
    throw Error(ErrorCode::InvalidArgument,
                "score out of range [0.0, 10.0]: " + std::to_string(tenths / 10.0));
  }
  return Score(tenths);
}

Score Score::from_decimal(double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::InvalidArgument, "score is not a finite number");
  }
  const double scaled = value * 10.0;
  const double nearest = std::round(scaled);
  // Anything farther than float noise from a tenth has a second decimal.
  if (std::fabs(scaled - nearest) > 1e-6) {
    throw Error(ErrorCode::InvalidArgument,
                "score must have at most one decimal digit: " + std::to_string(value));
  }
  return from_tenths(static_cast<int>(nearest));
}

Score Score::parse(std::string_view text) {
  int whole = 0;
  int frac = 0;
  std::size_t i = 0;
  bool digits = false;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
    whole = whole * 10 + (text[i] - '0');
    if (whole > 10) break;
    digits = true;
    ++i;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    if (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      frac = text[i] - '0';
      ++i;
    } else {
      digits = false;
    }
  }
  if (!digits || i != text.size()) {
    throw Error(ErrorCode::InvalidArgument,
                "not a one-decimal score: '" + std::string(text) + "'");
  }
  return from_tenths(whole * 10 + frac);
}

std::string Score::to_string() const {
  return std::to_string(tenths_ / 10) + "." + std::to_string(tenths_ % 10);
}

std::int64_t TemporalMetrics::product_millionths() const noexcept {
  return std::int64_t{multiplier_hundredths(ecm)} * multiplier_hundredths(rl) *
         multiplier_hundredths(rc);
}

std::string TemporalMetrics::vector() const {
  std::string out = "E:";
  out += vector_letter(ecm);
  out += "/RL:";
  out += vector_letter(rl);
  out += "/RC:";
  out += vector_letter(rc);
  return out;
}

std::optional<TemporalMetrics> parse_vector(std::string_view vector) {
  if (vector.size() != 13 || vector.substr(0, 2) != "E:" ||
      vector.substr(3, 4) != "/RL:" || vector.substr(8, 4) != "/RC:") {
    return std::nullopt;
  }
  auto ecm = parse_ecm(vector.substr(2, 1));
  auto rl = parse_rl(vector.substr(7, 1));
  auto rc = parse_rc(vector.substr(12, 1));
  if (!ecm || !rl || !rc) return std::nullopt;
  return TemporalMetrics{*ecm, *rl, *rc};
}

bool severity_less(const TemporalMetrics& a, const TemporalMetrics& b) noexcept {
  auto key = [](const TemporalMetrics& m) {
    return std::array<int, 3>{severity_rank(m.ecm), severity_rank(m.rl),
                              severity_rank(m.rc)};
  };
  return key(a) < key(b);
}

Score round_up(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0) {
    throw Error(ErrorCode::InvalidArgument, "round_up: denominator must be positive");
  }
  if (numerator < 0) {
    throw Error(ErrorCode::InvalidArgument, "round_up: negative input");
  }
  if (numerator > 10 * denominator) {
    throw Error(ErrorCode::InvalidArgument, "round_up: input above 10.0");
  }
  // ceil(10 * n / d) with non-negative operands.
  const std::int64_t scaled = numerator * 10;
  const std::int64_t tenths = scaled / denominator + (scaled % denominator != 0 ? 1 : 0);
  return Score::from_tenths(static_cast<int>(tenths));
}

Score round_up(double value) {
  if (!std::isfinite(value) || value < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "round_up: negative or non-finite input");
  }
  const std::int64_t snapped = std::llround(value * 100000.0);
  if (snapped > 1000000) {
    throw Error(ErrorCode::InvalidArgument, "round_up: input above 10.0");
  }
  if (snapped % 10000 == 0) {
    return Score::from_tenths(static_cast<int>(snapped / 10000));
  }
  return Score::from_tenths(static_cast<int>(snapped / 10000 + 1));
}

TemporalScore temporal_score(BaseScore base, const TemporalMetrics& metrics) {
  // tenths * hundredths^3 == units of 1e-7.
  return round_up(std::int64_t{base.tenths()} * metrics.product_millionths(),
                  10'000'000);
}

std::vector<TemporalMetrics> all_metric_assignments() {
  std::vector<TemporalMetrics> out;
  out.reserve(kAllEcm.size() * kAllRl.size() * kAllRc.size());
  for (auto ecm : kAllEcm)
    for (auto rl : kAllRl)
      for (auto rc : kAllRc) out.push_back({ecm, rl, rc});
  std::sort(out.begin(), out.end(), severity_less);
  return out;
}

std::vector<TemporalMetrics> feasible_metric_assignments(BaseScore base,
                                                         TemporalScore target) {
  std::vector<TemporalMetrics> out;
  for (const auto& m : all_metric_assignments()) {
    if (temporal_score(base, m) == target) out.push_back(m);
  }
  return out;
}

}  // namespace vulnprio::scoring

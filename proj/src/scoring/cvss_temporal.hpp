#pragma once

// CVSS v3.1 Temporal Metrics and Temporal Score.
//
// All scores are one-decimal fixed point (integer tenths) and all metric
// multipliers are integer hundredths, so the score pipeline never compares
// binary floating-point values.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vulnprio::scoring {

enum class ExploitCodeMaturity : std::uint8_t {
  NotDefined,
  High,
  Functional,
  ProofOfConcept,
  Unproven,
};

enum class RemediationLevel : std::uint8_t {
  NotDefined,
  Unavailable,
  Workaround,
  TemporaryFix,
  OfficialFix,
};

enum class ReportConfidence : std::uint8_t {
  NotDefined,
  Confirmed,
  Reasonable,
  Unknown,
};

inline constexpr std::array<ExploitCodeMaturity, 5> kAllEcm = {
    ExploitCodeMaturity::NotDefined, ExploitCodeMaturity::High,
    ExploitCodeMaturity::Functional, ExploitCodeMaturity::ProofOfConcept,
    ExploitCodeMaturity::Unproven};
inline constexpr std::array<RemediationLevel, 5> kAllRl = {
    RemediationLevel::NotDefined, RemediationLevel::Unavailable,
    RemediationLevel::Workaround, RemediationLevel::TemporaryFix,
    RemediationLevel::OfficialFix};
inline constexpr std::array<ReportConfidence, 4> kAllRc = {
    ReportConfidence::NotDefined, ReportConfidence::Confirmed,
    ReportConfidence::Reasonable, ReportConfidence::Unknown};

/// Multiplier in integer hundredths (100 == 1.0).
int multiplier_hundredths(ExploitCodeMaturity level) noexcept;
int multiplier_hundredths(RemediationLevel level) noexcept;
int multiplier_hundredths(ReportConfidence level) noexcept;

template <class Level>
double numeric_value(Level level) noexcept {
  return multiplier_hundredths(level) / 100.0;
}

/// Total severity order used for tie-breaking and deterministic selection.
/// Ascending severity follows ascending multiplier; NotDefined sits above
/// the equal-valued strongest level (High, Unavailable, Confirmed).
int severity_rank(ExploitCodeMaturity level) noexcept;
int severity_rank(RemediationLevel level) noexcept;
int severity_rank(ReportConfidence level) noexcept;

std::string_view to_string(ExploitCodeMaturity level) noexcept;
std::string_view to_string(RemediationLevel level) noexcept;
std::string_view to_string(ReportConfidence level) noexcept;

/// CVSS vector letter (X, H, F, P, U / X, U, W, T, O / X, C, R, U).
char vector_letter(ExploitCodeMaturity level) noexcept;
char vector_letter(RemediationLevel level) noexcept;
char vector_letter(ReportConfidence level) noexcept;

std::optional<ExploitCodeMaturity> parse_ecm(std::string_view name);
std::optional<RemediationLevel> parse_rl(std::string_view name);
std::optional<ReportConfidence> parse_rc(std::string_view name);

class Score {
 public:
  static constexpr int kMaxTenths = 100;

  constexpr Score() = default;

  /// Throws Error(InvalidArgument) outside [0, 100].
  static Score from_tenths(int tenths);
  /// Accepts only values with at most one fractional digit in [0.0, 10.0].
  static Score from_decimal(double value);
  /// Parses "9.8", "10", "10.0".
  static Score parse(std::string_view text);

  constexpr int tenths() const noexcept { return tenths_; }
  double value() const noexcept { return tenths_ / 10.0; }
  /// Probability used by attack graph CPTs: score / 10.
  double probability() const noexcept { return tenths_ / 100.0; }
  std::string to_string() const;

  auto operator<=>(const Score&) const = default;

 private:
  constexpr explicit Score(int tenths) : tenths_(tenths) {}
  int tenths_ = 0;
};

using BaseScore = Score;
using TemporalScore = Score;

struct TemporalMetrics {
  ExploitCodeMaturity ecm = ExploitCodeMaturity::NotDefined;
  RemediationLevel rl = RemediationLevel::NotDefined;
  ReportConfidence rc = ReportConfidence::NotDefined;

  /// Product of the three multipliers in millionths (1'000'000 == 1.0).
  std::int64_t product_millionths() const noexcept;
  /// "E:U/RL:W/RC:X"
  std::string vector() const;

  bool operator==(const TemporalMetrics&) const = default;
};

std::optional<TemporalMetrics> parse_vector(std::string_view vector);

/// Severity-lexicographic order over (ecm, rl, rc).
bool severity_less(const TemporalMetrics& a, const TemporalMetrics& b) noexcept;

/// Least one-decimal value >= numerator/denominator, computed exactly.
/// Throws Error(InvalidArgument) if the value is negative or above 10.
Score round_up(std::int64_t numerator, std::int64_t denominator);

/// CVSS v3.1 Roundup over a double: the input is first snapped to five
/// decimal places so representation noise (8.6 stored as 8.6000000001)
/// cannot push the result up a tenth.
Score round_up(double value);

TemporalScore temporal_score(BaseScore base, const TemporalMetrics& metrics);

/// All 100 metric triples, ordered by severity_less.
std::vector<TemporalMetrics> all_metric_assignments();

/// Every triple whose temporal score equals `target`, ordered by
/// severity_less. Empty when none reproduces it.
std::vector<TemporalMetrics> feasible_metric_assignments(BaseScore base,
                                                         TemporalScore target);

}  // namespace vulnprio::scoring

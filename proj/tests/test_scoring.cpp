#include <doctest.h>

#include <random>

#include <boost/rational.hpp>

#include "common/error.hpp"
#include "scoring/cvss_temporal.hpp"

using namespace vulnprio;
using namespace vulnprio::scoring;

namespace {

using Rational = boost::rational<std::int64_t>;

// Ceiling to one decimal place on exact rationals.
int oracle_round_up_tenths(Rational x) {
  const Rational scaled = x * 10;
  std::int64_t q = scaled.numerator() / scaled.denominator();
  if (Rational(q) < scaled) ++q;
  return static_cast<int>(q);
}

Rational oracle_product(int base_tenths, const TemporalMetrics& m) {
  return Rational(base_tenths, 10) * Rational(multiplier_hundredths(m.ecm), 100) *
         Rational(multiplier_hundredths(m.rl), 100) * Rational(multiplier_hundredths(m.rc), 100);
}

Score S(const char* text) { return Score::parse(text); }

}  // namespace

TEST_CASE("multipliers are the published table values") {
  using E = ExploitCodeMaturity;
  using R = RemediationLevel;
  using C = ReportConfidence;
  CHECK(multiplier_hundredths(E::NotDefined) == 100);
  CHECK(multiplier_hundredths(E::High) == 100);
  CHECK(multiplier_hundredths(E::Functional) == 97);
  CHECK(multiplier_hundredths(E::ProofOfConcept) == 94);
  CHECK(multiplier_hundredths(E::Unproven) == 91);
  CHECK(multiplier_hundredths(R::NotDefined) == 100);
  CHECK(multiplier_hundredths(R::Unavailable) == 100);
  CHECK(multiplier_hundredths(R::Workaround) == 97);
  CHECK(multiplier_hundredths(R::TemporaryFix) == 96);
  CHECK(multiplier_hundredths(R::OfficialFix) == 95);
  CHECK(multiplier_hundredths(C::NotDefined) == 100);
  CHECK(multiplier_hundredths(C::Confirmed) == 100);
  CHECK(multiplier_hundredths(C::Reasonable) == 96);
  CHECK(multiplier_hundredths(C::Unknown) == 92);

  CHECK(numeric_value(E::High) == 1.0);
  CHECK(numeric_value(R::OfficialFix) == 0.95);
  CHECK(numeric_value(C::NotDefined) == 1.0);
}

TEST_CASE("severity order") {
  using E = ExploitCodeMaturity;
  CHECK(severity_rank(E::Unproven) < severity_rank(E::ProofOfConcept));
  CHECK(severity_rank(E::ProofOfConcept) < severity_rank(E::Functional));
  CHECK(severity_rank(E::Functional) < severity_rank(E::High));
  CHECK(severity_rank(E::High) < severity_rank(E::NotDefined));
  for (auto a : kAllEcm) {
    for (auto b : kAllEcm) {
      if (severity_rank(a) < severity_rank(b)) {
        CHECK(multiplier_hundredths(a) <= multiplier_hundredths(b));
      }
    }
  }
  for (auto a : kAllRl) {
    for (auto b : kAllRl) {
      if (severity_rank(a) < severity_rank(b)) CHECK(multiplier_hundredths(a) <= multiplier_hundredths(b));
    }
  }
  for (auto a : kAllRc) {
    for (auto b : kAllRc) {
      if (severity_rank(a) < severity_rank(b)) CHECK(multiplier_hundredths(a) <= multiplier_hundredths(b));
    }
  }
}

TEST_CASE("level names and vector letters round-trip") {
  for (auto e : kAllEcm) {
    CHECK(parse_ecm(to_string(e)) == e);
    CHECK(parse_ecm(std::string(1, vector_letter(e))) == e);
  }
  for (auto r : kAllRl) {
    CHECK(parse_rl(to_string(r)) == r);
    CHECK(parse_rl(std::string(1, vector_letter(r))) == r);
  }
  for (auto c : kAllRc) {
    CHECK(parse_rc(to_string(c)) == c);
    CHECK(parse_rc(std::string(1, vector_letter(c))) == c);
  }
  CHECK_FALSE(parse_ecm("Weaponized"));
  for (const auto& m : all_metric_assignments()) CHECK(parse_vector(m.vector()) == m);
  CHECK(TemporalMetrics{ExploitCodeMaturity::Unproven, RemediationLevel::Workaround,
                        ReportConfidence::NotDefined}
            .vector() == "E:U/RL:W/RC:X");
  CHECK_FALSE(parse_vector("E:U/RL:W"));
  CHECK_FALSE(parse_vector("E:Q/RL:W/RC:X"));
}

TEST_CASE("score parsing and range") {
  CHECK(S("9.8").tenths() == 98);
  CHECK(S("10").tenths() == 100);
  CHECK(S("10.0").tenths() == 100);
  CHECK(S("0.0").tenths() == 0);
  CHECK(S("7.8").to_string() == "7.8");
  CHECK(S("10").to_string() == "10.0");
  CHECK(Score::from_decimal(8.8).tenths() == 88);
  CHECK_THROWS_AS(S("10.1"), Error);
  CHECK_THROWS_AS(S("9.85"), Error);
  CHECK_THROWS_AS(S("-1"), Error);
  CHECK_THROWS_AS(S("abc"), Error);
  CHECK_THROWS_AS(Score::from_decimal(9.85), Error);
  CHECK_THROWS_AS(Score::from_tenths(101), Error);
  CHECK_THROWS_AS(Score::from_tenths(-1), Error);
  CHECK(S("8.9").probability() == doctest::Approx(0.89));
}

TEST_CASE("round_up examples") {
  CHECK(round_up(8827, 1000).tenths() == 89);
  CHECK(round_up(98, 10).tenths() == 98);
  CHECK(round_up(0, 1).tenths() == 0);
  CHECK(round_up(8.827).tenths() == 89);
  CHECK(round_up(9.8).tenths() == 98);
  CHECK(round_up(0.0).tenths() == 0);
  // A double product that is mathematically 8.6 must not be bumped to 8.7.
  const double noisy = 10.0 * 0.86;
  CHECK(round_up(noisy).tenths() == 86);
  CHECK(round_up(8.600000000001).tenths() == 86);
  CHECK(round_up(8.60001).tenths() == 87);
  CHECK_THROWS_AS(round_up(-1, 10), Error);
  CHECK_THROWS_AS(round_up(101, 10), Error);
  CHECK_THROWS_AS(round_up(-0.1), Error);
  CHECK_THROWS_AS(round_up(10.01), Error);
}

TEST_CASE("round_up is idempotent") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> num(0, 10'000'000);
  for (int i = 0; i < 5000; ++i) {
    const auto n = num(rng);
    const Score once = round_up(n, 1'000'000);
    CHECK(round_up(once.tenths(), 10) == once);
  }
}

TEST_CASE("temporal_score examples") {
  using E = ExploitCodeMaturity;
  using R = RemediationLevel;
  using C = ReportConfidence;
  CHECK(temporal_score(S("9.8"), {}).tenths() == 98);
  CHECK(temporal_score(S("10.0"), {E::Unproven, R::Workaround, C::NotDefined}).tenths() == 89);
  for (const auto& m : all_metric_assignments()) CHECK(temporal_score(S("0.0"), m).tenths() == 0);
}

TEST_CASE("temporal_score agrees with the rational oracle on every input") {
  for (int base = 0; base <= 100; ++base) {
    for (const auto& m : all_metric_assignments()) {
      const int expected = oracle_round_up_tenths(oracle_product(base, m));
      REQUIRE(temporal_score(Score::from_tenths(base), m).tenths() == expected);
    }
  }
}

TEST_CASE("temporal score bounds") {
  for (int base = 0; base <= 100; ++base) {
    const auto b = Score::from_tenths(base);
    const auto floor = round_up(static_cast<std::int64_t>(base) * 91 * 95 * 92, 10'000'000);
    for (const auto& m : all_metric_assignments()) {
      const auto t = temporal_score(b, m);
      CHECK(t <= b);
      CHECK(t >= floor);
    }
  }
}

TEST_CASE("lowering one metric never raises the temporal score") {
  for (int base = 0; base <= 100; ++base) {
    const auto b = Score::from_tenths(base);
    for (const auto& m : all_metric_assignments()) {
      const auto t = temporal_score(b, m);
      for (auto e : kAllEcm) {
        if (multiplier_hundredths(e) <= multiplier_hundredths(m.ecm)) {
          CHECK(temporal_score(b, {e, m.rl, m.rc}) <= t);
        }
      }
      for (auto r : kAllRl) {
        if (multiplier_hundredths(r) <= multiplier_hundredths(m.rl)) {
          CHECK(temporal_score(b, {m.ecm, r, m.rc}) <= t);
        }
      }
      for (auto c : kAllRc) {
        if (multiplier_hundredths(c) <= multiplier_hundredths(m.rc)) {
          CHECK(temporal_score(b, {m.ecm, m.rl, c}) <= t);
        }
      }
    }
  }
}

TEST_CASE("product of multipliers stays in range") {
  for (const auto& m : all_metric_assignments()) {
    CHECK(m.product_millionths() >= 91 * 95 * 92);
    CHECK(m.product_millionths() <= 1'000'000);
  }
}

TEST_CASE("all_metric_assignments enumerates the full cross product in severity order") {
  const auto all = all_metric_assignments();
  CHECK(all.size() == 100);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(severity_less(all[i - 1], all[i]));
  CHECK(all.front() == TemporalMetrics{ExploitCodeMaturity::Unproven, RemediationLevel::OfficialFix,
                                       ReportConfidence::Unknown});
  CHECK(all.back() == TemporalMetrics{});
}

TEST_CASE("feasible_metric_assignments") {
  const auto unity = feasible_metric_assignments(S("9.8"), S("9.8"));
  CHECK(std::find(unity.begin(), unity.end(), TemporalMetrics{}) != unity.end());

  const auto f = feasible_metric_assignments(S("10.0"), S("8.9"));
  const TemporalMetrics uwx{ExploitCodeMaturity::Unproven, RemediationLevel::Workaround,
                            ReportConfidence::NotDefined};
  CHECK(std::find(f.begin(), f.end(), uwx) != f.end());
  for (const auto& m : f) CHECK(temporal_score(S("10.0"), m) == S("8.9"));

  CHECK(feasible_metric_assignments(S("10.0"), S("9.9")).empty());

  // Exhaustive cross-check of the filter itself.
  for (int base = 0; base <= 100; base += 7) {
    for (int target = 0; target <= base; ++target) {
      std::size_t count = 0;
      for (const auto& m : all_metric_assignments()) {
        if (oracle_round_up_tenths(oracle_product(base, m)) == target) ++count;
      }
      CHECK(feasible_metric_assignments(Score::from_tenths(base), Score::from_tenths(target)).size() ==
            count);
    }
  }
}

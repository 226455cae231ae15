#include <doctest.h>

#include <chrono>
#include <cmath>
#include <future>
#include <queue>
#include <random>

#include "bayes/graph.hpp"
#include "bayes/graph_io.hpp"
#include "bayes/inference.hpp"
#include "common/error.hpp"
#include "random_graphs.hpp"
#include "support.hpp"

using namespace vulnprio;
using namespace vulnprio::bayes;

namespace {

BagNode event(std::string id, int tenths) {
  BagNode n;
  n.id = id;
  n.label = id;
  n.score = Score::from_tenths(tenths);
  return n;
}

BagNode entry(std::string id) {
  BagNode n;
  n.id = id;
  n.label = id;
  n.kind = NodeKind::AttackerEntry;
  return n;
}

// A(prior 0.9) -> B(score 8.0)
BayesNet chain() {
  AttackGraph g;
  g.nodes = {entry("A"), event("B", 80)};
  g.edges = {{"A", "B"}};
  g.root_priors = {{"A", 0.9}};
  return BayesNet::compile(g);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

// Posterior of every node, or nullopt when the evidence is impossible.
std::optional<std::vector<double>> all_posteriors(const BayesNet& net, const EvidenceSet& ev) {
  std::vector<double> out;
  try {
    for (std::size_t i = 0; i < net.size(); ++i) out.push_back(posterior_enumeration(net, net.id(i), ev).probability);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ZeroProbabilityEvidence) return std::nullopt;
    throw;
  }
  return out;
}

// Copy of `g` with one random scored node lowered by a random amount.
AttackGraph lower_one_score(const AttackGraph& g, std::mt19937_64& rng) {
  AttackGraph out = g;
  std::vector<std::size_t> scored;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    if (out.nodes[i].score && out.nodes[i].score->tenths() > 0) scored.push_back(i);
  }
  if (scored.empty()) return out;
  auto& node = out.nodes[scored[std::uniform_int_distribution<std::size_t>(0, scored.size() - 1)(rng)]];
  const int t = node.score->tenths();
  node.score = Score::from_tenths(std::uniform_int_distribution<int>(0, t - 1)(rng));
  return out;
}

}  // namespace

TEST_CASE("joint_probability examples") {
  AttackGraph single;
  single.nodes = {entry("A")};
  const auto one = BayesNet::compile(single);
  CHECK(joint_probability(one, {{"A", true}}) == 0.5);

  const auto net = chain();
  CHECK(joint_probability(net, {{"A", true}, {"B", true}}) == doctest::Approx(0.72).epsilon(1e-15));
  CHECK(joint_probability(net, {{"A", false}, {"B", true}}) == 0.0);
  CHECK(code_of([&] { joint_probability(net, {{"A", true}}); }) == ErrorCode::IncompleteAssignment);
  CHECK(code_of([&] { joint_probability(net, {{"A", true}, {"B", true}, {"Q", true}}); }) ==
        ErrorCode::UnknownNode);
}

TEST_CASE("posterior_enumeration examples") {
  const auto net = chain();
  CHECK(std::abs(posterior_enumeration(net, "B", {}).probability - 0.72) < 1e-12);
  CHECK(std::abs(posterior_enumeration(net, "B", {{"A", true}}).probability - 0.8) < 1e-12);
  CHECK(std::abs(posterior_enumeration(net, "A", {{"B", true}}).probability - 1.0) < 1e-12);
  CHECK(code_of([&] { posterior_enumeration(net, "B", {{"A", false}, {"B", true}}); }) ==
        ErrorCode::ZeroProbabilityEvidence);
  CHECK(code_of([&] { posterior_enumeration(net, "B", {}, 1); }) == ErrorCode::GraphTooLarge);
  CHECK(code_of([&] { posterior_enumeration(net, "Q", {}); }) == ErrorCode::UnknownNode);
}

TEST_CASE("posterior examples") {
  const auto net = chain();
  CHECK(std::abs(posterior(net, "B", {}).probability - 0.72) < 1e-12);
  CHECK(posterior(net, "B", {{"B", true}}).probability == 1.0);
  CHECK(posterior(net, "B", {{"B", false}}).probability == 0.0);

  AttackGraph diamond;
  diamond.nodes = {event("A", 50), event("B", 50), event("C", 50), event("D", 100)};
  diamond.edges = {{"A", "B"}, {"A", "C"}, {"B", "D"}, {"C", "D"}};
  diamond.root_priors = {{"A", 1.0}};
  const auto d = BayesNet::compile(diamond);
  CHECK(std::abs(posterior(d, "D", {}).probability - 0.75) < 1e-12);
  CHECK(std::abs(posterior_enumeration(d, "D", {}).probability - 0.75) < 1e-12);

  CHECK(code_of([&] { posterior(net, "B", {{"A", false}, {"B", true}}); }) ==
        ErrorCode::ZeroProbabilityEvidence);
  CHECK(code_of([&] { posterior(net, "Q", {}); }) == ErrorCode::UnknownNode);
  CHECK(code_of([&] { posterior(net, "B", {{"Q", true}}); }) == ErrorCode::UnknownNode);
}

TEST_CASE("conditioning on the target gives certainty on random graphs") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto net = BayesNet::compile(testsupport::random_graph(rng, {}));
    for (std::size_t t = 0; t < net.size(); ++t) {
      double p = 1.0;
      try {
        p = posterior(net, net.id(t), {{net.id(t), true}}).probability;
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroProbabilityEvidence);
      }
      CHECK(p == 1.0);
    }
  }
}

TEST_CASE("variable elimination matches enumeration on random graphs") {
  std::mt19937_64 rng(20240611);
  int compared = 0;
  for (int i = 0; i < 400; ++i) {
    testsupport::RandomGraphOptions o;
    o.noisy_or = i % 2;
    const auto net = BayesNet::compile(testsupport::random_graph(rng, o));
    const auto ev = testsupport::random_evidence(net, rng);
    for (std::size_t t = 0; t < net.size(); ++t) {
      const double oracle = posterior_enumeration(net, net.id(t), ev).probability;
      const double ve = posterior(net, net.id(t), ev).probability;
      REQUIRE(std::abs(oracle - ve) <= 1e-9);
      ++compared;
    }
  }
  CHECK(compared > 1000);
}

TEST_CASE("posterior distribution is normalized") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    testsupport::RandomGraphOptions o;
    o.noisy_or = i % 2;
    const auto net = BayesNet::compile(testsupport::random_graph(rng, o));
    const auto ev = testsupport::random_evidence(net, rng);
    for (std::size_t t = 0; t < net.size(); ++t) {
      const auto dist = posterior_distribution(net, net.id(t), ev);
      CHECK(std::abs(dist[0] + dist[1] - 1.0) <= 1e-12);
      CHECK(dist[0] >= 0.0);
      CHECK(dist[1] >= 0.0);
    }
  }
}

TEST_CASE("false evidence blocks every path to a node: posterior zero") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    testsupport::RandomGraphOptions o;
    o.noisy_or = i % 2;
    const auto g = testsupport::random_graph(rng, o);
    const auto net = BayesNet::compile(g);
    EvidenceSet ev;
    for (std::size_t k = 0; k < net.size(); ++k) {
      if (unit(rng) < 0.3) ev[net.id(k)] = false;
    }
    // Nodes reachable from a positive-prior root without entering a
    // false-evidence node.
    std::vector<bool> reach(net.size(), false);
    std::vector<std::vector<std::size_t>> children(net.size());
    for (std::size_t k = 0; k < net.size(); ++k) {
      for (auto p : net.parents(k)) children[p].push_back(k);
    }
    std::queue<std::size_t> frontier;
    for (std::size_t k = 0; k < net.size(); ++k) {
      if (net.is_root(k) && net.local_probability(k, true, 0) > 0.0 && !ev.contains(net.id(k))) {
        reach[k] = true;
        frontier.push(k);
      }
    }
    while (!frontier.empty()) {
      const auto v = frontier.front();
      frontier.pop();
      for (auto c : children[v]) {
        if (!reach[c] && !ev.contains(net.id(c))) {
          reach[c] = true;
          frontier.push(c);
        }
      }
    }
    for (std::size_t k = 0; k < net.size(); ++k) {
      if (reach[k]) continue;
      double p = 0.0;
      try {
        p = posterior(net, net.id(k), ev).probability;
        ++checked;
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroProbabilityEvidence);
      }
      CHECK(p == 0.0);
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("adding implied evidence changes no posterior") {
  std::mt19937_64 rng(23);
  int extended = 0;
  for (int i = 0; i < 200; ++i) {
    testsupport::RandomGraphOptions o;
    o.noisy_or = i % 2;
    o.max_nodes = 9;
    const auto net = BayesNet::compile(testsupport::random_graph(rng, o));
    const auto ev = testsupport::random_evidence(net, rng, 0.25);
    const auto base = all_posteriors(net, ev);
    REQUIRE(base);
    EvidenceSet more = ev;
    for (std::size_t k = 0; k < net.size(); ++k) {
      if (ev.contains(net.id(k))) continue;
      if ((*base)[k] >= 1.0 - 1e-12) more[net.id(k)] = true;
      if ((*base)[k] <= 1e-12) more[net.id(k)] = false;
    }
    if (more.size() == ev.size()) continue;
    ++extended;
    for (std::size_t k = 0; k < net.size(); ++k) {
      CHECK(std::abs(posterior(net, net.id(k), more).probability - (*base)[k]) <= 1e-9);
    }
  }
  CHECK(extended > 20);
}

// Lowering a score cannot raise any posterior when nothing is conditioned
// on, when evidence sits only on roots, or when every ancestor of the
// evidence is itself forced true.
TEST_CASE("lowering a score never raises a posterior in the monotone cases") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    testsupport::RandomGraphOptions o;
    o.noisy_or = i % 2;
    o.max_nodes = 10;
    const auto g = testsupport::random_graph(rng, o);
    const auto lowered = lower_one_score(g, rng);
    const auto net = BayesNet::compile(g);
    const auto low = BayesNet::compile(lowered);

    EvidenceSet ev;
    switch (i % 3) {
      case 0:
        break;
      case 1:
        for (std::size_t k = 0; k < net.size(); ++k) {
          if (net.is_root(k) && unit(rng) < 0.5) ev[net.id(k)] = true;
        }
        break;
      case 2: {
        // Pick a node and force it together with all its ancestors.
        const auto pick = std::uniform_int_distribution<std::size_t>(0, net.size() - 1)(rng);
        std::vector<std::size_t> stack{pick};
        while (!stack.empty()) {
          const auto v = stack.back();
          stack.pop_back();
          if (ev.emplace(net.id(v), true).second) {
            for (auto p : net.parents(v)) stack.push_back(p);
          }
        }
        break;
      }
    }
    const auto before = all_posteriors(net, ev);
    const auto after = all_posteriors(low, ev);
    if (!before || !after) continue;
    for (std::size_t k = 0; k < net.size(); ++k) CHECK((*after)[k] <= (*before)[k] + 1e-12);
  }
}

TEST_CASE("explaining away: lowering a score can raise a posterior") {
  // A and B are alternative causes of X; Y depends on A only. Once X is
  // observed, making B less likely shifts belief onto A and hence Y.
  AttackGraph g;
  g.nodes = {event("A", 50), event("B", 90), event("X", 100), event("Y", 100)};
  g.edges = {{"A", "X"}, {"B", "X"}, {"A", "Y"}};
  const auto before = posterior(BayesNet::compile(g), "Y", {{"X", true}}).probability;
  g.nodes[1].score = Score::from_tenths(50);
  const auto after = posterior(BayesNet::compile(g), "Y", {{"X", true}}).probability;
  CHECK(std::abs(before - 0.5 / 0.95) < 1e-12);
  CHECK(std::abs(after - 0.5 / 0.75) < 1e-12);
  CHECK(after > before);
}

// Holds for the scenario targets only: ancestors of the evidence can rise
// through explaining away, as above.
TEST_CASE("lowering scores on the shipped graph never raises a scenario target") {
  const auto g = load_graph(testsupport::data_dir() / "purdue.json");
  const auto net = BayesNet::compile(g);
  const std::vector<std::pair<EvidenceSet, std::string>> scenarios = {
      {{}, "PLC_2"},
      {{{"Remote_Attacker", true}}, "PLC_2"},
      {{{"DMZ_Bypass", true}}, "PLC_3"},
      {{{"Historian_Root", true}}, "PLC_1"},
      {{{"HMI_2_Root", true}}, "PLC_4"}};
  std::mt19937_64 rng(31);
  for (int i = 0; i < 60; ++i) {
    auto lowered = g;
    for (auto& n : lowered.nodes) {
      if (n.score && rng() % 2) {
        n.score = Score::from_tenths(std::uniform_int_distribution<int>(1, n.score->tenths())(rng));
      }
    }
    const auto low = BayesNet::compile(lowered);
    for (const auto& [ev, target] : scenarios) {
      CHECK(posterior(low, target, ev).probability <= posterior(net, target, ev).probability + 1e-12);
    }
  }
}

TEST_CASE("rescoring leaves queries on the original graph unchanged") {
  const auto g = load_graph(testsupport::data_dir() / "purdue.json");
  const auto net = BayesNet::compile(g);
  std::vector<double> before;
  for (std::size_t k = 0; k < net.size(); ++k) before.push_back(posterior(net, net.id(k), {}).probability);

  std::map<std::string, Score> same;
  std::map<std::string, Score> lower;
  for (const auto& n : g.nodes) {
    if (!n.cve) continue;
    same[*n.cve] = *n.score;
    lower[*n.cve] = Score::from_tenths(n.score->tenths() / 2);
  }
  const auto identical = BayesNet::compile(rescore(g, same));
  const auto halved = BayesNet::compile(rescore(g, lower));
  for (std::size_t k = 0; k < net.size(); ++k) {
    CHECK(posterior(identical, net.id(k), {}).probability == before[k]);
    CHECK(posterior(halved, net.id(k), {}).probability <= before[k]);
    CHECK(posterior(net, net.id(k), {}).probability == before[k]);
  }
}

TEST_CASE("variable elimination handles 200-node sparse graphs") {
  std::mt19937_64 rng(37);
  for (auto noisy : {false, true}) {
    testsupport::RandomGraphOptions o;
    o.min_nodes = o.max_nodes = 200;
    o.edge_probability = 0.012;
    o.max_parents = 3;
    o.noisy_or = noisy;
    const auto net = BayesNet::compile(testsupport::random_graph(rng, o));
    const auto ev = testsupport::random_evidence(net, rng, 0.05);
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t t = 0; t < net.size(); t += 10) {
      const auto dist = posterior_distribution(net, net.id(t), ev);
      CHECK(std::abs(dist[0] + dist[1] - 1.0) <= 1e-12);
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    CHECK(elapsed < std::chrono::seconds(10));
    CHECK(code_of([&] { posterior_enumeration(net, net.id(0), ev); }) == ErrorCode::GraphTooLarge);
  }
}

TEST_CASE("concurrent queries on one network agree with serial ones") {
  const auto net = BayesNet::compile(load_graph(testsupport::data_dir() / "purdue.json"));
  std::vector<double> serial;
  for (std::size_t k = 0; k < net.size(); ++k) serial.push_back(posterior(net, net.id(k), {{"DMZ_Bypass", true}}).probability);
  std::vector<std::future<std::vector<double>>> jobs;
  for (int w = 0; w < 8; ++w) {
    jobs.push_back(std::async(std::launch::async, [&] {
      std::vector<double> out;
      for (std::size_t k = 0; k < net.size(); ++k) out.push_back(posterior(net, net.id(k), {{"DMZ_Bypass", true}}).probability);
      return out;
    }));
  }
  for (auto& j : jobs) CHECK(j.get() == serial);
}

TEST_CASE("query result JSON") {
  const auto r = posterior(chain(), "B", {{"A", true}});
  const auto j = r.to_json();
  CHECK(j["target"] == "B");
  CHECK(j["evidence"] == nlohmann::json{{"A", true}});
  CHECK(std::abs(j["probability"].get<double>() - 0.8) < 1e-12);
  CHECK(evidence_from_json(evidence_to_json(r.evidence)) == r.evidence);
  CHECK(code_of([] { evidence_from_json(nlohmann::json{{"A", 1}}); }) == ErrorCode::Parse);
  CHECK(code_of([] { evidence_from_json(nlohmann::json::array()); }) == ErrorCode::Parse);
  CHECK(parse_score_variant("base") == ScoreVariant::Base);
  CHECK(parse_score_variant("temporal") == ScoreVariant::Temporal);
  CHECK_FALSE(parse_score_variant("environmental"));
}

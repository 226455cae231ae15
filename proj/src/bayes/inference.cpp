#include "bayes/inference.hpp"

#include <algorithm>
#include <set>

#include "bayes/factor.hpp"
#include "common/error.hpp"

namespace vulnprio::bayes {

using nlohmann::json;

std::string_view to_string(ScoreVariant variant) noexcept {
  return variant == ScoreVariant::Temporal ? "temporal" : "base";
}

std::optional<ScoreVariant> parse_score_variant(std::string_view text) noexcept {
  if (text == "base") return ScoreVariant::Base;
  if (text == "temporal") return ScoreVariant::Temporal;
  return std::nullopt;
}

json evidence_to_json(const EvidenceSet& evidence) {
  json out = json::object();
  for (const auto& [id, state] : evidence) out[id] = state;
  return out;
}

EvidenceSet evidence_from_json(const json& doc) {
  if (doc.is_null()) return {};
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "evidence must be an object of id: bool");
  EvidenceSet out;
  for (const auto& [id, state] : doc.items()) {
    if (!state.is_boolean()) {
      throw Error(ErrorCode::Parse, "evidence['" + id + "'] must be true or false");
    }
    out[id] = state.get<bool>();
  }
  return out;
}

json QueryResult::to_json() const {
  json out = {{"target", target},
              {"evidence", evidence_to_json(evidence)},
              {"probability", probability}};
  out["score_variant"] = score_variant ? json(std::string(bayes::to_string(*score_variant))) : json(nullptr);
  return out;
}

namespace {

// Index-form evidence; checks every key names a node.
std::vector<std::pair<std::size_t, bool>> index_evidence(const BayesNet& net,
                                                         const EvidenceSet& evidence) {
  std::vector<std::pair<std::size_t, bool>> out;
  for (const auto& [id, state] : evidence) out.emplace_back(net.require(id), state);
  return out;
}

double joint_of_states(const BayesNet& net, const std::vector<bool>& states) {
  double p = 1.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    std::uint64_t mask = 0;
    const auto& ps = net.parents(i);
    for (std::size_t k = 0; k < ps.size(); ++k) {
      if (states[ps[k]]) mask |= std::uint64_t{1} << k;
    }
    p *= net.local_probability(i, states[i], mask);
    if (p == 0.0) break;
  }
  return p;
}

[[noreturn]] void zero_evidence(const EvidenceSet& evidence) {
  std::string keys;
  for (const auto& [id, state] : evidence) {
    keys += (keys.empty() ? "" : ", ") + id + "=" + (state ? "true" : "false");
  }
  throw Error(ErrorCode::ZeroProbabilityEvidence,
              "evidence {" + keys + "} has probability zero under the model");
}

}  // namespace

double joint_probability(const BayesNet& net, const EvidenceSet& assignment) {
  std::vector<bool> states(net.size(), false);
  std::vector<bool> seen(net.size(), false);
  for (const auto& [id, state] : assignment) {
    const auto i = net.require(id);
    states[i] = state;
    seen[i] = true;
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!seen[i]) {
      throw Error(ErrorCode::IncompleteAssignment, "no state given for node '" + net.id(i) + "'");
    }
  }
  return joint_of_states(net, states);
}

QueryResult posterior_enumeration(const BayesNet& net, std::string_view target,
                                  const EvidenceSet& evidence, std::size_t max_nodes) {
  const std::size_t t = net.require(target);
  const auto ev = index_evidence(net, evidence);
  if (net.size() > max_nodes || net.size() >= 63) {
    throw Error(ErrorCode::GraphTooLarge, "enumeration limited to " + std::to_string(max_nodes) +
                                              " nodes, graph has " + std::to_string(net.size()));
  }
  double mass_true = 0.0;
  double mass_false = 0.0;
  std::vector<bool> states(net.size());
  const std::uint64_t rows = std::uint64_t{1} << net.size();
  for (std::uint64_t row = 0; row < rows; ++row) {
    for (std::size_t i = 0; i < net.size(); ++i) states[i] = (row >> i & 1U) != 0;
    const bool consistent = std::all_of(ev.begin(), ev.end(), [&](const auto& e) {
      return states[e.first] == e.second;
    });
    if (!consistent) continue;
    const double p = joint_of_states(net, states);
    (states[t] ? mass_true : mass_false) += p;
  }
  const double z = mass_true + mass_false;
  if (!(z > 0.0)) zero_evidence(evidence);
  return {std::string(target), evidence, mass_true / z, std::nullopt};
}

std::array<double, 2> posterior_distribution(const BayesNet& net, std::string_view target,
                                             const EvidenceSet& evidence) {
  const std::size_t t = net.require(target);
  const auto ev = index_evidence(net, evidence);

  // Nodes outside the ancestral closure of {target} + evidence sum to one
  // and can be dropped.
  std::vector<bool> relevant(net.size(), false);
  std::vector<std::size_t> frontier{t};
  for (const auto& [i, _] : ev) frontier.push_back(i);
  while (!frontier.empty()) {
    const auto v = frontier.back();
    frontier.pop_back();
    if (relevant[v]) continue;
    relevant[v] = true;
    for (auto p : net.parents(v)) frontier.push_back(p);
  }

  std::vector<Factor> factors;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!relevant[i]) continue;
    const auto& ps = net.parents(i);
    // Scope {i} + parents, sorted; the CPT row order follows parent order.
    std::vector<std::size_t> scope(ps.begin(), ps.end());
    scope.push_back(i);
    std::sort(scope.begin(), scope.end());
    std::vector<double> table(std::size_t{1} << scope.size());
    for (std::uint64_t row = 0; row < table.size(); ++row) {
      auto state_of = [&](std::size_t var) {
        const auto k = static_cast<std::size_t>(
            std::lower_bound(scope.begin(), scope.end(), var) - scope.begin());
        return (row >> k & 1U) != 0;
      };
      std::uint64_t mask = 0;
      for (std::size_t k = 0; k < ps.size(); ++k) {
        if (state_of(ps[k])) mask |= std::uint64_t{1} << k;
      }
      table[row] = net.local_probability(i, state_of(i), mask);
    }
    Factor f(std::move(scope), std::move(table));
    for (const auto& [var, state] : ev) f = f.restrict(var, state);
    factors.push_back(std::move(f));
  }

  std::set<std::size_t> hidden;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (relevant[i] && i != t) hidden.insert(i);
  }
  for (const auto& [var, _] : ev) hidden.erase(var);

  while (!hidden.empty()) {
    // Min-degree: the hidden variable with the fewest distinct neighbours
    // across the factors that mention it; lowest index on ties.
    std::size_t best = *hidden.begin();
    std::size_t best_degree = SIZE_MAX;
    for (auto v : hidden) {
      std::set<std::size_t> neighbours;
      for (const auto& f : factors) {
        if (f.contains(v)) neighbours.insert(f.vars().begin(), f.vars().end());
      }
      const std::size_t degree = neighbours.empty() ? 0 : neighbours.size() - 1;
      if (degree < best_degree) {
        best = v;
        best_degree = degree;
      }
    }
    Factor merged;
    std::vector<Factor> rest;
    for (auto& f : factors) {
      if (f.contains(best)) {
        merged = Factor::product(merged, f);
      } else {
        rest.push_back(std::move(f));
      }
    }
    rest.push_back(merged.sum_out(best));
    factors = std::move(rest);
    hidden.erase(best);
  }

  Factor result;
  for (const auto& f : factors) result = Factor::product(result, f);

  double mass_true = 0.0;
  double mass_false = 0.0;
  if (auto it = evidence.find(std::string(target)); it != evidence.end()) {
    // Target is observed: the remaining factor is the scalar P(e).
    (it->second ? mass_true : mass_false) = result.table().at(0);
  } else {
    mass_false = result.table().at(0);
    mass_true = result.table().at(1);
  }
  const double z = mass_true + mass_false;
  if (!(z > 0.0)) zero_evidence(evidence);
  return {mass_false / z, mass_true / z};
}

QueryResult posterior(const BayesNet& net, std::string_view target, const EvidenceSet& evidence) {
  const auto dist = posterior_distribution(net, target, evidence);
  return {std::string(target), evidence, dist[1], std::nullopt};
}

}  // namespace vulnprio::bayes

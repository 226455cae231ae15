#include <doctest.h>

#include <future>

#include <httplib.h>

#include "bayes/graph_io.hpp"
#include "pipeline/scored.hpp"
#include "service/service.hpp"
#include "support.hpp"

using namespace vulnprio;
using namespace vulnprio::service;
using nlohmann::json;

namespace {

json purdue_graph() { return testsupport::read_json(testsupport::data_dir() / "purdue.json"); }
json purdue_scores() { return testsupport::read_json(testsupport::data_dir() / "purdue_scores.json"); }

std::string load_body(const json& graph, const json& scores) {
  return json{{"graph", graph}, {"scores", scores}}.dump();
}

std::string load_purdue(ModelRegistry& registry) {
  const auto r = handle_load(registry, load_body(purdue_graph(), purdue_scores()));
  REQUIRE(r.status == 201);
  return r.body["model_id"].get<std::string>();
}

Response query(ModelRegistry& registry, const std::string& id, json body) {
  return handle_query(registry, id, body.dump());
}

// A(prior 1.0) -> B(CVE-2020-1472)
std::pair<json, json> chain_docs() {
  json graph = {{"cpt_mode", "any_parent_or"},
                {"nodes",
                 {{{"id", "A"}, {"label", "entry"}, {"kind", "attacker_entry"}},
                  {{"id", "B"}, {"label", "dc"}, {"kind", "compromise_event"}, {"cve", "CVE-2020-1472"}, {"score", 10.0}}}},
                {"edges", {{{"from", "A"}, {"to", "B"}}}},
                {"root_priors", {{"A", 1.0}}}};
  auto scores = purdue_scores();
  return {graph, scores};
}

}  // namespace

TEST_CASE("loading a model") {
  ModelRegistry registry;
  const auto id = load_purdue(registry);
  CHECK_FALSE(id.empty());
  CHECK(load_purdue(registry) != id);
  CHECK(registry.size() == 2);
  CHECK(registry.capacity() == 16);
}

TEST_CASE("loading rejects bad documents with 400") {
  ModelRegistry registry;
  auto cyclic = purdue_graph();
  cyclic["edges"].push_back({{"from", "PLC_1"}, {"to", "HMI_2_Root"}});
  auto r = handle_load(registry, load_body(cyclic, purdue_scores()));
  CHECK(r.status == 400);
  CHECK(r.body["error"] == "Validation");
  bool witnessed = false;
  for (const auto& f : r.body["report"]["findings"]) {
    if (f["kind"] == "Cycle") {
      witnessed = true;
      CHECK(f["witness"] == json{"HMI_2_Root", "PLC_1", "HMI_2_Root"});
    }
  }
  CHECK(witnessed);

  auto scores = purdue_scores();
  auto& scored = scores["scored"];
  for (auto it = scored.begin(); it != scored.end(); ++it) {
    if ((*it)["cve"] == "CVE-2017-6034") {
      scored.erase(it);
      break;
    }
  }
  r = handle_load(registry, load_body(purdue_graph(), scores));
  CHECK(r.status == 400);
  CHECK(r.body["error"] == "MissingScoreFor");
  CHECK(r.body["detail"].get<std::string>().find("CVE-2017-6034") != std::string::npos);

  CHECK(handle_load(registry, "{").status == 400);
  CHECK(handle_load(registry, R"({"graph": {}})").status == 400);
  auto bad_graph = purdue_graph();
  bad_graph["cpt_mode"] = "max";
  CHECK(handle_load(registry, load_body(bad_graph, purdue_scores())).status == 400);
  CHECK(registry.size() == 0);
}

TEST_CASE("query examples") {
  ModelRegistry registry;
  const auto id = load_purdue(registry);
  auto r = query(registry, id, {{"target", "PLC_4"}, {"evidence", {{"PLC_4", true}}}});
  CHECK(r.status == 200);
  CHECK(r.body["probability"] == 1.0);

  auto [graph, scores] = chain_docs();
  const auto chain = handle_load(registry, load_body(graph, scores)).body["model_id"].get<std::string>();
  r = query(registry, chain, {{"target", "B"}, {"variant", "temporal"}});
  CHECK(std::abs(r.body["probability"].get<double>() - 0.89) < 1e-12);
  CHECK(r.body["score_variant"] == "temporal");
  r = query(registry, chain, {{"target", "B"}, {"variant", "base"}});
  CHECK(std::abs(r.body["probability"].get<double>() - 1.0) < 1e-12);

  for (const auto& node : purdue_graph()["nodes"]) {
    const auto target = node["id"].get<std::string>();
    for (json ev : {json::object(), json{{"Remote_Attacker", true}}, json{{"HMI_2_Root", true}}}) {
      const auto base = query(registry, id, {{"target", target}, {"evidence", ev}, {"variant", "base"}});
      const auto temporal = query(registry, id, {{"target", target}, {"evidence", ev}, {"variant", "temporal"}});
      if (!ev.contains(target) && target != "Remote_Attacker") {
        CHECK(temporal.body["probability"].get<double>() <= base.body["probability"].get<double>() + 1e-12);
      }
    }
  }
}

TEST_CASE("query errors map to status codes") {
  ModelRegistry registry;
  const auto id = load_purdue(registry);
  CHECK(query(registry, "nope", {{"target", "PLC_1"}}).status == 404);
  CHECK(query(registry, id, {{"target", "PLC_9"}}).status == 404);
  CHECK(query(registry, id, {{"target", "PLC_1"}, {"evidence", {{"PLC_9", true}}}}).status == 404);
  const auto zero = query(registry, id, {{"target", "PLC_1"}, {"evidence", {{"Remote_Attacker", false}, {"PLC_1", true}}}});
  CHECK(zero.status == 409);
  CHECK(zero.body["error"] == "ZeroProbabilityEvidence");
  CHECK(query(registry, id, {{"target", "PLC_1"}, {"variant", "environmental"}}).status == 400);
  CHECK(query(registry, id, {{"evidence", json::object()}}).status == 400);
  CHECK(query(registry, id, {{"target", "PLC_1"}, {"evidence", {{"PLC_2", "yes"}}}}).status == 400);
  CHECK(handle_query(registry, id, "not json").status == 400);
}

TEST_CASE("repeated queries are identical and leave the model unchanged") {
  ModelRegistry registry;
  const auto id = load_purdue(registry);
  const json body = {{"target", "PLC_3"}, {"evidence", {{"DMZ_Bypass", true}}}};
  const auto first = query(registry, id, body).body;
  const auto nodes = handle_nodes(registry, id).body;
  for (int i = 0; i < 20; ++i) CHECK(query(registry, id, body).body == first);
  CHECK(handle_nodes(registry, id).body == nodes);
}

TEST_CASE("node listing is topological with ties by id") {
  ModelRegistry registry;
  const auto id = load_purdue(registry);
  const auto r = handle_nodes(registry, id);
  REQUIRE(r.status == 200);
  const auto& nodes = r.body["nodes"];
  REQUIRE(nodes.size() == 13);
  std::size_t with_cve = 0;
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    position[nodes[i]["id"]] = i;
    if (!nodes[i]["cve"].is_null()) ++with_cve;
    for (const auto& p : nodes[i]["parents"]) CHECK(position.contains(p.get<std::string>()));
  }
  CHECK(with_cve == 12);
  CHECK(nodes[0]["id"] == "Remote_Attacker");
  CHECK(nodes[1]["id"] == "DMZ_Bypass");
  CHECK(nodes[2]["id"] == "Perimeter_VPN_Bypass");
  CHECK(position.at("Domain_Controller_Takeover") < position.at("Historian_Root"));
  for (const auto& n : nodes) {
    if (n["cve"] == "CVE-2020-1472") {
      CHECK(n["base_score"] == 10.0);
      CHECK(n["temporal_score"] == 8.9);
      CHECK(n["layer"].is_number());
    }
    CHECK(query(registry, id, {{"target", n["id"]}}).status == 200);
  }
  CHECK(handle_nodes(registry, "nope").status == 404);
}

TEST_CASE("registry evicts the least recently used model") {
  ModelRegistry registry(3);
  std::vector<std::string> ids;
  for (int i = 0; i < 3; ++i) ids.push_back(load_purdue(registry));
  CHECK(registry.find(ids[0]));
  ids.push_back(load_purdue(registry));
  CHECK(registry.size() == 3);
  CHECK(registry.find(ids[0]));
  CHECK_FALSE(registry.find(ids[1]));
  CHECK(registry.find(ids[2]));
  CHECK(registry.find(ids[3]));
  CHECK(handle_nodes(registry, ids[1]).status == 404);
}

TEST_CASE("concurrent loads and queries") {
  ModelRegistry registry(4);
  const auto id = load_purdue(registry);
  const json body = {{"target", "PLC_2"}, {"evidence", {{"Remote_Attacker", true}}}};
  const auto expected = query(registry, id, body).body;
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < 8; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (int i = 0; i < 10; ++i) {
        if (w % 2) {
          handle_load(registry, load_body(purdue_graph(), purdue_scores()));
        } else {
          const auto r = query(registry, id, body);
          if (r.status == 200) CHECK(r.body == expected);
        }
      }
    }));
  }
  for (auto& j : jobs) j.get();
  CHECK(registry.size() <= 4);
}

TEST_CASE("HTTP transport with CORS") {
  ServiceOptions options;
  options.port = 0;
  options.cors_origin = "http://ui.example";
  Server server(options);
  const int port = server.start();
  REQUIRE(port > 0);

  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/models", load_body(purdue_graph(), purdue_scores()), "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://ui.example");
  const auto id = json::parse(res->body)["model_id"].get<std::string>();

  res = client.Get(("/models/" + id + "/nodes").c_str());
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["nodes"].size() == 13);

  const json body = {{"target", "PLC_4"}, {"evidence", {{"HMI_2_Root", true}}}, {"variant", "base"}};
  res = client.Post(("/models/" + id + "/query").c_str(), body.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body) == handle_query(server.registry(), id, body.dump()).body);

  res = client.Options(("/models/" + id + "/query").c_str());
  REQUIRE(res);
  CHECK(res->status == 204);
  CHECK(res->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  res = client.Get("/models/nope/nodes");
  REQUIRE(res);
  CHECK(res->status == 404);
  server.stop();
}

TEST_CASE("CORS can be disabled") {
  ServiceOptions options;
  options.port = 0;
  options.cors_origin = "";
  Server server(options);
  httplib::Client client("127.0.0.1", server.start());
  auto res = client.Get("/models/nope/nodes");
  REQUIRE(res);
  CHECK_FALSE(res->has_header("Access-Control-Allow-Origin"));
  server.stop();
}

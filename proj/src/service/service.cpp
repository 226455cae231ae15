#include "service/service.hpp"

#include <cstdio>
#include <ctime>

#include <httplib.h>

#include "bayes/graph_io.hpp"
#include "common/error.hpp"

namespace vulnprio::service {

using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

Response error_response(int status, const Error& e) {
  return {status, {{"error", std::string(to_string(e.code()))}, {"detail", e.what()}}};
}

Response bad_request(const std::string& detail) {
  return {400, {{"error", "BadRequest"}, {"detail", detail}}};
}

Response not_found_model(const std::string& id) {
  return {404, {{"error", "NotFound"}, {"detail", "unknown model '" + id + "'"}}};
}

}  // namespace

ModelRegistry::ModelRegistry(std::size_t capacity)
    : capacity_(capacity == 0 ? 1 : capacity), rng_(std::random_device{}()) {}

std::string ModelRegistry::next_id() {
  char buf[40];
  std::snprintf(buf, sizeof buf, "m%llx-%016llx", static_cast<unsigned long long>(++counter_),
                static_cast<unsigned long long>(rng_()));
  return buf;
}

std::string ModelRegistry::insert(pipeline::ScoredModel model) {
  std::lock_guard lock(mutex_);
  std::string id = next_id();
  auto stored = std::make_shared<const SessionModel>(SessionModel{id, std::move(model), utc_now()});
  lru_.push_front(id);
  models_.emplace(id, Slot{std::move(stored), lru_.begin()});
  while (models_.size() > capacity_) {
    models_.erase(lru_.back());
    lru_.pop_back();
  }
  return id;
}

std::shared_ptr<const SessionModel> ModelRegistry::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = models_.find(id);
  if (it == models_.end()) return nullptr;
  lru_.splice(lru_.begin(), lru_, it->second.lru_position);
  return it->second.model;
}

std::size_t ModelRegistry::size() const {
  std::lock_guard lock(mutex_);
  return models_.size();
}

json list_nodes(const pipeline::ScoredModel& model) {
  const auto& base = model.net(bayes::ScoreVariant::Base);
  const auto& temporal = model.net(bayes::ScoreVariant::Temporal);
  json nodes = json::array();
  for (auto i : base.topological_order()) {
    const auto& n = base.graph().nodes[i];
    const auto& t = temporal.graph().nodes[i];
    json j = {{"id", n.id}, {"label", n.label}, {"kind", std::string(bayes::to_string(n.kind))}};
    j["layer"] = n.layer ? json(*n.layer) : json(nullptr);
    j["cve"] = n.cve ? json(*n.cve) : json(nullptr);
    j["base_score"] = n.score ? json(n.score->value()) : json(nullptr);
    j["temporal_score"] = t.score ? json(t.score->value()) : json(nullptr);
    json parents = json::array();
    for (auto p : base.parents(i)) parents.push_back(base.id(p));
    j["parents"] = std::move(parents);
    nodes.push_back(std::move(j));
  }
  return nodes;
}

Response handle_load(ModelRegistry& registry, const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    return bad_request(std::string("body is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("graph") || !doc.contains("scores")) {
    return bad_request("body must be {\"graph\": ..., \"scores\": ...}");
  }
  try {
    auto graph = bayes::graph_from_json(doc["graph"]);
    auto report = bayes::validate(graph);
    if (!report.ok()) {
      return {400, {{"error", "Validation"}, {"detail", report.summary()}, {"report", report.to_json()}}};
    }
    auto scores = pipeline::score_run_from_json(doc["scores"]);
    auto id = registry.insert(pipeline::ScoredModel(std::move(graph), std::move(scores)));
    return {201, {{"model_id", id}}};
  } catch (const Error& e) {
    return error_response(400, e);
  }
}

Response handle_nodes(ModelRegistry& registry, const std::string& model_id) {
  auto session = registry.find(model_id);
  if (!session) return not_found_model(model_id);
  return {200, {{"model_id", model_id}, {"nodes", list_nodes(session->model)}}};
}

Response handle_query(ModelRegistry& registry, const std::string& model_id,
                      const std::string& body) {
  auto session = registry.find(model_id);
  if (!session) return not_found_model(model_id);
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    return bad_request(std::string("body is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("target") || !doc["target"].is_string()) {
    return bad_request("body must carry a string 'target'");
  }
  auto variant = bayes::parse_score_variant(doc.value("variant", std::string("temporal")));
  if (!variant) return bad_request("variant must be 'base' or 'temporal'");
  try {
    auto evidence = bayes::evidence_from_json(doc.value("evidence", json::object()));
    auto result = session->model.query(doc["target"].get<std::string>(), evidence, *variant);
    return {200, result.to_json()};
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::UnknownNode: return error_response(404, e);
      case ErrorCode::ZeroProbabilityEvidence: return error_response(409, e);
      case ErrorCode::Parse: return error_response(400, e);
      default: return error_response(500, e);
    }
  }
}

struct Server::Impl {
  httplib::Server http;
};

Server::Server(ServiceOptions options)
    : options_(std::move(options)),
      registry_(options_.max_models),
      impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;
  const std::string origin = options_.cors_origin;
  auto reply = [origin](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  http.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    if (!origin.empty()) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }
  });
  http.Options(R"(/models.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  http.Post("/models", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_load(registry_, req.body));
  });
  http.Get(R"(/models/([^/]+)/nodes)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_nodes(registry_, req.matches[1]));
  });
  http.Post(R"(/models/([^/]+)/query)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_query(registry_, req.matches[1], req.body));
  });
}

Server::~Server() { stop(); }

int Server::start() {
  int port = options_.port;
  if (port == 0) {
    port = impl_->http.bind_to_any_port(options_.host);
  } else if (!impl_->http.bind_to_port(options_.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error(ErrorCode::Config, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  thread_ = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void Server::run() {
  if (!impl_->http.listen(options_.host, options_.port)) {
    throw Error(ErrorCode::Config, "cannot listen on " + options_.host + ":" + std::to_string(options_.port));
  }
}

void Server::wait() {
  if (thread_.joinable()) thread_.join();
}

void Server::stop() {
  impl_->http.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace vulnprio::service

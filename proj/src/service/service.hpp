#pragma once

// JSON-over-HTTP facade:
//   POST /models                 {"graph": {...}, "scores": {...}} -> {"model_id"}
//   GET  /models/{id}/nodes      -> {"model_id", "nodes": [...]}
//   POST /models/{id}/query      {"target", "evidence", "variant"} -> QueryResult

#include <atomic>
#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "pipeline/report.hpp"

namespace vulnprio::service {

struct SessionModel {
  std::string id;
  pipeline::ScoredModel model;
  std::string created_at;
};

/// Insert-only map of immutable models with least-recently-used eviction.
class ModelRegistry {
 public:
  static constexpr std::size_t kDefaultCapacity = 16;

  explicit ModelRegistry(std::size_t capacity = kDefaultCapacity);

  /// Builds and stores a model; returns its id.
  std::string insert(pipeline::ScoredModel model);
  /// Marks the model as recently used. nullptr when unknown or evicted.
  std::shared_ptr<const SessionModel> find(const std::string& id);
  std::size_t size() const;
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::string next_id();

  struct Slot {
    std::shared_ptr<const SessionModel> model;
    std::list<std::string>::iterator lru_position;
  };

  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<std::string> lru_;  // front = most recent
  std::map<std::string, Slot> models_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 rng_;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

// Transport-independent handlers; the HTTP layer only routes to these.
Response handle_load(ModelRegistry& registry, const std::string& body);
Response handle_nodes(ModelRegistry& registry, const std::string& model_id);
Response handle_query(ModelRegistry& registry, const std::string& model_id,
                      const std::string& body);

/// Node listing used by the nodes endpoint: topological order, ties by id.
nlohmann::json list_nodes(const pipeline::ScoredModel& model);

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;                   // 0 picks a free port
  std::string cors_origin = "*";
  std::size_t max_models = ModelRegistry::kDefaultCapacity;
};

class Server {
 public:
  explicit Server(ServiceOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  /// Throws Error(Config) when binding fails.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  /// Blocks until a server started with start() stops.
  void wait();
  void stop();

  ModelRegistry& registry() noexcept { return registry_; }

 private:
  struct Impl;
  ServiceOptions options_;
  ModelRegistry registry_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace vulnprio::service

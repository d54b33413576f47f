#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "argeval/llm.hpp"
#include "argeval/qbaf.hpp"
#include "argeval/store.hpp"

namespace argeval {

struct ServiceOptions {
  Semantics semantics = Semantics::DfQuad;
  int max_attempts = 3;
  /// POST /evaluate resolves dataset references relative to this directory
  /// and refuses paths that leave it. Empty disables the endpoint.
  std::filesystem::path datasets_root;
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

/// JSON API over an ArtifactStore:
///
///   GET  /artifacts/revision          GET  /ontology
///   GET  /qbafs                       GET  /qbafs/{option}
///   GET  /schema                      GET  /contest/log
///   POST /infer {case_text | params, overrides?}
///   POST /contest {edit, justification}
///   POST /contest/replay {to_revision?}
///   POST /evaluate {dataset, gains?, use_case_params?}
///
/// Errors come back as {"error": message} with 400 (malformed request), 404
/// (unknown route or id), 422 (rejected edit or invalid parameters), 502
/// (model reply unusable) or 503 (no model configured).
class Service {
 public:
  /// `client` may be null; requests that need the model then get 503.
  Service(ArtifactStore& store, llm::Client* client, ServiceOptions options = {});
  ~Service();

  /// Routing and handling without sockets; thread-safe.
  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

  /// Binds and serves until stop(). Returns false if the address cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it, or -1. Serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  HttpResponse route(const std::string& method, const std::string& path, const nlohmann::json& body);

  ArtifactStore& store_;
  llm::Client* client_;
  ServiceOptions options_;
  struct Server;
  std::unique_ptr<Server> server_;
};

}  // namespace argeval

#pragma once

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argeval/llm.hpp"

namespace argeval::llm {

struct ScriptedReply {
  std::string text;
  TokenUsage usage;
};

class ScriptExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic scripted backend for tests and offline runs.
///
/// Lookup order for a request: a content-addressed reply (reusable, order
/// independent), then the next queued reply for the request's task, then the
/// next queued reply for its stage name. Script format:
///
///   {"default_usage": {"prompt_tokens": 0, "completion_tokens": 0},
///    "sequences": {"score_argument": ["0.8", {"json": {...}, "prompt_tokens": 10}]},
///    "by_content": {"<content_key>": "..."}}
class MockBackend : public Backend {
 public:
  MockBackend() = default;
  explicit MockBackend(const nlohmann::json& script) { load(script); }

  void load(const nlohmann::json& script);
  void load_file(const std::string& path);

  void enqueue(const std::string& key, ScriptedReply reply);
  void enqueue(const std::string& key, std::string text) { enqueue(key, ScriptedReply{std::move(text), default_usage_}); }
  void respond_to(const std::string& content_key, ScriptedReply reply);
  void set_default_usage(TokenUsage usage) { default_usage_ = usage; }

  static std::string content_key(const GenerationRequest& request);

  Completion complete(const GenerationRequest& request) override;

  std::vector<GenerationRequest> captured() const;
  std::size_t call_count() const;
  std::size_t call_count(const std::string& task) const;
  std::size_t pending() const;

 private:
  ScriptedReply parse_reply(const nlohmann::json& j) const;

  mutable std::mutex mutex_;
  std::map<std::string, std::deque<ScriptedReply>> queues_;
  std::map<std::string, ScriptedReply> by_content_;
  std::vector<GenerationRequest> captured_;
  TokenUsage default_usage_;
};

struct HttpBackendConfig {
  /// Base URL of an OpenAI-compatible API, e.g. http://localhost:8000/v1
  std::string endpoint;
  std::string api_key;
  std::string model;
  /// Passed through as `reasoning_effort` when non-empty.
  std::string reasoning_effort;
  int timeout_seconds = 300;

  /// ARGEVAL_LLM_ENDPOINT, ARGEVAL_LLM_API_KEY, ARGEVAL_LLM_MODEL,
  /// ARGEVAL_LLM_REASONING_EFFORT, ARGEVAL_LLM_TIMEOUT.
  static HttpBackendConfig from_env();
  static HttpBackendConfig from_json(const nlohmann::json& j);
};

/// Chat-completions client. Response schemas are forwarded as
/// `response_format: {type: json_schema}`; the Client still validates replies.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  Completion complete(const GenerationRequest& request) override;

  nlohmann::json request_body(const GenerationRequest& request) const;

 private:
  HttpBackendConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_prefix_;
};

}  // namespace argeval::llm

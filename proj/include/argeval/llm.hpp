#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace argeval::llm {

/// Pipeline stage a call is billed to.
enum class Stage { Ontology, QbafConstruction, Inference };

const char* to_string(Stage stage);
Stage stage_from_string(std::string_view name);

struct GenerationRequest {
  Stage stage = Stage::Inference;
  /// Fine-grained task name ("mine_baf", "score_argument", ...); mock scripts key on it.
  std::string task;
  std::string system_prompt;
  std::string user_prompt;
  std::optional<nlohmann::json> response_schema;
  double temperature = 1.0;
  int max_output_tokens = 4096;
  /// Overrides the client's attempt budget for this call.
  std::optional<int> max_attempts;
};

struct TokenUsage {
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& other) {
    prompt_tokens += other.prompt_tokens;
    completion_tokens += other.completion_tokens;
    return *this;
  }
  bool operator==(const TokenUsage&) const = default;
};

struct Completion {
  std::string text;
  TokenUsage usage;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Budget exhausted without a usable reply.
class GenerationError : public std::runtime_error {
 public:
  GenerationError(const std::string& message, std::string last_output, int attempts);
  const std::string& last_output() const { return last_output_; }
  int attempts() const { return attempts_; }

 private:
  std::string last_output_;
  int attempts_;
};

/// One raw round trip to a model. Implementations throw TransportError when
/// the model could not be reached; they never retry on their own.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Completion complete(const GenerationRequest& request) = 0;
};

struct UsageReport {
  std::map<Stage, TokenUsage> per_stage;
  TokenUsage total;

  /// Same report with `stage` dropped from the total.
  UsageReport excluding(Stage stage) const;
  nlohmann::json to_json() const;
};

UsageReport usage_report_from_json(const nlohmann::json& j);

/// Thread-safe per-stage token counter.
class UsageAccumulator {
 public:
  void record(Stage stage, const TokenUsage& usage);
  void merge(const UsageReport& report);
  UsageReport report() const;

 private:
  mutable std::mutex mutex_;
  std::map<Stage, TokenUsage> per_stage_;
};

struct RetryPolicy {
  /// Attempts per call for unusable replies (schema or semantic rejection).
  int max_attempts = 3;
  /// Extra attempts per call when the backend cannot be reached.
  int transport_retries = 2;
  std::chrono::milliseconds transport_backoff{250};
};

struct GenerationResult {
  std::string text;
  std::optional<nlohmann::json> value;  // set when the request carried a response schema
  int attempts = 0;
  TokenUsage usage;
};

/// Returns an error message to reject a reply, or nothing to accept it.
using ReplyCheck = std::function<std::optional<std::string>(const GenerationResult&)>;

/// Accounting, schema enforcement and error-feedback retries on top of a Backend.
class Client {
 public:
  Client(Backend& backend, UsageAccumulator& usage, RetryPolicy policy = {})
      : backend_(backend), usage_(usage), policy_(policy) {}

  /// Calls the backend until a reply parses, validates against the request's
  /// response schema and passes `check`. Each rejection is appended to the
  /// next prompt. Throws GenerationError when the attempt budget runs out and
  /// TransportError when the backend stays unreachable.
  GenerationResult generate(const GenerationRequest& request, const ReplyCheck& check = {});

  UsageAccumulator& usage() { return usage_; }
  const RetryPolicy& policy() const { return policy_; }

 private:
  Completion call_backend(const GenerationRequest& request);

  Backend& backend_;
  UsageAccumulator& usage_;
  RetryPolicy policy_;
};

/// Validates `value` against a JSON Schema (types, properties, required,
/// additionalProperties, items, enum, const, numeric and length bounds,
/// anyOf/allOf/oneOf/not). Returns the first violation, if any.
std::optional<std::string> check_json_schema(const nlohmann::json& value, const nlohmann::json& schema);

/// Parses a model reply as JSON, tolerating surrounding code fences.
std::optional<nlohmann::json> parse_reply_json(std::string_view text);

}  // namespace argeval::llm

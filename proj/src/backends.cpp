#include "argeval/backends.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include <httplib.h>

#include "argeval/hash.hpp"

namespace argeval::llm {

// ---------------------------------------------------------------------------
// MockBackend

ScriptedReply MockBackend::parse_reply(const nlohmann::json& j) const {
  ScriptedReply reply{"", default_usage_};
  if (j.is_string()) {
    reply.text = j.get<std::string>();
    return reply;
  }
  if (!j.is_object()) throw std::invalid_argument("mock reply must be a string or an object");
  if (j.contains("json")) {
    reply.text = j.at("json").dump();
  } else {
    reply.text = j.at("text").get<std::string>();
  }
  reply.usage.prompt_tokens = j.value("prompt_tokens", default_usage_.prompt_tokens);
  reply.usage.completion_tokens = j.value("completion_tokens", default_usage_.completion_tokens);
  return reply;
}

void MockBackend::load(const nlohmann::json& script) {
  if (script.contains("default_usage")) {
    const auto& u = script.at("default_usage");
    default_usage_ = {u.value("prompt_tokens", std::uint64_t{0}), u.value("completion_tokens", std::uint64_t{0})};
  }
  if (script.contains("sequences")) {
    for (const auto& [key, replies] : script.at("sequences").items()) {
      for (const auto& r : replies) enqueue(key, parse_reply(r));
    }
  }
  if (script.contains("by_content")) {
    for (const auto& [key, r] : script.at("by_content").items()) respond_to(key, parse_reply(r));
  }
}

void MockBackend::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("mock script not found: " + path);
  load(nlohmann::json::parse(in));
}

void MockBackend::enqueue(const std::string& key, ScriptedReply reply) {
  std::lock_guard lock(mutex_);
  queues_[key].push_back(std::move(reply));
}

void MockBackend::respond_to(const std::string& content_key, ScriptedReply reply) {
  std::lock_guard lock(mutex_);
  by_content_[content_key] = std::move(reply);
}

std::string MockBackend::content_key(const GenerationRequest& request) {
  std::string material;
  material.append(to_string(request.stage)).push_back('\x1f');
  material.append(request.task).push_back('\x1f');
  material.append(request.system_prompt).push_back('\x1f');
  material.append(request.user_prompt);
  return to_hex(fnv1a64(material));
}

Completion MockBackend::complete(const GenerationRequest& request) {
  std::lock_guard lock(mutex_);
  captured_.push_back(request);
  if (!by_content_.empty()) {
    if (auto it = by_content_.find(content_key(request)); it != by_content_.end()) {
      return {it->second.text, it->second.usage};
    }
  }
  for (const std::string& key : {request.task, std::string(to_string(request.stage))}) {
    auto it = queues_.find(key);
    if (it == queues_.end() || it->second.empty()) continue;
    ScriptedReply reply = std::move(it->second.front());
    it->second.pop_front();
    return {std::move(reply.text), reply.usage};
  }
  throw ScriptExhausted("mock script has no reply for task '" + request.task + "' (content key " +
                        content_key(request) + ")");
}

std::vector<GenerationRequest> MockBackend::captured() const {
  std::lock_guard lock(mutex_);
  return captured_;
}

std::size_t MockBackend::call_count() const {
  std::lock_guard lock(mutex_);
  return captured_.size();
}

std::size_t MockBackend::call_count(const std::string& task) const {
  std::lock_guard lock(mutex_);
  return static_cast<std::size_t>(std::count_if(captured_.begin(), captured_.end(),
                                                [&](const GenerationRequest& r) { return r.task == task; }));
}

std::size_t MockBackend::pending() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [k, q] : queues_) n += q.size();
  return n;
}

// ---------------------------------------------------------------------------
// HttpBackend

HttpBackendConfig HttpBackendConfig::from_env() {
  auto env = [](const char* name) {
    const char* v = std::getenv(name);
    return std::string(v ? v : "");
  };
  HttpBackendConfig c;
  c.endpoint = env("ARGEVAL_LLM_ENDPOINT");
  c.api_key = env("ARGEVAL_LLM_API_KEY");
  c.model = env("ARGEVAL_LLM_MODEL");
  c.reasoning_effort = env("ARGEVAL_LLM_REASONING_EFFORT");
  if (auto t = env("ARGEVAL_LLM_TIMEOUT"); !t.empty()) c.timeout_seconds = std::stoi(t);
  return c;
}

HttpBackendConfig HttpBackendConfig::from_json(const nlohmann::json& j) {
  HttpBackendConfig c;
  c.endpoint = j.at("endpoint").get<std::string>();
  c.api_key = j.value("api_key", "");
  c.model = j.value("model", "");
  c.reasoning_effort = j.value("reasoning_effort", "");
  c.timeout_seconds = j.value("timeout_seconds", 300);
  return c;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.endpoint.find("://");
  if (config_.endpoint.empty() || scheme_end == std::string::npos) {
    throw std::invalid_argument("LLM endpoint must be an absolute URL, got '" + config_.endpoint + "'");
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  origin_ = config_.endpoint.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : config_.endpoint.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

nlohmann::json HttpBackend::request_body(const GenerationRequest& request) const {
  nlohmann::json body = {
      {"model", config_.model},
      {"messages",
       {{{"role", "system"}, {"content", request.system_prompt}}, {{"role", "user"}, {"content", request.user_prompt}}}},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens},
  };
  if (request.response_schema) {
    body["response_format"] = {
        {"type", "json_schema"},
        {"json_schema", {{"name", request.task.empty() ? "response" : request.task}, {"schema", *request.response_schema}}}};
  }
  if (!config_.reasoning_effort.empty()) body["reasoning_effort"] = config_.reasoning_effort;
  return body;
}

Completion HttpBackend::complete(const GenerationRequest& request) {
  httplib::Client client(origin_);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(std::chrono::seconds(config_.timeout_seconds));
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(path_prefix_ + "/chat/completions", headers, request_body(request).dump(),
                         "application/json");
  if (!res) throw TransportError("LLM endpoint unreachable: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("LLM endpoint returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw std::runtime_error("LLM endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(std::string("malformed response body: ") + e.what());
  }
  Completion out;
  const auto& message = reply.at("choices").at(0).at("message");
  if (auto it = message.find("content"); it != message.end() && it->is_string()) out.text = it->get<std::string>();
  if (reply.contains("usage")) {
    out.usage.prompt_tokens = reply["usage"].value("prompt_tokens", std::uint64_t{0});
    out.usage.completion_tokens = reply["usage"].value("completion_tokens", std::uint64_t{0});
  }
  return out;
}

}  // namespace argeval::llm

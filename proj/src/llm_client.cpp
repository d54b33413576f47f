#include <algorithm>
#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "argeval/llm.hpp"

namespace argeval::llm {

namespace {

bool type_matches(const nlohmann::json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") {
    if (v.is_number_integer()) return true;
    if (v.is_number_float()) {
      const double d = v.get<double>();
      return std::isfinite(d) && std::nearbyint(d) == d;
    }
  }
  return false;
}

bool json_value_equal(const nlohmann::json& a, const nlohmann::json& b) {
  if (a.is_number() && b.is_number()) return a.get<double>() == b.get<double>();
  if (a.is_array() && b.is_array()) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!json_value_equal(a[i], b[i])) return false;
    }
    return true;
  }
  if (a.is_object() && b.is_object()) {
    if (a.size() != b.size()) return false;
    for (const auto& [k, v] : a.items()) {
      if (!b.contains(k) || !json_value_equal(v, b.at(k))) return false;
    }
    return true;
  }
  return a == b;
}

std::optional<std::string> check_at(const nlohmann::json& v, const nlohmann::json& schema, const std::string& path) {
  if (schema.is_boolean()) {
    if (schema.get<bool>()) return std::nullopt;
    return path + ": no value allowed here";
  }
  if (!schema.is_object()) return std::nullopt;
  auto fail = [&](const std::string& what) { return std::optional<std::string>(path + ": " + what); };

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_string()) {
      ok = type_matches(v, it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& t : *it) ok = ok || (t.is_string() && type_matches(v, t.get<std::string>()));
    }
    if (!ok) return fail("expected type " + it->dump() + ", got " + v.dump());
  }
  if (auto it = schema.find("const"); it != schema.end() && !json_value_equal(v, *it)) {
    return fail("expected " + it->dump());
  }
  if (auto it = schema.find("enum"); it != schema.end() && it->is_array()) {
    bool found = false;
    for (const auto& e : *it) found = found || json_value_equal(v, e);
    if (!found) return fail("value " + v.dump() + " not in " + it->dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && x < it->get<double>()) return fail("below minimum");
    if (auto it = schema.find("maximum"); it != schema.end() && x > it->get<double>()) return fail("above maximum");
    if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && x <= it->get<double>()) {
      return fail("not above exclusiveMinimum");
    }
    if (auto it = schema.find("exclusiveMaximum"); it != schema.end() && x >= it->get<double>()) {
      return fail("not below exclusiveMaximum");
    }
  }
  if (v.is_string()) {
    // Byte length is close enough for the ASCII-heavy replies this checks.
    const auto n = v.get_ref<const std::string&>().size();
    if (auto it = schema.find("minLength"); it != schema.end() && n < it->get<std::size_t>()) return fail("string too short");
    if (auto it = schema.find("maxLength"); it != schema.end() && n > it->get<std::size_t>()) return fail("string too long");
  }
  if (v.is_array()) {
    if (auto it = schema.find("minItems"); it != schema.end() && v.size() < it->get<std::size_t>()) return fail("too few items");
    if (auto it = schema.find("maxItems"); it != schema.end() && v.size() > it->get<std::size_t>()) return fail("too many items");
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (auto err = check_at(v[i], *it, path + "[" + std::to_string(i) + "]")) return err;
      }
    }
  }
  if (v.is_object()) {
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& name : *it) {
        if (!v.contains(name.get<std::string>())) return fail("missing required property '" + name.get<std::string>() + "'");
      }
    }
    const auto props = schema.find("properties");
    for (const auto& [k, child] : v.items()) {
      if (props != schema.end() && props->contains(k)) {
        if (auto err = check_at(child, props->at(k), path + "." + k)) return err;
      } else if (auto extra = schema.find("additionalProperties"); extra != schema.end()) {
        if (extra->is_boolean() && !extra->get<bool>()) return fail("unexpected property '" + k + "'");
        if (auto err = check_at(child, *extra, path + "." + k)) return err;
      }
    }
  }
  if (auto it = schema.find("allOf"); it != schema.end()) {
    for (const auto& sub : *it) {
      if (auto err = check_at(v, sub, path)) return err;
    }
  }
  if (auto it = schema.find("anyOf"); it != schema.end()) {
    bool any = false;
    for (const auto& sub : *it) any = any || !check_at(v, sub, path);
    if (!any) return fail("matches none of anyOf");
  }
  if (auto it = schema.find("oneOf"); it != schema.end()) {
    int n = 0;
    for (const auto& sub : *it) n += check_at(v, sub, path) ? 0 : 1;
    if (n != 1) return fail("must match exactly one of oneOf");
  }
  if (auto it = schema.find("not"); it != schema.end() && !check_at(v, *it, path)) {
    return fail("matches a schema it must not match");
  }
  return std::nullopt;
}

}  // namespace

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::Ontology: return "ontology";
    case Stage::QbafConstruction: return "qbaf-construction";
    case Stage::Inference: return "inference";
  }
  return "inference";
}

Stage stage_from_string(std::string_view name) {
  if (name == "ontology") return Stage::Ontology;
  if (name == "qbaf-construction") return Stage::QbafConstruction;
  if (name == "inference") return Stage::Inference;
  throw std::invalid_argument("unknown stage '" + std::string(name) + "'");
}

GenerationError::GenerationError(const std::string& message, std::string last_output, int attempts)
    : std::runtime_error(message), last_output_(std::move(last_output)), attempts_(attempts) {}

UsageReport UsageReport::excluding(Stage stage) const {
  UsageReport out;
  for (const auto& [s, u] : per_stage) {
    if (s == stage) continue;
    out.per_stage[s] = u;
    out.total += u;
  }
  return out;
}

nlohmann::json UsageReport::to_json() const {
  nlohmann::json stages = nlohmann::json::object();
  for (const auto& [s, u] : per_stage) {
    stages[to_string(s)] = {{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}};
  }
  return {{"stages", stages},
          {"total", {{"prompt_tokens", total.prompt_tokens}, {"completion_tokens", total.completion_tokens}}}};
}

UsageReport usage_report_from_json(const nlohmann::json& j) {
  UsageReport r;
  for (const auto& [name, u] : j.at("stages").items()) {
    TokenUsage usage{u.at("prompt_tokens").get<std::uint64_t>(), u.at("completion_tokens").get<std::uint64_t>()};
    r.per_stage[stage_from_string(name)] = usage;
    r.total += usage;
  }
  return r;
}

void UsageAccumulator::record(Stage stage, const TokenUsage& usage) {
  std::lock_guard lock(mutex_);
  per_stage_[stage] += usage;
}

void UsageAccumulator::merge(const UsageReport& report) {
  std::lock_guard lock(mutex_);
  for (const auto& [s, u] : report.per_stage) per_stage_[s] += u;
}

UsageReport UsageAccumulator::report() const {
  std::lock_guard lock(mutex_);
  UsageReport r;
  for (auto s : {Stage::Ontology, Stage::QbafConstruction, Stage::Inference}) {
    auto it = per_stage_.find(s);
    r.per_stage[s] = it == per_stage_.end() ? TokenUsage{} : it->second;
    r.total += r.per_stage[s];
  }
  return r;
}

std::optional<std::string> check_json_schema(const nlohmann::json& value, const nlohmann::json& schema) {
  return check_at(value, schema, "$");
}

std::optional<nlohmann::json> parse_reply_json(std::string_view text) {
  std::string_view body = text;
  if (auto open = body.find("```"); open != std::string_view::npos) {
    auto start = body.find('\n', open);
    auto close = start == std::string_view::npos ? std::string_view::npos : body.find("```", start);
    if (close != std::string_view::npos) body = body.substr(start + 1, close - start - 1);
  }
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    return std::nullopt;
  }
}

Completion Client::call_backend(const GenerationRequest& request) {
  for (int attempt = 0;; ++attempt) {
    try {
      return backend_.complete(request);
    } catch (const TransportError& e) {
      if (attempt >= policy_.transport_retries) throw;
      spdlog::warn("{}: transport failure ({}), retrying", request.task, e.what());
      std::this_thread::sleep_for(policy_.transport_backoff * (attempt + 1));
    }
  }
}

GenerationResult Client::generate(const GenerationRequest& request, const ReplyCheck& check) {
  if (request.system_prompt.empty() || request.user_prompt.empty()) {
    throw std::invalid_argument("generation prompts must be non-empty");
  }
  if (request.temperature < 0) throw std::invalid_argument("temperature must be non-negative");

  GenerationRequest current = request;
  GenerationResult result;
  std::string last_error;
  const int budget = std::max(1, request.max_attempts.value_or(policy_.max_attempts));
  for (int attempt = 1; attempt <= budget; ++attempt) {
    Completion completion = call_backend(current);
    usage_.record(request.stage, completion.usage);
    result.usage += completion.usage;
    result.text = completion.text;
    result.attempts = attempt;
    result.value.reset();

    std::optional<std::string> error;
    if (request.response_schema) {
      result.value = parse_reply_json(completion.text);
      if (!result.value) {
        error = "reply is not valid JSON";
      } else {
        error = check_json_schema(*result.value, *request.response_schema);
      }
    }
    if (!error && check) error = check(result);
    if (!error) return result;

    last_error = *error;
    spdlog::warn("{}: rejected reply on attempt {}/{}: {}", request.task, attempt, budget, last_error);
    current.user_prompt = request.user_prompt + "\n\nYour previous reply was rejected: " + last_error +
                          "\nReply again, following the required format exactly.";
  }
  throw GenerationError(request.task + ": no acceptable reply after " + std::to_string(budget) +
                            " attempts (last error: " + last_error + ")",
                        result.text, result.attempts);
}

}  // namespace argeval::llm

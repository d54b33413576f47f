#include <algorithm>
#include <set>

#include <spdlog/spdlog.h>

#include "argeval/pipeline.hpp"
#include "prompts.hpp"

namespace argeval {

using nlohmann::json;

ExtractionError::ExtractionError(const std::string& message, std::string raw_output)
    : std::runtime_error(message), raw_output_(std::move(raw_output)) {}

InstantiationError::InstantiationError(ArgumentId argument, std::string param, const std::string& message)
    : std::runtime_error(message), argument_(std::move(argument)), param_(std::move(param)) {}

// ---------------------------------------------------------------------------
// Parameter extraction

llm::GenerationRequest extraction_request(const std::string& case_text, const ParameterSchema& schema) {
  json properties = json::object();
  for (const auto& [name, def] : schema.definitions()) {
    properties[name] = {{"type", {to_string(def.type), "null"}}, {"description", def.description}};
  }
  llm::GenerationRequest req;
  req.stage = llm::Stage::Inference;
  req.task = "extract_params";
  req.system_prompt = prompts::kExtractionSystem;
  req.user_prompt = prompts::extraction_user(case_text, schema);
  req.response_schema = json{{"type", "object"}, {"properties", properties}, {"additionalProperties", false}};
  return req;
}

CaseParameters extract_params(const std::string& case_text, const ParameterSchema& schema, llm::Client& client,
                              int max_attempts) {
  if (schema.empty()) throw DomainError("cannot extract parameters against an empty schema");
  auto req = extraction_request(case_text, schema);
  req.max_attempts = max_attempts;

  CaseParameters params;
  auto check = [&](const llm::GenerationResult& r) -> std::optional<std::string> {
    try {
      params = case_parameters_from_json(*r.value);
    } catch (const std::exception& e) {
      return std::string("parameters rejected: ") + e.what();
    }
    if (auto report = validate_params(params, schema); !report.ok()) return report.summary();
    return std::nullopt;
  };
  try {
    client.generate(req, check);
  } catch (const llm::GenerationError& e) {
    throw ExtractionError(std::string("parameter extraction failed: ") + e.what(), e.last_output());
  }
  return params;
}

// ---------------------------------------------------------------------------
// Instantiation and scoring

Instantiation instantiate(const GeneralQbaf& general, const CaseParameters& params) {
  if (auto report = general.validate(); !report.ok()) throw StructuralError(std::move(report));

  Instantiation out;
  out.qbaf = general.qbaf;
  for (const auto& arg : general.qbaf.arguments) {
    if (arg.id == general.qbaf.root || !out.qbaf.contains(arg.id)) continue;
    const Condition& cond = general.conditions.at(arg.id);
    bool holds = true;
    try {
      holds = eval_condition(cond, params);
    } catch (const ConditionEvalError& e) {
      throw InstantiationError(arg.id, e.param(),
                               "condition of '" + arg.id + "' in '" + general.option.id + "': " + e.what());
    }
    if (holds) continue;

    const auto doomed = out.qbaf.subtree(arg.id);
    const std::set<ArgumentId> gone(doomed.begin(), doomed.end());
    for (const auto& id : doomed) {
      RemovedArgument r{id, out.qbaf.find(id)->text, std::nullopt, std::nullopt};
      if (id == arg.id) {
        r.failed_condition = json(to_json(cond));
      } else {
        r.removed_with = arg.id;
      }
      out.removed.push_back(std::move(r));
    }
    std::erase_if(out.qbaf.arguments, [&](const Argument& a) { return gone.contains(a.id); });
    std::erase_if(out.qbaf.relations, [&](const Relation& r) { return gone.contains(r.source); });
  }
  return out;
}

const Recommendation* InferenceResult::find(const std::string& option_id) const {
  auto it = std::find_if(recommendations.begin(), recommendations.end(),
                         [&](const Recommendation& r) { return r.option.id == option_id; });
  return it == recommendations.end() ? nullptr : &*it;
}

json to_json(const RemovedArgument& removed) {
  json j = {{"id", removed.id}, {"text", removed.text}};
  if (removed.failed_condition) j["failed_condition"] = *removed.failed_condition;
  if (removed.removed_with) j["removed_with"] = *removed.removed_with;
  return j;
}

json to_json(const InferenceResult& result) {
  json recs = json::array();
  for (const auto& r : result.recommendations) {
    json removed = json::array();
    for (const auto& x : r.removed) removed.push_back(to_json(x));
    recs.push_back({{"option", r.option.id},
                    {"name", r.option.name},
                    {"score", r.score},
                    {"strengths", r.strengths},
                    {"qbaf", to_json(r.instantiated)},
                    {"removed", removed}});
  }
  json failures = json::array();
  for (const auto& f : result.failures) failures.push_back({{"option", f.option}, {"error", f.error}});
  return {{"parameters", to_json(result.parameters)}, {"recommendations", recs}, {"failures", failures}};
}

InferenceResult infer_with_params(std::span<const GeneralQbaf> generals, const CaseParameters& params,
                                  Semantics semantics) {
  InferenceResult result;
  result.parameters = params;
  for (const auto& general : generals) {
    try {
      auto inst = instantiate(general, params);
      Recommendation rec;
      rec.option = general.option;
      rec.strengths = evaluate(inst.qbaf, semantics);
      rec.score = rec.strengths.at(inst.qbaf.root);
      rec.instantiated = std::move(inst.qbaf);
      rec.removed = std::move(inst.removed);
      result.recommendations.push_back(std::move(rec));
    } catch (const InstantiationError& e) {
      spdlog::warn("skipping '{}': {}", general.option.id, e.what());
      result.failures.push_back({general.option.id, e.what()});
    }
  }
  std::sort(result.recommendations.begin(), result.recommendations.end(),
            [](const Recommendation& a, const Recommendation& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.option.id < b.option.id;
            });
  return result;
}

InferenceResult infer_case(std::span<const GeneralQbaf> generals, const ParameterSchema& schema,
                           const std::string& case_text, llm::Client& client, Semantics semantics,
                           const CaseParameters& overrides, int max_attempts) {
  if (auto report = validate_params(overrides, schema); !report.ok()) {
    throw DomainError("invalid parameter overrides: " + report.summary());
  }
  CaseParameters params;
  if (!schema.empty()) params = extract_params(case_text, schema, client, max_attempts);
  for (const auto& [name, value] : overrides.values) params.values[name] = value;
  return infer_with_params(generals, params, semantics);
}

}  // namespace argeval

#include <functional>
#include <set>

#include <spdlog/spdlog.h>

#include "argeval/pipeline.hpp"
#include "prompts.hpp"

namespace argeval {

namespace {

using nlohmann::json;

const json& mining_response_schema() {
  static const json item = {
      {"type", "object"},
      {"required", {"statement", "condition"}},
      {"properties",
       {{"statement", {{"type", "string"}, {"minLength", 1}}}, {"condition", {{"type", "string"}, {"minLength", 1}}}}}};
  static const json schema = {
      {"type", "object"},
      {"required", {"attackers", "supporters"}},
      {"properties",
       {{"attackers", {{"type", "array"}, {"items", item}}}, {"supporters", {{"type", "array"}, {"items", item}}}}}};
  return schema;
}

const json& ontology_response_schema() {
  static const json name = {{"type", "string"}, {"minLength", 1}};
  static const json schema = {
      {"type", "object"},
      {"required", {"entities", "hierarchy"}},
      {"properties",
       {{"entities",
         {{"type", "array"},
          {"items",
           {{"type", "object"},
            {"required", {"name"}},
            {"properties", {{"name", name}, {"description", {{"type", "string"}}}}}}}}},
        {"hierarchy",
         {{"type", "array"},
          {"items",
           {{"type", "object"},
            {"required", {"parent", "child"}},
            {"properties", {{"parent", name}, {"child", name}}}}}}}}}};
  return schema;
}

const json& formalise_response_schema() {
  static const json schema = {
      {"type", "object"},
      {"required", {"condition"}},
      {"properties",
       {{"condition", {{"type", {"object", "boolean"}}}},
        {"new_parameters",
         {{"type", "object"},
          {"additionalProperties",
           {{"type", "object"},
            {"required", {"type", "description"}},
            {"properties",
             {{"type", {{"enum", {"boolean", "integer", "number", "string"}}}},
              {"description", {{"type", "string"}, {"minLength", 1}}}}}}}}}}}};
  return schema;
}

std::string render_root(const std::string& tmpl, const std::string& option) {
  std::string out = tmpl;
  const std::string placeholder = "{option}";
  for (auto pos = out.find(placeholder); pos != std::string::npos; pos = out.find(placeholder, pos + option.size())) {
    out.replace(pos, placeholder.size(), option);
  }
  return out;
}

struct MinedChild {
  std::string statement;
  std::string condition;
  Polarity polarity;
};

}  // namespace

// ---------------------------------------------------------------------------
// Argument schemes and configuration

json to_json(const ArgumentScheme& scheme) {
  return {{"major_premise", scheme.major_premise},
          {"minor_premises", scheme.minor_premises},
          {"critical_questions", scheme.critical_questions}};
}

ArgumentScheme argument_scheme_from_json(const json& j) {
  ArgumentScheme s;
  s.major_premise = j.value("major_premise", "");
  s.minor_premises = j.value("minor_premises", std::vector<std::string>{});
  s.critical_questions = j.value("critical_questions", std::vector<std::string>{});
  if (s.critical_questions.empty()) throw DomainError("argument scheme needs at least one critical question");
  return s;
}

void MiningConfig::check() const {
  if (depth < 1) throw DomainError("mining depth must be at least 1");
  if (max_breadth && *max_breadth < 1) throw DomainError("max_breadth must be at least 1");
  if (max_attempts < 1) throw DomainError("max_attempts must be at least 1");
  if (scheme && scheme->critical_questions.empty()) {
    throw DomainError("argument scheme needs at least one critical question");
  }
  if (root_template.empty()) throw DomainError("root template must be non-empty");
}

// ---------------------------------------------------------------------------
// General frameworks

ValidationReport GeneralQbaf::validate() const {
  ValidationReport report = argeval::validate(qbaf);
  for (const auto& a : qbaf.arguments) {
    if (a.id == qbaf.root) {
      if (nl_conditions.contains(a.id) || conditions.contains(a.id)) {
        report.violations.push_back({a.id, "root argument must not carry a condition"});
      }
      continue;
    }
    if (!nl_conditions.contains(a.id)) report.violations.push_back({a.id, "missing natural-language condition"});
    if (!conditions.contains(a.id)) report.violations.push_back({a.id, "missing formal condition"});
  }
  auto check_keys = [&](const auto& map) {
    for (const auto& [id, _] : map) {
      if (!qbaf.contains(id)) report.violations.push_back({id, "condition for an unknown argument"});
    }
  };
  check_keys(nl_conditions);
  check_keys(conditions);
  return report;
}

json to_json(const GeneralQbaf& general) {
  json j = to_json(general.qbaf);
  j["option"] = {{"id", general.option.id}, {"name", general.option.name}, {"description", general.option.description}};
  for (auto& a : j["arguments"]) {
    const auto id = a.at("id").get<std::string>();
    if (auto it = general.nl_conditions.find(id); it != general.nl_conditions.end()) a["nl_condition"] = it->second;
    if (auto it = general.conditions.find(id); it != general.conditions.end()) a["condition"] = json(to_json(it->second));
  }
  return j;
}

GeneralQbaf general_qbaf_from_json(const json& j) {
  GeneralQbaf g;
  const auto& o = j.at("option");
  g.option = {o.at("id").get<std::string>(), o.at("name").get<std::string>(), o.value("description", "")};
  g.qbaf = qbaf_from_json(j);
  for (const auto& a : j.at("arguments")) {
    const auto id = a.at("id").get<std::string>();
    if (a.contains("nl_condition")) g.nl_conditions[id] = a.at("nl_condition").get<std::string>();
    if (a.contains("condition")) g.conditions[id] = parse_condition(a.at("condition"));
  }
  return g;
}

// ---------------------------------------------------------------------------
// Ontology mining

OntologyMiner llm_ontology_miner(llm::Client& client, int max_attempts) {
  return [&client, max_attempts](const Ontology& current, const Chunk& chunk) {
    llm::GenerationRequest req;
    req.stage = llm::Stage::Ontology;
    req.task = "mine_ontology";
    req.system_prompt = prompts::kOntologySystem;
    req.user_prompt = prompts::ontology_user(current, chunk);
    req.response_schema = ontology_response_schema();
    req.max_attempts = max_attempts;

    auto check = [&](const llm::GenerationResult& r) -> std::optional<std::string> {
      std::set<std::string> known;
      for (const auto& e : r.value->at("entities")) known.insert(normalise_name(e.at("name").get<std::string>()));
      for (const auto& h : r.value->at("hierarchy")) {
        for (const char* end : {"parent", "child"}) {
          const auto name = h.at(end).get<std::string>();
          if (!known.contains(normalise_name(name)) && current.find_by_name(name) == nullptr) {
            return "hierarchy names '" + name + "', which is neither listed in \"entities\" nor an existing entity";
          }
        }
      }
      return std::nullopt;
    };
    const auto result = client.generate(req, check);

    MinedChunk mined;
    for (const auto& e : result.value->at("entities")) {
      mined.entities.push_back({e.at("name").get<std::string>(), e.value("description", "")});
    }
    for (const auto& h : result.value->at("hierarchy")) {
      mined.hierarchy.emplace_back(h.at("parent").get<std::string>(), h.at("child").get<std::string>());
    }
    return mined;
  };
}

// ---------------------------------------------------------------------------
// Argument mining

MinedBaf mine_baf(const Entity& option, std::span<const Chunk> chunks, const MiningConfig& config,
                  llm::Client& client) {
  config.check();
  if (chunks.empty()) throw DomainError("no chunks mention option '" + option.id + "'");

  MinedBaf out;
  Qbaf& q = out.skeleton;
  q.root = "arg0";
  q.arguments.push_back({q.root, render_root(config.root_template, option.name), 0.5});

  auto request_children = [&](const Argument& claim, const std::vector<std::string>& ancestry, int level) {
    llm::GenerationRequest req;
    req.stage = llm::Stage::QbafConstruction;
    req.task = "mine_baf";
    req.system_prompt = prompts::kMiningSystem;
    req.user_prompt = prompts::mining_user(option, chunks, claim.text, ancestry, level, config.depth, config.scheme);
    req.response_schema = mining_response_schema();
    req.max_attempts = config.max_attempts;

    auto check = [](const llm::GenerationResult& r) -> std::optional<std::string> {
      std::map<std::string, std::string> seen;  // normalised statement -> list it came from
      for (const char* list : {"attackers", "supporters"}) {
        for (const auto& item : r.value->at(list)) {
          const auto statement = item.at("statement").get<std::string>();
          auto [it, fresh] = seen.emplace(normalise_name(statement), list);
          if (!fresh) {
            return it->second == list ? "statement '" + statement + "' is listed twice among the " + list
                                      : "statement '" + statement + "' is listed as both an attacker and a supporter";
          }
        }
      }
      return std::nullopt;
    };

    llm::GenerationResult result;
    try {
      result = client.generate(req, check);
    } catch (const llm::GenerationError& e) {
      throw ProtocolError("argument mining for '" + option.id + "' failed: " + e.what());
    }

    std::vector<MinedChild> children;
    for (auto [list, polarity] : {std::pair{"attackers", Polarity::Attack}, std::pair{"supporters", Polarity::Support}}) {
      int taken = 0;
      for (const auto& item : result.value->at(list)) {
        if (config.max_breadth && taken == *config.max_breadth) break;
        children.push_back({item.at("statement").get<std::string>(), item.at("condition").get<std::string>(), polarity});
        ++taken;
      }
    }
    return children;
  };

  std::function<void(ArgumentId, std::vector<std::string>&, int)> expand =
      [&](ArgumentId id, std::vector<std::string>& ancestry, int level) {
        const Argument claim = *q.find(id);
        const auto children = request_children(claim, ancestry, level);
        std::vector<ArgumentId> created;
        for (const auto& child : children) {
          ArgumentId child_id = "arg" + std::to_string(q.arguments.size());
          q.arguments.push_back({child_id, child.statement, 0.5});
          q.relations.push_back({child_id, id, child.polarity});
          out.nl_conditions[child_id] = child.condition;
          created.push_back(std::move(child_id));
        }
        if (level + 1 >= config.depth) return;
        ancestry.push_back(claim.text);
        for (const auto& child_id : created) expand(child_id, ancestry, level + 1);
        ancestry.pop_back();
      };

  std::vector<std::string> ancestry;
  expand(q.root, ancestry, 0);

  if (auto report = validate(q); !report.ok()) {
    throw ProtocolError("mined framework for '" + option.id + "' is malformed: " + report.summary());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Base scores

double estimate_base_score(const Argument& argument, std::span<const Chunk> chunks,
                           const std::optional<ScoringContext>& context, llm::Client& client, int max_attempts) {
  llm::GenerationRequest req;
  req.stage = llm::Stage::QbafConstruction;
  req.task = "score_argument";
  req.system_prompt = prompts::kScoringSystem;
  req.user_prompt = prompts::scoring_user(argument, chunks, context);
  req.response_schema = json{{"type", "number"}, {"minimum", 0}, {"maximum", 1}};
  req.max_attempts = max_attempts;
  try {
    return client.generate(req).value->get<double>();
  } catch (const llm::GenerationError& e) {
    spdlog::warn("no usable base score for '{}', using 0.5: {}", argument.id, e.what());
    return 0.5;
  }
}

// ---------------------------------------------------------------------------
// Condition formalisation

FormalisedCondition formalise_condition(const Argument& argument, const std::string& nl_condition,
                                        const ParameterSchema& schema, llm::Client& client, int max_attempts) {
  if (nl_condition.empty()) throw DomainError("argument '" + argument.id + "' has no condition to formalise");

  llm::GenerationRequest req;
  req.stage = llm::Stage::QbafConstruction;
  req.task = "formalise_condition";
  req.system_prompt = prompts::kFormaliseSystem;
  req.user_prompt = prompts::formalise_user(argument, nl_condition, schema);
  req.response_schema = formalise_response_schema();
  req.max_attempts = max_attempts;

  std::optional<FormalisedCondition> accepted;
  std::optional<SchemaConflict> conflict;
  auto check = [&](const llm::GenerationResult& r) -> std::optional<std::string> {
    conflict.reset();
    Condition cond;
    try {
      cond = parse_condition(r.value->at("condition"));
    } catch (const ConditionParseError& e) {
      return std::string("condition rejected: ") + e.what();
    }
    ParameterSchema additions;
    if (auto it = r.value->find("new_parameters"); it != r.value->end()) {
      for (const auto& [name, def] : it->items()) {
        if (!is_identifier(name)) return "parameter name '" + name + "' is not an identifier";
        try {
          additions.add(param_def_from_json(name, def));
        } catch (const std::exception& e) {
          return "parameter '" + name + "' rejected: " + e.what();
        }
      }
    }
    ParameterSchema merged;
    try {
      merged = merge_schema(schema, additions);
    } catch (const SchemaConflict& e) {
      conflict = e;
      return std::string(e.what()) + "; reuse the existing definition or choose a different name";
    }
    if (auto problems = check_against_schema(cond, merged); !problems.empty()) {
      std::string msg = "condition does not fit the parameter schema:";
      for (const auto& p : problems) msg += " " + p + ";";
      msg.pop_back();
      return msg;
    }
    accepted = FormalisedCondition{std::move(cond), std::move(merged)};
    return std::nullopt;
  };

  try {
    client.generate(req, check);
  } catch (const llm::GenerationError& e) {
    if (conflict) throw SchemaConflict(*conflict);
    throw ProtocolError("formalising the condition of '" + argument.id + "' failed: " + e.what());
  }
  return std::move(*accepted);
}

// ---------------------------------------------------------------------------
// General framework construction

BuildOutcome build_general_qbafs(const Ontology& ontology, std::span<const Entity> options,
                                 const MiningConfig& config, llm::Client& client) {
  config.check();
  for (const auto& option : options) {
    if (ontology.find_entity(option.id) == nullptr) {
      throw DomainError("option '" + option.id + "' is not an ontology entity");
    }
  }

  BuildOutcome outcome;
  for (const auto& option : options) {
    try {
      const auto chunks = chunks_for(ontology, option.id);
      MinedBaf mined = mine_baf(option, chunks, config, client);
      GeneralQbaf general{option, std::move(mined.skeleton), std::move(mined.nl_conditions), {}};
      ParameterSchema schema = outcome.schema;

      for (auto& arg : general.qbaf.arguments) {
        if (arg.id == general.qbaf.root) {
          arg.base_score = config.score_root
                               ? estimate_base_score(arg, chunks, std::nullopt, client, config.max_attempts)
                               : 0.5;
          continue;
        }
        const Relation* rel = general.qbaf.parent_relation(arg.id);
        const std::string& nl = general.nl_conditions.at(arg.id);
        ScoringContext ctx{*general.qbaf.find(rel->target), rel->polarity == Polarity::Support, nl};
        arg.base_score = estimate_base_score(arg, chunks, ctx, client, config.max_attempts);
        auto formal = formalise_condition(arg, nl, schema, client, config.max_attempts);
        general.conditions[arg.id] = std::move(formal.condition);
        schema = std::move(formal.schema);
      }

      outcome.schema = std::move(schema);
      outcome.frameworks.push_back(std::move(general));
      spdlog::info("built framework for '{}' ({} arguments)", option.id, outcome.frameworks.back().qbaf.arguments.size());
    } catch (const std::exception& e) {
      spdlog::error("framework construction for '{}' failed: {}", option.id, e.what());
      outcome.failures.push_back({option.id, e.what()});
    }
  }
  return outcome;
}

}  // namespace argeval

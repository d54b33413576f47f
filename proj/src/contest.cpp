#include "argeval/contest.hpp"

#include <algorithm>
#include <set>

#include "argeval/hash.hpp"

namespace argeval {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Artifacts

std::vector<GeneralQbaf> Artifacts::frameworks() const {
  std::vector<GeneralQbaf> out;
  out.reserve(qbafs.size());
  for (const auto& [_, g] : qbafs) out.push_back(g);
  return out;
}

ValidationReport Artifacts::validate() const {
  ValidationReport report = ontology.validate();
  std::set<std::string> seen;
  for (const auto& id : options) {
    if (ontology.find_entity(id) == nullptr) report.violations.push_back({id, "option is not an ontology entity"});
    if (!seen.insert(id).second) report.violations.push_back({id, "option listed twice"});
  }
  for (const auto& [id, g] : qbafs) {
    if (g.option.id != id) report.violations.push_back({id, "framework stored under the wrong option id"});
    if (!seen.contains(id)) report.violations.push_back({id, "framework for an option that is not selected"});
    for (auto& v : g.validate().violations) report.violations.push_back({id + "/" + v.subject, v.message});
    for (const auto& [arg, cond] : g.conditions) {
      for (auto& p : check_against_schema(cond, schema)) report.violations.push_back({id + "/" + arg, p});
    }
  }
  return report;
}

std::string canonical_json(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

std::map<std::string, std::string> serialise(const Artifacts& a) {
  std::map<std::string, std::string> files;
  files["ontology.json"] = canonical_json(to_json(a.ontology));
  files["options.json"] = canonical_json(a.options);
  files["schema.json"] = canonical_json(to_json(a.schema));
  for (const auto& [id, g] : a.qbafs) files["qbafs/" + id + ".json"] = canonical_json(to_json(g));
  return files;
}

Artifacts deserialise(const std::map<std::string, std::string>& files) {
  auto read = [&](const std::string& name) -> json {
    auto it = files.find(name);
    if (it == files.end()) throw DomainError("artifact file missing: " + name);
    return json::parse(it->second);
  };
  Artifacts a;
  a.ontology = ontology_from_json(read("ontology.json"));
  a.options = read("options.json").get<std::vector<std::string>>();
  a.schema = parameter_schema_from_json(read("schema.json"));
  for (const auto& [name, text] : files) {
    if (!name.starts_with("qbafs/")) continue;
    GeneralQbaf g = general_qbaf_from_json(json::parse(text));
    a.qbafs.emplace(g.option.id, std::move(g));
  }
  return a;
}

std::string digest(const Artifacts& artifacts) {
  std::uint64_t h = fnv1a64("");
  for (const auto& [name, text] : serialise(artifacts)) {
    h = fnv1a64(name, h);
    h = fnv1a64(std::string_view("\0", 1), h);
    h = fnv1a64(text, h);
  }
  return to_hex(h);
}

// ---------------------------------------------------------------------------
// Edit serialisation

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

json condition_json(const Condition& c) { return json(to_json(c)); }

Condition condition_field(const json& j, const char* key) {
  try {
    return parse_condition(j.at(key));
  } catch (const ConditionParseError& e) {
    throw EditRejected(std::string("invalid condition: ") + e.what());
  }
}

Polarity polarity_from_string(const std::string& s) {
  if (s == "attack") return Polarity::Attack;
  if (s == "support") return Polarity::Support;
  throw EditRejected("polarity must be \"attack\" or \"support\", got '" + s + "'");
}

}  // namespace

const char* edit_kind(const Edit& edit) {
  return std::visit(overloaded{
                        [](const edit::SetBaseScore&) { return "set_base_score"; },
                        [](const edit::AddArgument&) { return "add_argument"; },
                        [](const edit::RemoveArgument&) { return "remove_argument"; },
                        [](const edit::ReplaceCondition&) { return "replace_condition"; },
                        [](const edit::EditParameterDescription&) { return "edit_parameter_description"; },
                        [](const edit::SetParameter&) { return "set_parameter"; },
                        [](const edit::AddEntity&) { return "add_entity"; },
                        [](const edit::RemoveEntity&) { return "remove_entity"; },
                    },
                    edit);
}

json to_json(const Edit& e) {
  json j = std::visit(
      overloaded{
          [](const edit::SetBaseScore& x) -> json {
            return {{"option", x.option}, {"argument", x.argument}, {"score", x.score}};
          },
          [](const edit::AddArgument& x) -> json {
            json j = {{"option", x.option},
                      {"parent", x.parent},
                      {"polarity", to_string(x.polarity)},
                      {"text", x.text},
                      {"base_score", x.base_score},
                      {"nl_condition", x.nl_condition},
                      {"condition", condition_json(x.condition)}};
            if (x.id) j["id"] = *x.id;
            return j;
          },
          [](const edit::RemoveArgument& x) -> json { return {{"option", x.option}, {"argument", x.argument}}; },
          [](const edit::ReplaceCondition& x) -> json {
            json j = {{"option", x.option}, {"argument", x.argument}, {"condition", condition_json(x.condition)}};
            if (x.nl_condition) j["nl_condition"] = *x.nl_condition;
            return j;
          },
          [](const edit::EditParameterDescription& x) -> json {
            return {{"parameter", x.parameter}, {"description", x.description}};
          },
          [](const edit::SetParameter& x) -> json {
            return {{"parameter", x.definition.name}, {"definition", to_json(x.definition)}};
          },
          [](const edit::AddEntity& x) -> json {
            return {{"name", x.name}, {"description", x.description}, {"parents", x.parents}};
          },
          [](const edit::RemoveEntity& x) -> json { return {{"entity", x.entity}}; },
      },
      e);
  j["kind"] = edit_kind(e);
  return j;
}

Edit edit_from_json(const json& j) {
  if (!j.is_object()) throw EditRejected("edit must be a JSON object");
  if (!j.contains("kind") || !j.at("kind").is_string()) throw EditRejected("edit needs a \"kind\"");
  const auto kind = j.at("kind").get<std::string>();
  auto str = [&](const char* key) { return j.at(key).get<std::string>(); };
  try {
    if (kind == "set_base_score") {
      return edit::SetBaseScore{str("option"), str("argument"), j.at("score").get<double>()};
    }
    if (kind == "add_argument") {
      edit::AddArgument x;
      x.option = str("option");
      x.parent = str("parent");
      x.polarity = polarity_from_string(str("polarity"));
      x.text = str("text");
      x.base_score = j.at("base_score").get<double>();
      x.nl_condition = str("nl_condition");
      x.condition = condition_field(j, "condition");
      if (j.contains("id")) x.id = str("id");
      return x;
    }
    if (kind == "remove_argument") return edit::RemoveArgument{str("option"), str("argument")};
    if (kind == "replace_condition") {
      edit::ReplaceCondition x{str("option"), str("argument"), condition_field(j, "condition"), std::nullopt};
      if (j.contains("nl_condition")) x.nl_condition = str("nl_condition");
      return x;
    }
    if (kind == "edit_parameter_description") return edit::EditParameterDescription{str("parameter"), str("description")};
    if (kind == "set_parameter") {
      try {
        return edit::SetParameter{param_def_from_json(str("parameter"), j.at("definition"))};
      } catch (const DomainError& e) {
        throw EditRejected(e.what());
      }
    }
    if (kind == "add_entity") {
      return edit::AddEntity{str("name"), j.value("description", ""),
                             j.value("parents", std::vector<std::string>{})};
    }
    if (kind == "remove_entity") return edit::RemoveEntity{str("entity")};
  } catch (const json::exception& e) {
    throw EditRejected("malformed " + kind + " edit: " + e.what());
  }
  throw EditRejected("unknown edit kind '" + kind + "'");
}

json to_json(const Contestation& c) { return {{"edit", to_json(c.edit)}, {"justification", c.justification}}; }

Contestation contestation_from_json(const json& j) {
  if (!j.is_object() || !j.contains("edit")) throw EditRejected("contestation needs an \"edit\"");
  Contestation c{edit_from_json(j.at("edit")), ""};
  if (j.contains("justification") && j.at("justification").is_string()) {
    c.justification = j.at("justification").get<std::string>();
  }
  if (c.justification.empty()) throw EditRejected("contestation needs a non-empty justification");
  return c;
}

json to_json(const ContestRecord& r) {
  json j = to_json(r.contestation);
  j["revision"] = r.revision;
  j["timestamp"] = r.timestamp;
  return j;
}

ContestRecord contest_record_from_json(const json& j) {
  return {j.at("revision").get<std::uint64_t>(), j.value("timestamp", ""), contestation_from_json(j)};
}

// ---------------------------------------------------------------------------
// Applying edits

namespace {

GeneralQbaf& framework(Artifacts& a, const std::string& option) {
  auto it = a.qbafs.find(option);
  if (it == a.qbafs.end()) throw NotFound("no framework for option '" + option + "'");
  return it->second;
}

Argument& argument(GeneralQbaf& g, const ArgumentId& id) {
  Argument* arg = g.qbaf.find(id);
  if (arg == nullptr) throw NotFound("option '" + g.option.id + "' has no argument '" + id + "'");
  return *arg;
}

void check_score(double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw EditRejected("base score must lie in [0, 1], got " + json(score).dump());
  }
}

ArgumentId next_argument_id(const GeneralQbaf& g) {
  long next = 0;
  for (const auto& a : g.qbaf.arguments) {
    if (a.id.size() > 3 && a.id.starts_with("arg") &&
        std::all_of(a.id.begin() + 3, a.id.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      next = std::max(next, std::stol(a.id.substr(3)) + 1);
    }
  }
  return "arg" + std::to_string(next);
}

void apply(Artifacts& a, const edit::SetBaseScore& e) {
  check_score(e.score);
  argument(framework(a, e.option), e.argument).base_score = e.score;
}

void apply(Artifacts& a, const edit::AddArgument& e) {
  GeneralQbaf& g = framework(a, e.option);
  argument(g, e.parent);
  check_score(e.base_score);
  if (e.text.empty()) throw EditRejected("argument text must be non-empty");
  if (e.nl_condition.empty()) throw EditRejected("new arguments need a natural-language condition");
  const ArgumentId id = e.id.value_or(next_argument_id(g));
  if (id.empty() || g.qbaf.contains(id)) throw EditRejected("argument id '" + id + "' is empty or taken");
  g.qbaf.arguments.push_back({id, e.text, e.base_score});
  g.qbaf.relations.push_back({id, e.parent, e.polarity});
  g.nl_conditions[id] = e.nl_condition;
  g.conditions[id] = e.condition;
}

void apply(Artifacts& a, const edit::RemoveArgument& e) {
  GeneralQbaf& g = framework(a, e.option);
  argument(g, e.argument);
  if (e.argument == g.qbaf.root) throw EditRejected("the root argument cannot be removed");
  const auto doomed = g.qbaf.subtree(e.argument);
  const std::set<ArgumentId> gone(doomed.begin(), doomed.end());
  std::erase_if(g.qbaf.arguments, [&](const Argument& x) { return gone.contains(x.id); });
  std::erase_if(g.qbaf.relations, [&](const Relation& r) { return gone.contains(r.source); });
  for (const auto& id : gone) {
    g.nl_conditions.erase(id);
    g.conditions.erase(id);
  }
}

void apply(Artifacts& a, const edit::ReplaceCondition& e) {
  GeneralQbaf& g = framework(a, e.option);
  argument(g, e.argument);
  if (e.argument == g.qbaf.root) throw EditRejected("the root argument has no condition");
  g.conditions[e.argument] = e.condition;
  if (e.nl_condition) {
    if (e.nl_condition->empty()) throw EditRejected("natural-language condition must be non-empty");
    g.nl_conditions[e.argument] = *e.nl_condition;
  }
}

void apply(Artifacts& a, const edit::EditParameterDescription& e) {
  if (!a.schema.contains(e.parameter)) throw NotFound("no parameter '" + e.parameter + "'");
  if (e.description.empty()) throw EditRejected("parameter description must be non-empty");
  a.schema.at(e.parameter).description = e.description;
}

void apply(Artifacts& a, const edit::SetParameter& e) {
  if (auto problems = check_definition(e.definition); !problems.empty()) {
    throw EditRejected("invalid definition of '" + e.definition.name + "': " + problems.front());
  }
  ParameterSchema next;
  for (const auto& [name, def] : a.schema.definitions()) {
    if (name != e.definition.name) next.add(def);
  }
  next.add(e.definition);
  a.schema = std::move(next);
}

void apply(Artifacts& a, const edit::AddEntity& e) {
  if (normalise_name(e.name).empty()) throw EditRejected("entity name must be non-empty");
  if (a.ontology.find_by_name(e.name) != nullptr) throw EditRejected("entity '" + e.name + "' already exists");
  for (const auto& p : e.parents) {
    if (a.ontology.find_entity(p) == nullptr) throw NotFound("no entity '" + p + "'");
  }
  const std::string id = a.ontology.ensure_entity(e.name, e.description).id;
  for (const auto& p : e.parents) a.ontology.add_edge(p, id);
}

void apply(Artifacts& a, const edit::RemoveEntity& e) {
  if (a.ontology.find_entity(e.entity) == nullptr) throw NotFound("no entity '" + e.entity + "'");
  a.ontology.remove_entity(e.entity);
  std::erase(a.options, e.entity);
  a.qbafs.erase(e.entity);
}

}  // namespace

Artifacts apply_contestation(const Artifacts& artifacts, const Contestation& contestation) {
  if (contestation.justification.empty()) throw EditRejected("contestation needs a non-empty justification");
  Artifacts next = artifacts;
  try {
    std::visit([&](const auto& e) { apply(next, e); }, contestation.edit);
  } catch (const DomainError& e) {
    throw EditRejected(e.what());
  }
  if (auto report = next.validate(); !report.ok()) {
    throw EditRejected(std::string(edit_kind(contestation.edit)) + " would break an invariant: " + report.summary());
  }
  return next;
}

}  // namespace argeval

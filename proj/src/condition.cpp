#include "argeval/condition.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace argeval {

namespace {

constexpr const char* kSchemaDialect = "https://json-schema.org/draft/2020-12/schema";

bool is_annotation(const std::string& key) {
  return key == "$schema" || key == "$comment" || key == "title" || key == "description";
}

nlohmann::ordered_json number_json(double v) {
  // Keep integral bounds integral so `"maximum": 49` survives a round trip verbatim.
  if (std::nearbyint(v) == v && std::fabs(v) < 9007199254740992.0) {
    return static_cast<std::int64_t>(v);
  }
  return v;
}

double read_number(const nlohmann::json& j, const std::string& keyword) {
  if (!j.is_number()) throw ConditionParseError("'" + keyword + "' must be a number");
  return j.get<double>();
}

ParamValue read_scalar(const nlohmann::json& j, const std::string& keyword) {
  if (!(j.is_boolean() || j.is_number() || j.is_string())) {
    throw UnsupportedFeature(keyword + " with non-scalar value");
  }
  return param_value_from_json(j);
}

PropertyConstraint parse_property(const std::string& name, const nlohmann::json& sub) {
  if (!is_identifier(name)) throw ConditionParseError("invalid parameter name '" + name + "'");
  PropertyConstraint c;
  c.param = name;
  if (sub.is_boolean()) {
    if (!sub.get<bool>()) throw UnsupportedFeature("false property schema");
    return c;
  }
  if (!sub.is_object()) throw ConditionParseError("property '" + name + "' must map to a schema object");
  for (const auto& [key, value] : sub.items()) {
    if (is_annotation(key)) continue;
    if (key == "type") {
      if (!value.is_string()) throw UnsupportedFeature("type with non-string value");
      const auto t = value.get<std::string>();
      if (t != "boolean" && t != "integer" && t != "number" && t != "string") {
        throw UnsupportedFeature("type " + t);
      }
      c.type = value_type_from_string(t);
    } else if (key == "const") {
      c.const_value = read_scalar(value, key);
    } else if (key == "enum") {
      if (!value.is_array() || value.empty()) throw ConditionParseError("'enum' must be a non-empty array");
      std::vector<ParamValue> values;
      for (const auto& v : value) values.push_back(read_scalar(v, key));
      c.enum_values = std::move(values);
    } else if (key == "minimum") {
      c.minimum = read_number(value, key);
    } else if (key == "maximum") {
      c.maximum = read_number(value, key);
    } else if (key == "exclusiveMinimum") {
      c.exclusive_minimum = read_number(value, key);
    } else if (key == "exclusiveMaximum") {
      c.exclusive_maximum = read_number(value, key);
    } else {
      throw UnsupportedFeature(key);
    }
  }
  if (c.has_numeric_keyword() && c.type &&
      !(*c.type == ValueType::Integer || *c.type == ValueType::Number)) {
    throw ConditionParseError("numeric keyword on non-numeric constraint for '" + name + "'");
  }
  return c;
}

std::vector<Condition> parse_children(const nlohmann::json& value, const std::string& keyword);

Condition parse_node(const nlohmann::json& j) {
  if (j.is_boolean()) {
    return j.get<bool>() ? Condition::always() : Condition::negate(Condition::always());
  }
  if (!j.is_object()) throw ConditionParseError("condition must be a JSON object");

  std::vector<Condition> properties, required, any_of, all_of, negated;
  for (const auto& [key, value] : j.items()) {
    if (is_annotation(key)) continue;
    if (key == "type") {
      if (value != "object") throw ConditionParseError("top-level 'type' must be \"object\"");
    } else if (key == "properties") {
      if (!value.is_object()) throw ConditionParseError("'properties' must be an object");
      for (const auto& [name, sub] : value.items()) {
        properties.push_back(Condition::property(parse_property(name, sub)));
      }
    } else if (key == "required") {
      if (!value.is_array()) throw ConditionParseError("'required' must be an array");
      std::vector<std::string> names;
      for (const auto& n : value) {
        if (!n.is_string() || !is_identifier(n.get<std::string>())) {
          throw ConditionParseError("'required' entries must be parameter names");
        }
        names.push_back(n.get<std::string>());
      }
      if (!names.empty()) required.push_back(Condition::required(std::move(names)));
    } else if (key == "anyOf") {
      any_of.push_back(Condition::any_of(parse_children(value, key)));
    } else if (key == "allOf") {
      all_of.push_back(Condition::all_of(parse_children(value, key)));
    } else if (key == "not") {
      negated.push_back(Condition::negate(parse_node(value)));
    } else {
      throw UnsupportedFeature(key);
    }
  }

  std::vector<Condition> parts;
  for (auto* group : {&properties, &required, &any_of, &all_of, &negated}) {
    for (auto& c : *group) parts.push_back(std::move(c));
  }
  if (parts.empty()) return Condition::always();
  if (parts.size() == 1) return std::move(parts.front());
  return Condition::all_of(std::move(parts));
}

std::vector<Condition> parse_children(const nlohmann::json& value, const std::string& keyword) {
  if (!value.is_array() || value.empty()) {
    throw ConditionParseError("'" + keyword + "' must be a non-empty array");
  }
  std::vector<Condition> out;
  for (const auto& child : value) out.push_back(parse_node(child));
  return out;
}

nlohmann::ordered_json property_json(const PropertyConstraint& c) {
  nlohmann::ordered_json sub = nlohmann::ordered_json::object();
  if (c.type) sub["type"] = to_string(*c.type);
  if (c.const_value) sub["const"] = nlohmann::ordered_json(to_json(*c.const_value));
  if (c.enum_values) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : *c.enum_values) arr.push_back(nlohmann::ordered_json(to_json(v)));
    sub["enum"] = arr;
  }
  if (c.minimum) sub["minimum"] = number_json(*c.minimum);
  if (c.maximum) sub["maximum"] = number_json(*c.maximum);
  if (c.exclusive_minimum) sub["exclusiveMinimum"] = number_json(*c.exclusive_minimum);
  if (c.exclusive_maximum) sub["exclusiveMaximum"] = number_json(*c.exclusive_maximum);
  nlohmann::ordered_json props = nlohmann::ordered_json::object();
  props[c.param] = sub;
  return {{"properties", props}};
}

nlohmann::ordered_json node_json(const Condition& cond) {
  auto children_json = [](const std::vector<Condition>& children) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : children) arr.push_back(node_json(c));
    return arr;
  };
  return std::visit(
      [&](const auto& n) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AlwaysTrue>) {
          return nlohmann::ordered_json::object();
        } else if constexpr (std::is_same_v<T, PropertyConstraint>) {
          return property_json(n);
        } else if constexpr (std::is_same_v<T, Required>) {
          return {{"required", n.params}};
        } else if constexpr (std::is_same_v<T, AnyOf>) {
          return {{"anyOf", children_json(n.children)}};
        } else if constexpr (std::is_same_v<T, AllOf>) {
          return {{"allOf", children_json(n.children)}};
        } else {
          return {{"not", node_json(*n.child)}};
        }
      },
      cond.node());
}

bool eval_property(const PropertyConstraint& c, const CaseParameters& params) {
  const ParamValue* v = params.get(c.param);
  if (v == nullptr) return true;  // absent property: vacuously satisfied
  if (c.has_numeric_keyword() && !is_numeric(*v)) {
    throw ConditionEvalError(c.param, "numeric constraint applied to " + describe(*v));
  }
  if (c.type && !conforms(*v, *c.type)) return false;
  if (c.const_value && !json_equal(*v, *c.const_value)) return false;
  if (c.enum_values &&
      std::none_of(c.enum_values->begin(), c.enum_values->end(),
                   [&](const ParamValue& e) { return json_equal(*v, e); })) {
    return false;
  }
  if (c.has_numeric_keyword()) {
    const double x = as_double(*v);
    if (c.minimum && !(x >= *c.minimum)) return false;
    if (c.maximum && !(x <= *c.maximum)) return false;
    if (c.exclusive_minimum && !(x > *c.exclusive_minimum)) return false;
    if (c.exclusive_maximum && !(x < *c.exclusive_maximum)) return false;
  }
  return true;
}

void collect_params(const Condition& cond, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PropertyConstraint>) {
          out.insert(n.param);
        } else if constexpr (std::is_same_v<T, Required>) {
          out.insert(n.params.begin(), n.params.end());
        } else if constexpr (std::is_same_v<T, AnyOf> || std::is_same_v<T, AllOf>) {
          for (const auto& c : n.children) collect_params(c, out);
        } else if constexpr (std::is_same_v<T, Not>) {
          collect_params(*n.child, out);
        }
      },
      cond.node());
}

void check_node(const Condition& cond, const ParameterSchema& schema, std::vector<std::string>& problems) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PropertyConstraint>) {
          const ParamDef* def = schema.find(n.param);
          if (def == nullptr) {
            problems.push_back("parameter '" + n.param + "' is not defined in the schema");
            return;
          }
          const bool numeric = def->type == ValueType::Integer || def->type == ValueType::Number;
          if (n.has_numeric_keyword() && !numeric) {
            problems.push_back("numeric keyword on " + std::string(to_string(def->type)) +
                               " parameter '" + n.param + "'");
          }
          auto check_value = [&](const ParamValue& v) {
            if (!conforms(v, def->type)) {
              problems.push_back("value " + describe(v) + " does not match the type of '" + n.param + "'");
            }
          };
          if (n.const_value) check_value(*n.const_value);
          if (n.enum_values) std::for_each(n.enum_values->begin(), n.enum_values->end(), check_value);
        } else if constexpr (std::is_same_v<T, Required>) {
          for (const auto& p : n.params) {
            if (!schema.contains(p)) problems.push_back("parameter '" + p + "' is not defined in the schema");
          }
        } else if constexpr (std::is_same_v<T, AnyOf> || std::is_same_v<T, AllOf>) {
          for (const auto& c : n.children) check_node(c, schema, problems);
        } else if constexpr (std::is_same_v<T, Not>) {
          check_node(*n.child, schema, problems);
        }
      },
      cond.node());
}

}  // namespace

bool AnyOf::operator==(const AnyOf& other) const { return children == other.children; }
bool AllOf::operator==(const AllOf& other) const { return children == other.children; }
bool Not::operator==(const Not& other) const {
  if (!child || !other.child) return child == other.child;
  return *child == *other.child;
}

UnsupportedFeature::UnsupportedFeature(std::string keyword)
    : ConditionParseError("unsupported keyword: " + keyword), keyword_(std::move(keyword)) {}

ConditionEvalError::ConditionEvalError(std::string param, const std::string& message)
    : std::runtime_error("parameter '" + param + "': " + message), param_(std::move(param)) {}

bool is_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(name.front())) return false;
  return std::all_of(name.begin(), name.end(),
                     [&](char c) { return alpha(c) || (c >= '0' && c <= '9'); });
}

std::vector<std::string> Condition::referenced_params() const {
  std::set<std::string> names;
  collect_params(*this, names);
  return {names.begin(), names.end()};
}

Condition parse_condition(std::string_view schema_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(schema_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConditionParseError(std::string("malformed JSON: ") + e.what());
  }
  return parse_condition(j);
}

Condition parse_condition(const nlohmann::json& schema) { return parse_node(schema); }

nlohmann::ordered_json to_json(const Condition& cond, bool wrapped) {
  auto body = node_json(cond);
  if (!wrapped) return body;
  nlohmann::ordered_json out = {{"$schema", kSchemaDialect}, {"type", "object"}};
  for (auto& [k, v] : body.items()) out[k] = v;
  return out;
}

bool eval_condition(const Condition& cond, const CaseParameters& params) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AlwaysTrue>) {
          return true;
        } else if constexpr (std::is_same_v<T, PropertyConstraint>) {
          return eval_property(n, params);
        } else if constexpr (std::is_same_v<T, Required>) {
          return std::all_of(n.params.begin(), n.params.end(), [&](const std::string& p) {
            return params.has(p) && !params.is_unknown(p);
          });
        } else if constexpr (std::is_same_v<T, AnyOf>) {
          return std::any_of(n.children.begin(), n.children.end(),
                             [&](const Condition& c) { return eval_condition(c, params); });
        } else if constexpr (std::is_same_v<T, AllOf>) {
          return std::all_of(n.children.begin(), n.children.end(),
                             [&](const Condition& c) { return eval_condition(c, params); });
        } else {
          return !eval_condition(*n.child, params);
        }
      },
      cond.node());
}

std::vector<std::string> check_against_schema(const Condition& cond, const ParameterSchema& schema) {
  std::vector<std::string> problems;
  check_node(cond, schema, problems);
  return problems;
}

}  // namespace argeval

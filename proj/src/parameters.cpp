#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "argeval/condition.hpp"

namespace argeval {

const char* to_string(ValueType type) {
  switch (type) {
    case ValueType::Boolean: return "boolean";
    case ValueType::Integer: return "integer";
    case ValueType::Number: return "number";
    case ValueType::String: return "string";
  }
  return "string";
}

ValueType value_type_from_string(std::string_view name) {
  if (name == "boolean") return ValueType::Boolean;
  if (name == "integer") return ValueType::Integer;
  if (name == "number") return ValueType::Number;
  if (name == "string") return ValueType::String;
  throw DomainError("unknown value type '" + std::string(name) + "'");
}

nlohmann::json to_json(const ParamValue& value) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, value);
}

ParamValue param_value_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_unsigned()) {
    const auto u = j.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(INT64_MAX)) return static_cast<double>(u);
    return static_cast<std::int64_t>(u);
  }
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw DomainError("parameter values must be boolean, number or string, got " + j.dump());
}

bool is_numeric(const ParamValue& v) {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

double as_double(const ParamValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  throw DomainError("not a number: " + describe(v));
}

bool json_equal(const ParamValue& a, const ParamValue& b) {
  if (is_numeric(a) && is_numeric(b)) {
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
      return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
    }
    return as_double(a) == as_double(b);
  }
  return a == b;
}

bool conforms(const ParamValue& v, ValueType type) {
  switch (type) {
    case ValueType::Boolean: return std::holds_alternative<bool>(v);
    case ValueType::String: return std::holds_alternative<std::string>(v);
    case ValueType::Number: return is_numeric(v);
    case ValueType::Integer:
      if (std::holds_alternative<std::int64_t>(v)) return true;
      if (const auto* d = std::get_if<double>(&v)) return std::isfinite(*d) && std::nearbyint(*d) == *d;
      return false;
  }
  return false;
}

std::string describe(const ParamValue& v) { return to_json(v).dump(); }

bool CaseParameters::is_unknown(const std::string& name) const {
  const ParamValue* v = get(name);
  const auto* s = v ? std::get_if<std::string>(v) : nullptr;
  return s != nullptr && *s == kUnknownValue;
}

const ParamValue* CaseParameters::get(const std::string& name) const {
  auto it = values.find(name);
  return it == values.end() ? nullptr : &it->second;
}

nlohmann::json to_json(const CaseParameters& params) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : params.values) j[k] = to_json(v);
  return j;
}

CaseParameters case_parameters_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("case parameters must be a JSON object");
  CaseParameters p;
  for (const auto& [k, v] : j.items()) {
    if (v.is_null()) continue;
    p.values.emplace(k, param_value_from_json(v));
  }
  return p;
}

// ---------------------------------------------------------------------------

std::vector<std::string> check_definition(const ParamDef& def) {
  std::vector<std::string> problems;
  if (def.name.empty()) problems.push_back("parameter name is empty");
  else if (!is_identifier(def.name)) problems.push_back("parameter name '" + def.name + "' is not an identifier");
  const bool numeric = def.type == ValueType::Integer || def.type == ValueType::Number;
  if ((def.minimum || def.maximum) && !numeric) {
    problems.push_back("range given for non-numeric parameter '" + def.name + "'");
  }
  if (def.minimum && def.maximum && *def.minimum > *def.maximum) {
    problems.push_back("minimum exceeds maximum for '" + def.name + "'");
  }
  if (def.allowed) {
    for (const auto& v : *def.allowed) {
      if (!conforms(v, def.type)) {
        problems.push_back("allowed value " + describe(v) + " does not conform to " + to_string(def.type));
      }
    }
  }
  return problems;
}

const ParamDef* ParameterSchema::find(const std::string& name) const {
  auto it = defs_.find(name);
  return it == defs_.end() ? nullptr : &it->second;
}

void ParameterSchema::add(ParamDef def) {
  if (auto problems = check_definition(def); !problems.empty()) throw DomainError(problems.front());
  if (defs_.contains(def.name)) throw DomainError("duplicate parameter '" + def.name + "'");
  auto name = def.name;
  defs_.emplace(std::move(name), std::move(def));
}

ParamDef& ParameterSchema::at(const std::string& name) {
  auto it = defs_.find(name);
  if (it == defs_.end()) throw DomainError("unknown parameter '" + name + "'");
  return it->second;
}

nlohmann::json to_json(const ParamDef& def) {
  nlohmann::json j = {{"type", to_string(def.type)}, {"description", def.description}};
  if (def.allowed) {
    auto arr = nlohmann::json::array();
    for (const auto& v : *def.allowed) arr.push_back(to_json(v));
    j["enum"] = arr;
  }
  if (def.minimum) j["minimum"] = *def.minimum;
  if (def.maximum) j["maximum"] = *def.maximum;
  return j;
}

ParamDef param_def_from_json(const std::string& name, const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("definition of '" + name + "' must be an object");
  ParamDef def;
  def.name = name;
  def.type = value_type_from_string(j.at("type").get<std::string>());
  def.description = j.value("description", "");
  if (j.contains("enum")) {
    std::vector<ParamValue> allowed;
    for (const auto& v : j.at("enum")) allowed.push_back(param_value_from_json(v));
    def.allowed = std::move(allowed);
  }
  if (j.contains("minimum")) def.minimum = j.at("minimum").get<double>();
  if (j.contains("maximum")) def.maximum = j.at("maximum").get<double>();
  return def;
}

nlohmann::json to_json(const ParameterSchema& schema) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, def] : schema.definitions()) j[name] = to_json(def);
  return j;
}

ParameterSchema parameter_schema_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("parameter schema must be a JSON object");
  ParameterSchema schema;
  for (const auto& [name, def] : j.items()) schema.add(param_def_from_json(name, def));
  return schema;
}

SchemaConflict::SchemaConflict(ParamDef existing, ParamDef incoming)
    : std::runtime_error("conflicting definitions for '" + existing.name + "': existing " +
                         to_json(existing).dump() + " vs incoming " + to_json(incoming).dump()),
      existing_(std::move(existing)),
      incoming_(std::move(incoming)) {}

ParameterSchema merge_schema(const ParameterSchema& current, const ParameterSchema& additions) {
  ParameterSchema merged = current;
  for (const auto& [name, def] : additions.definitions()) {
    if (const ParamDef* existing = merged.find(name)) {
      if (!(*existing == def)) throw SchemaConflict(*existing, def);
      continue;
    }
    merged.add(def);
  }
  return merged;
}

ValidationReport validate_params(const CaseParameters& params, const ParameterSchema& schema) {
  ValidationReport report;
  for (const auto& [name, value] : params.values) {
    const ParamDef* def = schema.find(name);
    if (def == nullptr) {
      report.violations.push_back({name, "unknown parameter"});
      continue;
    }
    if (def->type == ValueType::String && params.is_unknown(name)) continue;
    if (!conforms(value, def->type)) {
      report.violations.push_back(
          {name, "type mismatch: expected " + std::string(to_string(def->type)) + ", got " + describe(value)});
      continue;
    }
    if (is_numeric(value)) {
      const double x = as_double(value);
      if ((def->minimum && x < *def->minimum) || (def->maximum && x > *def->maximum)) {
        report.violations.push_back({name, "out of range: " + describe(value)});
      }
    }
    if (def->allowed && std::none_of(def->allowed->begin(), def->allowed->end(),
                                     [&](const ParamValue& a) { return json_equal(a, value); })) {
      report.violations.push_back({name, "value " + describe(value) + " not among allowed values"});
    }
  }
  return report;
}

}  // namespace argeval

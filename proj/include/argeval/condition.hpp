#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "argeval/qbaf.hpp"

namespace argeval {

enum class ValueType { Boolean, Integer, Number, String };

const char* to_string(ValueType type);
ValueType value_type_from_string(std::string_view name);

/// Scalar case-parameter value. String parameters use the literal "unknown"
/// when a value was looked for but could not be established.
using ParamValue = std::variant<bool, std::int64_t, double, std::string>;

inline constexpr std::string_view kUnknownValue = "unknown";

nlohmann::json to_json(const ParamValue& value);
ParamValue param_value_from_json(const nlohmann::json& j);
/// JSON-Schema equality: numbers compare by value across int/double, bool is not a number.
bool json_equal(const ParamValue& a, const ParamValue& b);
bool is_numeric(const ParamValue& v);
double as_double(const ParamValue& v);
/// JSON-Schema type test (an integral double counts as an integer).
bool conforms(const ParamValue& v, ValueType type);
std::string describe(const ParamValue& v);

struct CaseParameters {
  std::map<std::string, ParamValue> values;

  bool has(const std::string& name) const { return values.contains(name); }
  bool is_unknown(const std::string& name) const;
  const ParamValue* get(const std::string& name) const;
  bool operator==(const CaseParameters&) const = default;
};

nlohmann::json to_json(const CaseParameters& params);
/// Nulls are dropped; they mean "not determined".
CaseParameters case_parameters_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Parameter schema

struct ParamDef {
  std::string name;
  ValueType type = ValueType::String;
  std::string description;
  std::optional<std::vector<ParamValue>> allowed;
  std::optional<double> minimum;
  std::optional<double> maximum;

  bool operator==(const ParamDef&) const = default;
};

class ParameterSchema {
 public:
  const std::map<std::string, ParamDef>& definitions() const { return defs_; }
  const ParamDef* find(const std::string& name) const;
  bool contains(const std::string& name) const { return defs_.contains(name); }
  bool empty() const { return defs_.empty(); }
  std::size_t size() const { return defs_.size(); }

  /// Throws DomainError when `def` breaks a ParamDef invariant or the name is taken.
  void add(ParamDef def);
  ParamDef& at(const std::string& name);

  bool operator==(const ParameterSchema&) const = default;

 private:
  std::map<std::string, ParamDef> defs_;
};

/// Reports every broken ParamDef invariant; empty when valid.
std::vector<std::string> check_definition(const ParamDef& def);

nlohmann::json to_json(const ParamDef& def);
ParamDef param_def_from_json(const std::string& name, const nlohmann::json& j);
nlohmann::json to_json(const ParameterSchema& schema);
ParameterSchema parameter_schema_from_json(const nlohmann::json& j);

class SchemaConflict : public std::runtime_error {
 public:
  SchemaConflict(ParamDef existing, ParamDef incoming);
  const ParamDef& existing() const { return existing_; }
  const ParamDef& incoming() const { return incoming_; }

 private:
  ParamDef existing_;
  ParamDef incoming_;
};

ParameterSchema merge_schema(const ParameterSchema& current, const ParameterSchema& additions);

ValidationReport validate_params(const CaseParameters& params, const ParameterSchema& schema);

// ---------------------------------------------------------------------------
// Conditions

struct PropertyConstraint {
  std::string param;
  std::optional<ValueType> type;
  std::optional<ParamValue> const_value;
  std::optional<std::vector<ParamValue>> enum_values;
  std::optional<double> minimum;
  std::optional<double> maximum;
  std::optional<double> exclusive_minimum;
  std::optional<double> exclusive_maximum;

  bool has_numeric_keyword() const {
    return minimum || maximum || exclusive_minimum || exclusive_maximum;
  }
  bool operator==(const PropertyConstraint&) const = default;
};

class Condition;

struct AlwaysTrue {
  bool operator==(const AlwaysTrue&) const = default;
};
struct Required {
  std::vector<std::string> params;
  bool operator==(const Required&) const = default;
};
struct AnyOf {
  std::vector<Condition> children;
  bool operator==(const AnyOf& other) const;
};
struct AllOf {
  std::vector<Condition> children;
  bool operator==(const AllOf& other) const;
};
struct Not {
  std::shared_ptr<const Condition> child;
  bool operator==(const Not& other) const;
};

/// Applicability condition over case parameters: the JSON-Schema keyword
/// subset {properties, const, enum, type, minimum, maximum, exclusiveMinimum,
/// exclusiveMaximum, required, anyOf, allOf, not}.
class Condition {
 public:
  using Node = std::variant<AlwaysTrue, PropertyConstraint, Required, AnyOf, AllOf, Not>;

  Condition() : node_(AlwaysTrue{}) {}
  explicit Condition(Node node) : node_(std::move(node)) {}

  static Condition always() { return Condition(); }
  static Condition property(PropertyConstraint c) { return Condition(Node(std::move(c))); }
  static Condition required(std::vector<std::string> params) {
    return Condition(Node(Required{std::move(params)}));
  }
  static Condition any_of(std::vector<Condition> children) {
    return Condition(Node(AnyOf{std::move(children)}));
  }
  static Condition all_of(std::vector<Condition> children) {
    return Condition(Node(AllOf{std::move(children)}));
  }
  static Condition negate(Condition child) {
    return Condition(Node(Not{std::make_shared<const Condition>(std::move(child))}));
  }

  const Node& node() const { return node_; }
  bool is_trivially_true() const { return std::holds_alternative<AlwaysTrue>(node_); }

  /// Parameter names referenced anywhere in the condition, sorted and unique.
  std::vector<std::string> referenced_params() const;

  bool operator==(const Condition& other) const { return node_ == other.node_; }

 private:
  Node node_;
};

class ConditionParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedFeature : public ConditionParseError {
 public:
  explicit UnsupportedFeature(std::string keyword);
  const std::string& keyword() const { return keyword_; }

 private:
  std::string keyword_;
};

class ConditionEvalError : public std::runtime_error {
 public:
  ConditionEvalError(std::string param, const std::string& message);
  const std::string& param() const { return param_; }

 private:
  std::string param_;
};

Condition parse_condition(std::string_view schema_text);
Condition parse_condition(const nlohmann::json& schema);
// Text overloads so string literals do not convert to json.
inline Condition parse_condition(const char* schema_text) { return parse_condition(std::string_view(schema_text)); }
inline Condition parse_condition(const std::string& schema_text) { return parse_condition(std::string_view(schema_text)); }

/// Serialises to the JSON-Schema dialect. With `wrapped`, the top level carries
/// the `$schema` and `type: object` wrapper; keyword order follows the
/// conventional layout (`type` first in property subschemas).
nlohmann::ordered_json to_json(const Condition& cond, bool wrapped = true);

bool eval_condition(const Condition& cond, const CaseParameters& params);

/// Cross-checks a condition against a schema: every referenced parameter must
/// be defined and numeric keywords must target numeric parameters.
std::vector<std::string> check_against_schema(const Condition& cond, const ParameterSchema& schema);

bool is_identifier(std::string_view name);

}  // namespace argeval

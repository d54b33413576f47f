#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "argeval/condition.hpp"
#include "argeval/ontology.hpp"
#include "argeval/pipeline.hpp"

namespace argeval {

/// The shared, contestable state: ontology, selected options, parameter
/// schema and one general framework per option.
struct Artifacts {
  Ontology ontology;
  std::vector<std::string> options;  // entity ids, in selection order
  ParameterSchema schema;
  std::map<std::string, GeneralQbaf> qbafs;  // keyed by option id

  std::vector<GeneralQbaf> frameworks() const;
  /// Cross-artifact invariants: every framework is valid, its option is an
  /// ontology entity and its conditions fit the schema.
  ValidationReport validate() const;
  bool operator==(const Artifacts&) const = default;
};

/// Sorted keys, shortest round-trip floats, LF terminated.
std::string canonical_json(const nlohmann::json& j);

/// Relative path -> canonical file contents, exactly as the store writes them.
std::map<std::string, std::string> serialise(const Artifacts& artifacts);
Artifacts deserialise(const std::map<std::string, std::string>& files);
/// Hex digest over serialise(); equal digests mean byte-identical stores.
std::string digest(const Artifacts& artifacts);

namespace edit {

struct SetBaseScore {
  std::string option;
  ArgumentId argument;
  double score = 0.5;
};

struct AddArgument {
  std::string option;
  ArgumentId parent;
  Polarity polarity = Polarity::Attack;
  std::string text;
  double base_score = 0.5;
  std::string nl_condition;
  Condition condition;
  /// Defaults to the next free "argN" id.
  std::optional<ArgumentId> id;
};

/// Removes the argument and everything below it. The root cannot be removed.
struct RemoveArgument {
  std::string option;
  ArgumentId argument;
};

struct ReplaceCondition {
  std::string option;
  ArgumentId argument;
  Condition condition;
  std::optional<std::string> nl_condition;
};

struct EditParameterDescription {
  std::string parameter;
  std::string description;
};

/// Adds a parameter definition or replaces an existing one.
struct SetParameter {
  ParamDef definition;
};

struct AddEntity {
  std::string name;
  std::string description;
  std::vector<std::string> parents;
};

/// Removes the entity from the ontology and the option set, together with its framework.
struct RemoveEntity {
  std::string entity;
};

}  // namespace edit

using Edit = std::variant<edit::SetBaseScore, edit::AddArgument, edit::RemoveArgument, edit::ReplaceCondition,
                          edit::EditParameterDescription, edit::SetParameter, edit::AddEntity, edit::RemoveEntity>;

struct Contestation {
  Edit edit;
  std::string justification;
};

/// Invalid edit or an edit that would break an invariant (HTTP 422).
class EditRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Edit names an option, argument, parameter or entity that does not exist (HTTP 404).
class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const char* edit_kind(const Edit& edit);

/// `{"kind": "set_base_score", ...fields}`. Malformed edits raise EditRejected.
nlohmann::json to_json(const Edit& edit);
Edit edit_from_json(const nlohmann::json& j);

/// `{"edit": {...}, "justification": "..."}`; the justification must be non-empty.
nlohmann::json to_json(const Contestation& c);
Contestation contestation_from_json(const nlohmann::json& j);

/// Returns the edited artifacts; the input is left untouched, so a rejected
/// edit never leaves partial changes behind.
Artifacts apply_contestation(const Artifacts& artifacts, const Contestation& contestation);

/// One line of the contestation log.
struct ContestRecord {
  std::uint64_t revision = 0;
  std::string timestamp;  // UTC, ISO 8601
  Contestation contestation;
};

nlohmann::json to_json(const ContestRecord& record);
ContestRecord contest_record_from_json(const nlohmann::json& j);

}  // namespace argeval

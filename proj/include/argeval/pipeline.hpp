#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argeval/condition.hpp"
#include "argeval/llm.hpp"
#include "argeval/ontology.hpp"
#include "argeval/qbaf.hpp"

namespace argeval {

/// Reasoning template injected into argument mining: premises plus the
/// critical questions that point at ways to attack them.
struct ArgumentScheme {
  std::string major_premise;
  std::vector<std::string> minor_premises;
  std::vector<std::string> critical_questions;

  bool operator==(const ArgumentScheme&) const = default;
};

nlohmann::json to_json(const ArgumentScheme& scheme);
/// Throws DomainError when the scheme has no critical question.
ArgumentScheme argument_scheme_from_json(const nlohmann::json& j);

struct MiningConfig {
  int depth = 1;
  bool score_root = false;
  std::optional<ArgumentScheme> scheme;
  /// Caps the number of attackers and, separately, supporters per argument.
  std::optional<int> max_breadth;
  /// Attempts per LLM call before giving up (mining, formalisation) or
  /// falling back to the neutral score (base-score estimation).
  int max_attempts = 3;
  /// Root claim; "{option}" is replaced by the option name.
  std::string root_template = "{option} is recommended.";

  void check() const;
};

/// Per-option framework whose non-root arguments carry applicability
/// conditions in natural language and in the formal condition language.
struct GeneralQbaf {
  Entity option;
  Qbaf qbaf;
  std::map<ArgumentId, std::string> nl_conditions;
  std::map<ArgumentId, Condition> conditions;

  ValidationReport validate() const;
  bool operator==(const GeneralQbaf&) const = default;
};

/// Canonical persisted form: the QBAF layout with `nl_condition` and
/// `condition` on every non-root argument, plus the option entity.
nlohmann::json to_json(const GeneralQbaf& general);
GeneralQbaf general_qbaf_from_json(const nlohmann::json& j);

/// Ontology miner backed by the model (stage "ontology", task "mine_ontology").
/// Replies are `{"entities": [{"name","description"}], "hierarchy": [{"parent","child"}]}`.
OntologyMiner llm_ontology_miner(llm::Client& client, int max_attempts = 3);

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MinedBaf {
  Qbaf skeleton;  // base scores unset (0.5)
  std::map<ArgumentId, std::string> nl_conditions;
};

MinedBaf mine_baf(const Entity& option, std::span<const Chunk> chunks, const MiningConfig& config,
                  llm::Client& client);

/// Context for scoring a non-root argument.
struct ScoringContext {
  const Argument& parent;
  bool is_support;
  std::string nl_condition;
};

/// Never throws on bad replies: after the attempt budget the neutral 0.5 is
/// returned and a warning logged.
double estimate_base_score(const Argument& argument, std::span<const Chunk> chunks,
                           const std::optional<ScoringContext>& context, llm::Client& client,
                           int max_attempts = 3);

struct FormalisedCondition {
  Condition condition;
  ParameterSchema schema;  // input schema merged with any new definitions
};

FormalisedCondition formalise_condition(const Argument& argument, const std::string& nl_condition,
                                        const ParameterSchema& schema, llm::Client& client,
                                        int max_attempts = 3);

struct OptionFailure {
  std::string option;
  std::string error;
};

struct BuildOutcome {
  std::vector<GeneralQbaf> frameworks;
  ParameterSchema schema;
  std::vector<OptionFailure> failures;
};

/// Options are processed in the given order and the parameter schema is
/// threaded through them. A failing option is reported and skipped; its
/// schema additions are discarded.
BuildOutcome build_general_qbafs(const Ontology& ontology, std::span<const Entity> options,
                                 const MiningConfig& config, llm::Client& client);

llm::GenerationRequest extraction_request(const std::string& case_text, const ParameterSchema& schema);

class ExtractionError : public std::runtime_error {
 public:
  ExtractionError(const std::string& message, std::string raw_output);
  const std::string& raw_output() const { return raw_output_; }

 private:
  std::string raw_output_;
};

CaseParameters extract_params(const std::string& case_text, const ParameterSchema& schema,
                              llm::Client& client, int max_attempts = 3);

struct RemovedArgument {
  ArgumentId id;
  std::string text;
  /// Set when this argument's own condition failed.
  std::optional<nlohmann::json> failed_condition;
  /// Set when the argument went with a removed ancestor.
  std::optional<ArgumentId> removed_with;
};

struct Instantiation {
  Qbaf qbaf;
  std::vector<RemovedArgument> removed;
};

class InstantiationError : public std::runtime_error {
 public:
  InstantiationError(ArgumentId argument, std::string param, const std::string& message);
  const ArgumentId& argument() const { return argument_; }
  const std::string& param() const { return param_; }

 private:
  ArgumentId argument_;
  std::string param_;
};

/// Removes every argument whose condition fails, together with its subtree.
Instantiation instantiate(const GeneralQbaf& general, const CaseParameters& params);

struct Recommendation {
  Entity option;
  double score = 0.0;
  Qbaf instantiated;
  StrengthMap strengths;
  std::vector<RemovedArgument> removed;
};

struct InferenceResult {
  CaseParameters parameters;
  /// Sorted by descending score, ties by option id.
  std::vector<Recommendation> recommendations;
  std::vector<OptionFailure> failures;

  const Recommendation* find(const std::string& option_id) const;
};

nlohmann::json to_json(const RemovedArgument& removed);
nlohmann::json to_json(const InferenceResult& result);

/// Scores every option against already-known parameters.
InferenceResult infer_with_params(std::span<const GeneralQbaf> generals, const CaseParameters& params,
                                  Semantics semantics = Semantics::DfQuad);

/// Extracts parameters once, then instantiates and scores every option.
/// `overrides` replace extracted values (per-case contestation).
InferenceResult infer_case(std::span<const GeneralQbaf> generals, const ParameterSchema& schema,
                           const std::string& case_text, llm::Client& client,
                           Semantics semantics = Semantics::DfQuad, const CaseParameters& overrides = {},
                           int max_attempts = 3);

}  // namespace argeval

#pragma once

// Prompt texts for the LLM-backed steps. They are configuration, not a
// contract: tests only rely on the information they carry.

#include <span>
#include <string>
#include <vector>

#include "argeval/condition.hpp"
#include "argeval/ontology.hpp"
#include "argeval/pipeline.hpp"

namespace argeval::prompts {

inline std::string chunk_block(std::span<const Chunk> chunks) {
  std::string out;
  for (const auto& c : chunks) {
    out += "[" + c.document_id + " / " + c.id + "]\n" + c.text + "\n\n";
  }
  return out;
}

inline std::string scheme_block(const ArgumentScheme& scheme) {
  std::string out = "Use the following argument scheme as the criteria for generating arguments.\n";
  out += "Major premise: " + scheme.major_premise + "\n";
  for (const auto& p : scheme.minor_premises) out += "Minor premise: " + p + "\n";
  for (std::size_t i = 0; i < scheme.critical_questions.size(); ++i) {
    out += "CQ" + std::to_string(i + 1) + ": " + scheme.critical_questions[i] + "\n";
  }
  return out;
}

inline const char* kOntologySystem =
    "You build an ontology of decision options from policy documents. For the given text chunk, "
    "list every decision option mentioned in it, reusing the exact names of existing entities "
    "where they match, and list hierarchy relations linking specific variants to their general "
    "categories. Reply with JSON only.";

inline std::string ontology_user(const Ontology& current, const Chunk& chunk) {
  std::string out = "Existing entities:\n";
  if (current.entities().empty()) out += "(none)\n";
  for (const auto& e : current.entities()) {
    out += "- " + e.name;
    auto parents = current.parents(e.id);
    if (!parents.empty()) {
      out += " (under:";
      for (const auto& p : parents) out += " " + current.find_entity(p)->name + ";";
      out.back() = ')';
    }
    out += "\n";
  }
  out += "\nText chunk [" + chunk.document_id + " / " + chunk.id + "]:\n" + chunk.text + "\n\n";
  out += "Reply as {\"entities\": [{\"name\": str, \"description\": str}], "
         "\"hierarchy\": [{\"parent\": str, \"child\": str}]}. "
         "Every name used in \"hierarchy\" must be an existing entity or appear in \"entities\".";
  return out;
}

inline const char* kMiningSystem =
    "You construct argumentation frameworks for decision support from policy documents. "
    "Given a claim about a decision option, produce arguments that attack it and arguments "
    "that support it, grounded in the provided documents. Each argument must come with the "
    "condition, stated in natural language, describing which cases it applies to. "
    "Use as many or as few arguments as the documents warrant. Reply with JSON only.";

inline std::string mining_user(const Entity& option, std::span<const Chunk> chunks, const std::string& claim,
                               const std::vector<std::string>& ancestry, int level, int depth,
                               const std::optional<ArgumentScheme>& scheme) {
  std::string out = "Decision option: " + option.name + "\n";
  if (!option.description.empty()) out += "Description: " + option.description + "\n";
  out += "\nRelevant documents:\n" + chunk_block(chunks);
  if (scheme) out += scheme_block(*scheme) + "\n";
  if (!ancestry.empty()) {
    out += "Debate so far (outermost first):\n";
    for (const auto& a : ancestry) out += "- " + a + "\n";
  }
  out += "Claim to attack and support (level " + std::to_string(level + 1) + " of " + std::to_string(depth) +
         "): " + claim + "\n\n";
  out += "Reply as {\"attackers\": [{\"statement\": str, \"condition\": str}], "
         "\"supporters\": [{\"statement\": str, \"condition\": str}]}. "
         "No statement may appear as both an attacker and a supporter.";
  return out;
}

inline const char* kScoringSystem =
    "You estimate the intrinsic strength of arguments in a debate about a decision, on a scale "
    "from 0 (no merit) to 1 (indisputable), using the provided documents as evidence. "
    "Reply with a single number only.";

inline std::string scoring_user(const Argument& argument, std::span<const Chunk> chunks,
                                const std::optional<ScoringContext>& context) {
  std::string out = "Relevant documents:\n" + chunk_block(chunks);
  out += "Argument: " + argument.text + "\n";
  if (context) {
    out += std::string("This argument ") + (context->is_support ? "supports" : "attacks") +
           " the argument: " + context->parent.text + "\n";
    out += "It applies when: " + context->nl_condition + "\n";
  }
  out += "\nReply with the base score as a number between 0 and 1.";
  return out;
}

inline const char* kFormaliseSystem =
    "You translate natural-language applicability conditions into JSON Schema conditions over "
    "case parameters. Use only the keywords properties, const, enum, type, minimum, maximum, "
    "exclusiveMinimum, exclusiveMaximum, required, anyOf, allOf and not. Reuse parameters from "
    "the existing schema where possible; define any new parameter under \"new_parameters\" with "
    "its type (boolean, integer, number or string) and a precise description. Reply with JSON only.";

inline std::string formalise_user(const Argument& argument, const std::string& nl_condition,
                                  const ParameterSchema& schema) {
  std::string out = "Existing parameter schema:\n" + to_json(schema).dump(2) + "\n\n";
  out += "Argument: " + argument.text + "\n";
  out += "Condition: " + nl_condition + "\n\n";
  out += "Example condition: {\"anyOf\": [{\"properties\": {\"flag\": {\"type\": \"boolean\", \"const\": true}}}, "
         "{\"properties\": {\"score\": {\"type\": \"integer\", \"maximum\": 49}}}]}\n";
  out += "Reply as {\"condition\": <schema>, \"new_parameters\": {<name>: {\"type\": str, \"description\": str, "
         "optional \"enum\": [...], optional \"minimum\": num, optional \"maximum\": num}}}.";
  return out;
}

inline const char* kExtractionSystem =
    "You extract structured case parameters from a case description. Report only values the "
    "description states or clearly implies; use null for anything that cannot be determined. "
    "String parameters may take the value \"unknown\" when the description says the value is unknown. "
    "Reply with JSON only.";

inline std::string extraction_user(const std::string& case_text, const ParameterSchema& schema) {
  std::string out = "Parameters:\n";
  for (const auto& [name, def] : schema.definitions()) {
    out += "- " + name + " (" + to_string(def.type) + "): " + def.description;
    if (def.allowed) {
      out += " Allowed values:";
      for (const auto& v : *def.allowed) out += " " + describe(v);
      out += ".";
    }
    if (def.minimum) out += " Minimum: " + nlohmann::json(*def.minimum).dump() + ".";
    if (def.maximum) out += " Maximum: " + nlohmann::json(*def.maximum).dump() + ".";
    out += "\n";
  }
  out += "\nCase description:\n" + case_text + "\n\nReply with a JSON object mapping parameter names to values.";
  return out;
}

}  // namespace argeval::prompts

#pragma once

// Scenario fixtures shared by the unit tests, the acceptance runner and the
// fixture writer used by the CLI tests.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argeval/contest.hpp"
#include "argeval/eval.hpp"
#include "argeval/ontology.hpp"
#include "argeval/pipeline.hpp"

namespace fixtures {

using namespace argeval;

Condition cond(const char* json_text);

struct ArgSpec {
  ArgumentId id;
  ArgumentId parent;  // empty for the root
  Polarity polarity = Polarity::Attack;
  std::string text;
  double score = 0.5;
  std::string nl;
  const char* condition = "{}";
};

GeneralQbaf make_general(const Entity& option, const std::vector<ArgSpec>& args);

// ---------------------------------------------------------------------------
// Surgical resection with two conditioned attackers, one of which fails for
// the case below; the failing attacker has a supporter of its own.

constexpr const char* kListing1 = R"({
 "$schema": "https://json-schema.org/draft/2020-12/schema",
 "type": "object",
 "anyOf": [
  {"properties": {"eloquent_structure_involvement": {"type": "boolean", "const": true}}},
  {"properties": {"kps": {"type": "integer", "maximum": 49}}}
 ]
})";

ParameterSchema gbm_schema();
GeneralQbaf resection_general();
CaseParameters resection_case();

// ---------------------------------------------------------------------------
// Glioblastoma treatment ontology and frameworks with the contestation
// experiment: base-score edits on the 60 Gy option and a clarified parameter
// description for surgical resection.

std::vector<Document> treatment_corpus();
/// Mock script with one mine_ontology reply per corpus chunk, in order.
nlohmann::json treatment_ontology_script();
Ontology treatment_ontology();
SelectionCriteria treatment_selection();
Artifacts treatment_artifacts();

extern const char* const kRt60;  // option names
extern const char* const kSurgery;
std::string option_id(const Artifacts& a, const char* name);

std::vector<Contestation> treatment_edits(const Artifacts& a);

CaseParameters treatment_trigger_params();           // 75, methylated, KPS 90, thalamus
CaseParameters treatment_trigger_params_clarified(); // same, with eloquent involvement recognised
std::string treatment_trigger_vignette();
CaseParameters treatment_second_params();            // 85, KPS 70, frontal lobe: RT60 keeps every argument
CaseParameters treatment_untouched_params();         // RT60 loses every non-root argument

/// Content-addressed extraction replies for the trigger vignette under the
/// schema before and after the description edit.
nlohmann::json treatment_extraction_script(const ParameterSchema& before, const ParameterSchema& after);

// ---------------------------------------------------------------------------
// Evaluation

eval::ParamGrid treatment_grid();
/// One vignette per grid point, labelled for the nine options by a fixed rule.
eval::LabelledDataset grid_dataset(const Artifacts& a);
/// Labels that agree with the given artifacts' own scores on `cases` grid points.
eval::LabelledDataset oracle_dataset(const Artifacts& a, std::size_t cases);
void write_dataset(const eval::LabelledDataset& d, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Small end-to-end trace: 3 chunks, 3 entities, two options with 3 arguments
// each, everything scripted.

std::vector<Document> trace_corpus();
nlohmann::json trace_script();
constexpr const char* kTraceCase = "A 64-year-old woman with newly diagnosed glioblastoma, KPS 60, MGMT methylated.";

/// Everything one scripted pass over the trace corpus produces.
struct TraceRun {
  Ontology ontology;
  std::vector<RejectedEdge> rejected;
  std::vector<Entity> options;
  BuildOutcome built;
  InferenceResult inference;
  llm::UsageReport usage;
  std::vector<std::string> tasks;  // model calls in order
};

/// Selection used for the trace: two documents, leaves, one root.
SelectionCriteria trace_selection();
TraceRun run_trace();

void write_corpus(const std::vector<Document>& docs, const std::filesystem::path& path);

}  // namespace fixtures

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "argeval/condition.hpp"
#include "argeval/llm.hpp"
#include "argeval/pipeline.hpp"

namespace argeval::eval {

/// Declared in ascending order of preference.
enum class Label { NotRecommended, MaybeRecommended, Recommended };

const char* to_string(Label label);
/// Accepts "recommended", "maybe_recommended", "not_recommended" and the
/// spaced or shortened forms ("maybe recommended", "maybe", "not").
Label label_from_string(std::string_view text);

/// Closed score interval a label admits.
std::pair<double, double> label_interval(Label label);

/// True when `score` lies in the label's closed interval. Throws DomainError
/// for scores outside [0, 1].
bool label_match(double score, Label label);

struct Gains {
  double recommended = 2.0;
  double maybe = 1.0;
  double not_recommended = 0.0;

  double of(Label label) const;
  /// Throws DomainError unless 0 <= not <= maybe <= recommended.
  void check() const;
};

using ParamGrid = std::vector<std::pair<std::string, std::vector<ParamValue>>>;

/// Cartesian product; the first parameter varies slowest.
std::vector<CaseParameters> generate_grid(const ParamGrid& grid);

struct DatasetCase {
  std::string id;
  CaseParameters params;
  std::string vignette;
};

struct LabelledDataset {
  std::vector<DatasetCase> cases;
  std::vector<std::string> options;  // sorted
  std::map<std::pair<std::string, std::string>, Label> labels;  // (case, option)

  /// Throws DomainError unless the label map is total over cases x options.
  void check() const;
  std::size_t pairs() const { return labels.size(); }
};

/// Reads `cases.jsonl` ({"case_id","params","vignette"}) and `labels.jsonl`
/// ({"case_id","option_id","label"}) from `dir`.
LabelledDataset load_dataset(const std::filesystem::path& dir);

using Predictions = std::map<std::pair<std::string, std::string>, double>;

/// Fraction of labelled pairs whose predicted score matches the label.
double lmr(const Predictions& predictions, const LabelledDataset& dataset);

/// NDCG of the ranking by descending score (ties by option id) against the
/// labels, with a log2(rank + 1) discount. 1.0 when the ideal DCG is zero.
double ndcg_case(const std::map<std::string, double>& scores, const std::map<std::string, Label>& labels,
                 const Gains& gains = {});

struct MetricsReport {
  double lmr = 0.0;
  double mean_ndcg = 0.0;
  std::map<std::string, double> per_case_ndcg;
  std::size_t cases = 0;
  std::size_t pairs = 0;
  std::optional<llm::UsageReport> usage;  // ontology stage already excluded

  nlohmann::json to_json() const;
};

MetricsReport evaluate_predictions(const Predictions& predictions, const LabelledDataset& dataset,
                                   const Gains& gains = {});

/// Throws DomainError naming every case or (case, option) pair without a result.
MetricsReport evaluate_run(const std::map<std::string, InferenceResult>& results, const LabelledDataset& dataset,
                           const Gains& gains = {}, const std::optional<llm::UsageReport>& usage = std::nullopt);

/// Runs inference for every case, either on the recorded parameters or by
/// extracting them from the vignette (which needs `client`).
std::map<std::string, InferenceResult> run_dataset(std::span<const GeneralQbaf> generals, const ParameterSchema& schema,
                                                   const LabelledDataset& dataset, llm::Client* client,
                                                   bool use_case_params, Semantics semantics = Semantics::DfQuad);

/// Row describing one run in the comparison table.
struct RunDescription {
  std::string method = "ArgEval";
  int depth = 1;
  bool score_root = false;
  bool scheme = false;
};

/// Plain-text table with the columns Method, d, Est. Root, Arg. Scheme, LMR,
/// NDCG and I/O Tokens (M).
std::string format_table(const std::vector<std::pair<RunDescription, MetricsReport>>& rows);

}  // namespace argeval::eval

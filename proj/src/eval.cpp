#include "argeval/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>

namespace argeval::eval {

using nlohmann::json;

const char* to_string(Label label) {
  switch (label) {
    case Label::Recommended: return "recommended";
    case Label::MaybeRecommended: return "maybe_recommended";
    case Label::NotRecommended: return "not_recommended";
  }
  return "not_recommended";
}

Label label_from_string(std::string_view text) {
  std::string s;
  for (char c : text) s.push_back(c == ' ' || c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "recommended") return Label::Recommended;
  if (s == "maybe_recommended" || s == "maybe") return Label::MaybeRecommended;
  if (s == "not_recommended" || s == "not") return Label::NotRecommended;
  throw DomainError("unknown label '" + std::string(text) + "'");
}

std::pair<double, double> label_interval(Label label) {
  switch (label) {
    case Label::Recommended: return {0.5, 1.0};
    case Label::MaybeRecommended: return {0.25, 0.75};
    case Label::NotRecommended: return {0.0, 0.5};
  }
  return {0.0, 0.5};
}

bool label_match(double score, Label label) {
  if (!(score >= 0.0 && score <= 1.0)) throw DomainError("score outside [0, 1]: " + json(score).dump());
  const auto [lo, hi] = label_interval(label);
  return score >= lo && score <= hi;
}

double Gains::of(Label label) const {
  switch (label) {
    case Label::Recommended: return recommended;
    case Label::MaybeRecommended: return maybe;
    case Label::NotRecommended: return not_recommended;
  }
  return not_recommended;
}

void Gains::check() const {
  if (!(not_recommended >= 0.0 && not_recommended <= maybe && maybe <= recommended && std::isfinite(recommended))) {
    throw DomainError("gains must satisfy 0 <= not_recommended <= maybe <= recommended");
  }
}

std::vector<CaseParameters> generate_grid(const ParamGrid& grid) {
  std::set<std::string> names;
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw DomainError("parameter '" + name + "' has no values");
    if (!names.insert(name).second) throw DomainError("parameter '" + name + "' listed twice");
  }
  std::vector<CaseParameters> out(1);
  for (const auto& [name, values] : grid) {
    std::vector<CaseParameters> next;
    next.reserve(out.size() * values.size());
    for (const auto& prefix : out) {
      for (const auto& v : values) {
        CaseParameters p = prefix;
        p.values[name] = v;
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

void LabelledDataset::check() const {
  std::vector<std::string> missing;
  for (const auto& c : cases) {
    for (const auto& o : options) {
      if (!labels.contains({c.id, o})) missing.push_back(c.id + "/" + o);
    }
  }
  if (!missing.empty()) {
    std::string msg = "label map is not total; missing";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
    if (missing.size() > 10) msg += " ... (" + std::to_string(missing.size()) + " in total)";
    throw DomainError(msg);
  }
  std::set<std::string> ids;
  for (const auto& c : cases) {
    if (!ids.insert(c.id).second) throw DomainError("case '" + c.id + "' appears twice");
  }
  for (const auto& [key, _] : labels) {
    if (!ids.contains(key.first)) throw DomainError("label for unknown case '" + key.first + "'");
  }
}

namespace {

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("dataset file not found: " + path.string());
  std::vector<json> out;
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw DomainError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

LabelledDataset load_dataset(const std::filesystem::path& dir) {
  LabelledDataset d;
  for (const auto& j : read_jsonl(dir / "cases.jsonl")) {
    d.cases.push_back({j.at("case_id").get<std::string>(),
                       case_parameters_from_json(j.value("params", json::object())), j.value("vignette", "")});
  }
  std::set<std::string> options;
  for (const auto& j : read_jsonl(dir / "labels.jsonl")) {
    const auto key = std::pair{j.at("case_id").get<std::string>(), j.at("option_id").get<std::string>()};
    if (!d.labels.emplace(key, label_from_string(j.at("label").get<std::string>())).second) {
      throw DomainError("duplicate label for " + key.first + "/" + key.second);
    }
    options.insert(key.second);
  }
  d.options.assign(options.begin(), options.end());
  d.check();
  return d;
}

double lmr(const Predictions& predictions, const LabelledDataset& dataset) {
  if (dataset.labels.empty()) throw DomainError("no labels to match against");
  std::size_t matched = 0;
  for (const auto& [key, label] : dataset.labels) {
    auto it = predictions.find(key);
    if (it == predictions.end()) throw DomainError("no prediction for " + key.first + "/" + key.second);
    if (label_match(it->second, label)) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(dataset.labels.size());
}

double ndcg_case(const std::map<std::string, double>& scores, const std::map<std::string, Label>& labels,
                 const Gains& gains) {
  if (labels.empty()) throw DomainError("ndcg needs at least one option");
  gains.check();
  std::vector<std::pair<std::string, double>> ranked;
  for (const auto& [option, _] : labels) {
    auto it = scores.find(option);
    if (it == scores.end()) throw DomainError("no score for option '" + option + "'");
    ranked.emplace_back(option, it->second);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<double> ideal;
  for (const auto& [_, label] : labels) ideal.push_back(gains.of(label));
  std::sort(ideal.begin(), ideal.end(), std::greater<>());

  double dcg = 0.0, idcg = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const double discount = std::log2(static_cast<double>(i) + 2.0);
    dcg += gains.of(labels.at(ranked[i].first)) / discount;
    idcg += ideal[i] / discount;
  }
  return idcg == 0.0 ? 1.0 : dcg / idcg;
}

MetricsReport evaluate_predictions(const Predictions& predictions, const LabelledDataset& dataset, const Gains& gains) {
  dataset.check();
  MetricsReport r;
  r.lmr = lmr(predictions, dataset);
  r.cases = dataset.cases.size();
  r.pairs = dataset.labels.size();
  double total = 0.0;
  for (const auto& c : dataset.cases) {
    std::map<std::string, double> scores;
    std::map<std::string, Label> labels;
    for (const auto& o : dataset.options) {
      labels[o] = dataset.labels.at({c.id, o});
      scores[o] = predictions.at({c.id, o});
    }
    const double v = ndcg_case(scores, labels, gains);
    r.per_case_ndcg[c.id] = v;
    total += v;
  }
  r.mean_ndcg = dataset.cases.empty() ? 0.0 : total / static_cast<double>(dataset.cases.size());
  return r;
}

MetricsReport evaluate_run(const std::map<std::string, InferenceResult>& results, const LabelledDataset& dataset,
                           const Gains& gains, const std::optional<llm::UsageReport>& usage) {
  Predictions predictions;
  std::vector<std::string> missing;
  for (const auto& c : dataset.cases) {
    auto it = results.find(c.id);
    if (it == results.end()) {
      missing.push_back(c.id);
      continue;
    }
    for (const auto& o : dataset.options) {
      if (const Recommendation* rec = it->second.find(o)) {
        predictions[{c.id, o}] = rec->score;
      } else {
        missing.push_back(c.id + "/" + o);
      }
    }
  }
  if (!missing.empty()) {
    std::string msg = "results do not cover the dataset; missing";
    for (const auto& m : missing) msg += " " + m;
    throw DomainError(msg);
  }
  MetricsReport r = evaluate_predictions(predictions, dataset, gains);
  if (usage) r.usage = usage->excluding(llm::Stage::Ontology);
  return r;
}

std::map<std::string, InferenceResult> run_dataset(std::span<const GeneralQbaf> generals, const ParameterSchema& schema,
                                                   const LabelledDataset& dataset, llm::Client* client,
                                                   bool use_case_params, Semantics semantics) {
  if (!use_case_params && client == nullptr) throw DomainError("inference from vignettes needs an LLM backend");
  std::map<std::string, InferenceResult> out;
  for (const auto& c : dataset.cases) {
    out.emplace(c.id, use_case_params ? infer_with_params(generals, c.params, semantics)
                                      : infer_case(generals, schema, c.vignette, *client, semantics));
  }
  return out;
}

json MetricsReport::to_json() const {
  json j = {{"lmr", lmr}, {"mean_ndcg", mean_ndcg}, {"per_case_ndcg", per_case_ndcg}, {"cases", cases}, {"pairs", pairs}};
  if (usage) j["usage"] = usage->to_json();
  return j;
}

std::string format_table(const std::vector<std::pair<RunDescription, MetricsReport>>& rows) {
  const std::vector<std::string> header = {"Method", "d", "Est. Root", "Arg. Scheme", "LMR", "NDCG", "I/O Tokens (M)"};
  std::vector<std::vector<std::string>> cells = {header};
  auto fixed = [](double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return std::string(buf);
  };
  for (const auto& [run, m] : rows) {
    std::string tokens = "-";
    if (m.usage) {
      tokens = fixed(static_cast<double>(m.usage->total.prompt_tokens) / 1e6, 2) + " / " +
               fixed(static_cast<double>(m.usage->total.completion_tokens) / 1e6, 2);
    }
    cells.push_back({run.method, std::to_string(run.depth), run.score_root ? "yes" : "no", run.scheme ? "yes" : "no",
                     fixed(m.lmr, 4), fixed(m.mean_ndcg, 4), tokens});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += " | ";
      out += row[i] + std::string(width[i] - row[i].size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
  };
  emit(cells[0]);
  for (std::size_t i = 0; i < width.size(); ++i) {
    if (i) out += "-+-";
    out += std::string(width[i], '-');
  }
  out += "\n";
  for (std::size_t r = 1; r < cells.size(); ++r) emit(cells[r]);
  return out;
}

}  // namespace argeval::eval

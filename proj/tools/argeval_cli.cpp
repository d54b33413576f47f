// argeval: command-line front end over the artifact store.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "argeval/backends.hpp"
#include "argeval/contest.hpp"
#include "argeval/eval.hpp"
#include "argeval/ontology.hpp"
#include "argeval/pipeline.hpp"
#include "argeval/service.hpp"
#include "argeval/store.hpp"

namespace {

using namespace argeval;
using nlohmann::json;

struct Globals {
  std::string store = "artifacts";
  std::string mock;
  int max_attempts = 3;
  bool verbose = false;
};

class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError("file not found: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw CliError(path + ": " + e.what());
  }
}

/// Backend plus accounting; created only for commands that talk to a model.
struct ModelSession {
  std::unique_ptr<llm::Backend> backend;
  llm::UsageAccumulator usage;
  std::unique_ptr<llm::Client> client;

  explicit ModelSession(const Globals& g) {
    if (!g.mock.empty()) {
      auto mock = std::make_unique<llm::MockBackend>();
      mock->load_file(g.mock);
      backend = std::move(mock);
    } else {
      auto config = llm::HttpBackendConfig::from_env();
      if (config.endpoint.empty()) throw CliError("no LLM backend: pass --mock or set ARGEVAL_LLM_ENDPOINT");
      backend = std::make_unique<llm::HttpBackend>(config);
    }
    llm::RetryPolicy policy;
    policy.max_attempts = g.max_attempts;
    client = std::make_unique<llm::Client>(*backend, usage, policy);
  }
};

std::unique_ptr<ArtifactStore> open_store(const Globals& g, bool must_exist) {
  if (must_exist && !std::filesystem::exists(std::filesystem::path(g.store) / "revision.json")) {
    throw CliError("no artifact store at " + g.store);
  }
  return ArtifactStore::open(g.store);
}

// ---------------------------------------------------------------------------

struct BuildOntologyArgs {
  std::string corpus;
  SelectionCriteria criteria;
};

int build_ontology(const Globals& g, const BuildOntologyArgs& args) {
  const auto documents = load_corpus(args.corpus);
  ModelSession session(g);
  ConstructionOptions options;
  options.on_rejected_edge = [](const RejectedEdge& e) {
    spdlog::warn("dropped hierarchy edge {} -> {} from {}: {}", e.parent, e.child, e.chunk, e.reason);
  };
  Ontology ontology = construct_ontology(documents, llm_ontology_miner(*session.client, g.max_attempts), options);
  const auto selected = select_options(ontology, args.criteria);

  auto store = open_store(g, false);
  Artifacts artifacts;
  artifacts.ontology = std::move(ontology);
  for (const auto& e : selected) artifacts.options.push_back(e.id);
  const auto rev = store->commit_build(std::move(artifacts));
  store->record_usage(session.usage.report());
  store->set_build_info({{"selection",
                          {{"min_documents", args.criteria.min_documents},
                           {"leaf_only", args.criteria.leaf_only},
                           {"single_root_ancestor", args.criteria.single_root_ancestor}}}});

  std::cout << selected.size() << " options selected (revision " << rev << ")\n";
  for (const auto& e : selected) std::cout << e.id << "\t" << e.name << "\n";
  return 0;
}

struct BuildQbafsArgs {
  int depth = 1;
  bool score_root = false;
  std::string scheme;
  int max_breadth = 0;
  std::vector<std::string> only;
};

int build_qbafs(const Globals& g, const BuildQbafsArgs& args) {
  auto store = open_store(g, true);
  const auto snap = store->snapshot();
  const Ontology& ontology = snap->artifacts.ontology;

  MiningConfig config;
  config.depth = args.depth;
  config.score_root = args.score_root;
  config.max_attempts = g.max_attempts;
  if (args.max_breadth > 0) config.max_breadth = args.max_breadth;
  if (!args.scheme.empty()) config.scheme = argument_scheme_from_json(read_json_file(args.scheme));
  config.check();

  std::vector<Entity> options;
  for (const auto& id : snap->artifacts.options) {
    if (!args.only.empty() && std::find(args.only.begin(), args.only.end(), id) == args.only.end()) continue;
    options.push_back(*ontology.find_entity(id));
  }
  if (options.empty()) throw CliError("no options to build; run build-ontology first");

  ModelSession session(g);
  BuildOutcome outcome = build_general_qbafs(ontology, options, config, *session.client);
  store->record_usage(session.usage.report());
  for (const auto& f : outcome.failures) std::cerr << "failed: " << f.option << ": " << f.error << "\n";
  if (outcome.frameworks.empty()) {
    std::cerr << "no framework could be built\n";
    return 1;
  }

  Artifacts artifacts = snap->artifacts;
  artifacts.schema = std::move(outcome.schema);
  artifacts.qbafs.clear();
  for (auto& f : outcome.frameworks) artifacts.qbafs.emplace(f.option.id, std::move(f));
  artifacts.options.clear();
  for (const auto& [id, _] : artifacts.qbafs) artifacts.options.push_back(id);
  const auto rev = store->commit_build(std::move(artifacts));

  json info = store->build_info();
  info["mining"] = {{"depth", config.depth}, {"score_root", config.score_root}, {"scheme", config.scheme.has_value()}};
  store->set_build_info(info);

  const auto built = store->snapshot();
  std::cout << built->artifacts.qbafs.size() << " frameworks, " << built->artifacts.schema.size()
            << " parameters (revision " << rev << ")\n";
  for (const auto& [id, q] : built->artifacts.qbafs) {
    std::cout << id << "\t" << q.qbaf.arguments.size() << " arguments, height " << q.qbaf.height() << "\n";
  }
  return outcome.failures.empty() ? 0 : 1;
}

struct InferArgs {
  std::string case_file;
  std::string text;
  std::string params;
  std::string overrides;
  std::string output;
  bool json_out = false;
};

int infer(const Globals& g, const InferArgs& args) {
  auto store = open_store(g, true);
  const auto snap = store->snapshot();
  if (snap->artifacts.qbafs.empty()) throw CliError("artifact store has no general frameworks");
  const auto generals = snap->artifacts.frameworks();
  const auto& schema = snap->artifacts.schema;

  auto load_params = [&](const std::string& path) {
    CaseParameters p = case_parameters_from_json(read_json_file(path));
    if (auto report = validate_params(p, schema); !report.ok()) throw CliError(path + ": " + report.summary());
    return p;
  };
  const CaseParameters overrides = args.overrides.empty() ? CaseParameters{} : load_params(args.overrides);

  InferenceResult result;
  if (!args.params.empty()) {
    CaseParameters params = load_params(args.params);
    for (const auto& [k, v] : overrides.values) params.values[k] = v;
    result = infer_with_params(generals, params);
  } else {
    std::string text = args.text;
    if (!args.case_file.empty()) text = read_file(args.case_file);
    if (text.empty()) throw CliError("give a case with --case-file, --text or --params");
    ModelSession session(g);
    try {
      result = infer_case(generals, schema, text, *session.client, Semantics::DfQuad, overrides, g.max_attempts);
    } catch (const ExtractionError& e) {
      store->record_usage(session.usage.report());
      std::cerr << e.what() << "\nraw model output:\n" << e.raw_output() << "\n";
      return 1;
    }
    store->record_usage(session.usage.report());
  }

  json out = to_json(result);
  out["revision"] = snap->revision;
  if (!args.output.empty()) write_file_atomic(args.output, out.dump(2) + "\n");
  if (args.json_out) {
    std::cout << out.dump(2) << "\n";
  } else {
    int rank = 1;
    for (const auto& r : result.recommendations) {
      std::printf("%2d. %-28s %.4f  (%zu of %zu arguments kept)\n", rank++, r.option.id.c_str(), r.score,
                  r.instantiated.arguments.size(), r.instantiated.arguments.size() + r.removed.size());
    }
    for (const auto& f : result.failures) std::printf("    %-28s failed: %s\n", f.option.c_str(), f.error.c_str());
  }
  return result.failures.empty() ? 0 : 1;
}

struct EvaluateArgs {
  std::string dataset;
  eval::Gains gains;
  bool use_case_params = false;
  std::string method = "ArgEval";
  std::string report = "metrics.json";
  std::string output;
};

int evaluate(const Globals& g, const EvaluateArgs& args) {
  args.gains.check();
  auto store = open_store(g, true);
  const auto snap = store->snapshot();
  if (snap->artifacts.qbafs.empty()) throw CliError("artifact store has no general frameworks");
  const auto dataset = eval::load_dataset(args.dataset);

  std::optional<ModelSession> session;
  if (!args.use_case_params) session.emplace(g);
  const auto generals = snap->artifacts.frameworks();
  const auto results = eval::run_dataset(generals, snap->artifacts.schema, dataset,
                                         session ? session->client.get() : nullptr, args.use_case_params);
  if (session) store->record_usage(session->usage.report());

  const auto report = eval::evaluate_run(results, dataset, args.gains, store->usage());
  const json info = store->build_info();
  eval::RunDescription run;
  run.method = args.method;
  if (info.contains("mining")) {
    run.depth = info["mining"].value("depth", 1);
    run.score_root = info["mining"].value("score_root", false);
    run.scheme = info["mining"].value("scheme", false);
  }
  json out = report.to_json();
  out["revision"] = snap->revision;
  const auto text = out.dump(2) + "\n";
  store->write_report(args.report, text);
  if (!args.output.empty()) write_file_atomic(args.output, text);

  std::cout << report.cases << " cases, " << report.pairs << " (case, option) pairs\n\n";
  std::cout << eval::format_table({{run, report}});
  return 0;
}

int contest(const Globals& g, const std::string& file, const std::string& inline_json) {
  auto store = open_store(g, true);
  json body;
  if (!file.empty()) {
    body = read_json_file(file);
  } else {
    try {
      body = json::parse(inline_json);
    } catch (const json::parse_error& e) {
      throw CliError(std::string("--json: ") + e.what());
    }
  }
  std::vector<json> items = body.is_array() ? body.get<std::vector<json>>() : std::vector<json>{body};
  for (const auto& item : items) {
    const auto record = store->contest(contestation_from_json(item));
    std::cout << "revision " << record.revision << ": " << edit_kind(record.contestation.edit) << "\n";
  }
  return 0;
}

int replay(const Globals& g, std::optional<std::uint64_t> to, const std::string& output) {
  auto store = open_store(g, true);
  const Artifacts replayed = store->replay(to);
  const auto snap = store->snapshot();
  const std::string d = digest(replayed);
  if (!output.empty()) {
    for (const auto& [name, text] : serialise(replayed)) write_file_atomic(std::filesystem::path(output) / name, text);
  }
  std::cout << "replayed to revision " << to.value_or(snap->revision) << ", digest " << d << "\n";
  if (!to || *to == snap->revision) {
    const bool same = d == digest(snap->artifacts);
    std::cout << (same ? "matches" : "DIFFERS FROM") << " the current store\n";
    return same ? 0 : 1;
  }
  return 0;
}

int show_log(const Globals& g) {
  auto store = open_store(g, true);
  for (const auto& r : store->log()) std::cout << canonical_json(to_json(r));
  return 0;
}

int show_usage(const Globals& g, bool exclude_ontology) {
  auto store = open_store(g, true);
  auto usage = store->usage();
  if (exclude_ontology) usage = usage.excluding(llm::Stage::Ontology);
  std::cout << usage.to_json().dump(2) << "\n";
  return 0;
}

int serve(const Globals& g, const std::string& host, int port, const std::string& datasets) {
  auto store = open_store(g, false);
  std::optional<ModelSession> session;
  if (!g.mock.empty() || std::getenv("ARGEVAL_LLM_ENDPOINT") != nullptr) session.emplace(g);
  ServiceOptions options;
  options.max_attempts = g.max_attempts;
  options.datasets_root = datasets;
  Service service(*store, session ? session->client.get() : nullptr, options);
  std::cerr << "serving " << g.store << " on http://" << host << ":" << port << "\n";
  if (!service.listen(host, port)) {
    std::cerr << "cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  if (session) store->record_usage(session->usage.report());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("argeval"));
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"Explainable decision support with argumentation frameworks"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--store", g.store, "Artifact directory")->capture_default_str();
  app.add_option("--mock", g.mock, "Scripted mock backend (JSON); default is the HTTP backend from ARGEVAL_LLM_*");
  app.add_option("--max-attempts", g.max_attempts, "Attempts per model call")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Log progress to stderr");

  BuildOntologyArgs bo;
  auto* cmd_bo = app.add_subcommand("build-ontology", "Mine the decision ontology from a corpus and select options");
  cmd_bo->add_option("--corpus", bo.corpus, "Corpus JSONL ({doc_id, chunk_id, ordinal, text})")->required();
  cmd_bo->add_option("--min-documents", bo.criteria.min_documents, "Minimum distinct documents per option")
      ->check(CLI::PositiveNumber);
  cmd_bo->add_flag("--leaf-only", bo.criteria.leaf_only, "Select leaf entities only");
  cmd_bo->add_flag("--single-root", bo.criteria.single_root_ancestor, "Require exactly one root ancestor");

  BuildQbafsArgs bq;
  auto* cmd_bq = app.add_subcommand("build-qbafs", "Build one general framework per selected option");
  cmd_bq->add_option("--depth", bq.depth, "Argument depth")->check(CLI::PositiveNumber)->capture_default_str();
  cmd_bq->add_flag("--score-root", bq.score_root, "Estimate the root base score instead of using 0.5");
  cmd_bq->add_option("--scheme", bq.scheme, "Argument scheme JSON");
  cmd_bq->add_option("--max-breadth", bq.max_breadth, "Cap on attackers and on supporters per argument");
  cmd_bq->add_option("--option", bq.only, "Restrict to these option ids");

  InferArgs ia;
  auto* cmd_inf = app.add_subcommand("infer", "Score every option for one case");
  auto* case_file = cmd_inf->add_option("--case-file", ia.case_file, "Case description file");
  auto* text = cmd_inf->add_option("--text", ia.text, "Case description");
  auto* params = cmd_inf->add_option("--params", ia.params, "Case parameters JSON (skips extraction)");
  case_file->excludes(text)->excludes(params);
  text->excludes(params);
  cmd_inf->add_option("--overrides", ia.overrides, "Parameter values that replace extracted ones");
  cmd_inf->add_option("--output", ia.output, "Write the full result JSON here");
  cmd_inf->add_flag("--json", ia.json_out, "Print the full result JSON instead of the ranking");

  EvaluateArgs ea;
  auto* cmd_ev = app.add_subcommand("evaluate", "Run a labelled dataset and report LMR and NDCG");
  cmd_ev->add_option("--dataset", ea.dataset, "Directory with cases.jsonl and labels.jsonl")->required();
  cmd_ev->add_option("--gain-recommended", ea.gains.recommended)->capture_default_str();
  cmd_ev->add_option("--gain-maybe", ea.gains.maybe)->capture_default_str();
  cmd_ev->add_option("--gain-not", ea.gains.not_recommended)->capture_default_str();
  cmd_ev->add_flag("--use-case-params", ea.use_case_params, "Use recorded parameters instead of extraction");
  cmd_ev->add_option("--method", ea.method, "Method name for the report table");
  cmd_ev->add_option("--report", ea.report, "Report file name under <store>/reports")->capture_default_str();
  cmd_ev->add_option("--output", ea.output, "Also write the report JSON here");

  std::string contest_file, contest_json;
  auto* cmd_ct = app.add_subcommand("contest", "Apply contestation edits ({edit, justification} or a list)");
  auto* cf = cmd_ct->add_option("--edit", contest_file, "Edit JSON file");
  auto* cj = cmd_ct->add_option("--json", contest_json, "Edit JSON text");
  cf->excludes(cj);
  cmd_ct->require_option(1);

  std::optional<std::uint64_t> to_revision;
  std::string replay_out;
  auto* cmd_rp = app.add_subcommand("replay", "Replay the contestation log onto the base artifacts");
  cmd_rp->add_option("--to-revision", to_revision, "Last revision to apply");
  cmd_rp->add_option("--output", replay_out, "Write the replayed artifacts into this directory");

  auto* cmd_log = app.add_subcommand("log", "Print the contestation log");

  bool exclude_ontology = false;
  auto* cmd_us = app.add_subcommand("usage", "Print recorded token usage");
  cmd_us->add_flag("--exclude-ontology", exclude_ontology, "Leave the ontology stage out of the totals");

  std::string host = "127.0.0.1", datasets;
  int port = 8080;
  auto* cmd_sv = app.add_subcommand("serve", "Serve the HTTP API");
  cmd_sv->add_option("--host", host)->capture_default_str();
  cmd_sv->add_option("--port", port)->capture_default_str();
  cmd_sv->add_option("--datasets", datasets, "Directory POST /evaluate may read datasets from");

  CLI11_PARSE(app, argc, argv);
  if (g.verbose) spdlog::set_level(spdlog::level::info);

  try {
    if (*cmd_bo) return build_ontology(g, bo);
    if (*cmd_bq) return build_qbafs(g, bq);
    if (*cmd_inf) return infer(g, ia);
    if (*cmd_ev) return evaluate(g, ea);
    if (*cmd_ct) return contest(g, contest_file, contest_json);
    if (*cmd_rp) return replay(g, to_revision, replay_out);
    if (*cmd_log) return show_log(g);
    if (*cmd_us) return show_usage(g, exclude_ontology);
    if (*cmd_sv) return serve(g, host, port, datasets);
  } catch (const NotFound& e) {
    std::cerr << "not found: " << e.what() << "\n";
    return 1;
  } catch (const EditRejected& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

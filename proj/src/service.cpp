#include "argeval/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "argeval/eval.hpp"

namespace argeval {

using nlohmann::json;

struct Service::Server {
  httplib::Server http;
};

namespace {

struct HttpError {
  int status;
  std::string message;
};

[[noreturn]] void fail(int status, std::string message) { throw HttpError{status, std::move(message)}; }

json artifacts_json(const Artifacts& a) {
  json qbafs = json::object();
  for (const auto& [id, g] : a.qbafs) qbafs[id] = to_json(g);
  return {{"ontology", to_json(a.ontology)}, {"options", a.options}, {"schema", to_json(a.schema)}, {"qbafs", qbafs}};
}

CaseParameters params_field(const json& body, const char* key, const ParameterSchema& schema) {
  if (!body.contains(key)) return {};
  if (!body.at(key).is_object()) fail(400, std::string("\"") + key + "\" must be an object");
  CaseParameters p;
  try {
    p = case_parameters_from_json(body.at(key));
  } catch (const std::exception& e) {
    fail(400, std::string("invalid \"") + key + "\": " + e.what());
  }
  if (auto report = validate_params(p, schema); !report.ok()) {
    fail(422, std::string("invalid \"") + key + "\": " + report.summary());
  }
  return p;
}

}  // namespace

Service::Service(ArtifactStore& store, llm::Client* client, ServiceOptions options)
    : store_(store), client_(client), options_(std::move(options)), server_(std::make_unique<Server>()) {
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    auto out = handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  auto& http = server_->http;
  http.Get(".*", dispatch);
  http.Post(".*", dispatch);
  http.Put(".*", dispatch);
  http.Delete(".*", dispatch);
}

Service::~Service() = default;

HttpResponse Service::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    json parsed = json::object();
    if (method == "POST") {
      try {
        if (!body.empty()) parsed = json::parse(body);
      } catch (const json::parse_error& e) {
        fail(400, std::string("request body is not JSON: ") + e.what());
      }
      if (!parsed.is_object()) fail(400, "request body must be a JSON object");
    }
    return route(method, path, parsed);
  } catch (const HttpError& e) {
    return {e.status, {{"error", e.message}}};
  } catch (const EditRejected& e) {
    return {422, {{"error", e.what()}}};
  } catch (const NotFound& e) {
    return {404, {{"error", e.what()}}};
  } catch (const ExtractionError& e) {
    return {502, {{"error", e.what()}, {"raw_output", e.raw_output()}}};
  } catch (const llm::GenerationError& e) {
    return {502, {{"error", e.what()}, {"raw_output", e.last_output()}}};
  } catch (const llm::TransportError& e) {
    return {502, {{"error", e.what()}}};
  } catch (const DomainError& e) {
    return {422, {{"error", e.what()}}};
  } catch (const json::exception& e) {
    return {400, {{"error", std::string("malformed request: ") + e.what()}}};
  } catch (const std::exception& e) {
    spdlog::error("{} {} failed: {}", method, path, e.what());
    return {500, {{"error", e.what()}}};
  }
}

HttpResponse Service::route(const std::string& method, const std::string& path, const json& body) {
  const auto snap = store_.snapshot();
  const Artifacts& a = snap->artifacts;
  const auto rev = snap->revision;
  auto expect = [&](const char* m) {
    if (method != m) fail(405, "method " + method + " not allowed on " + path);
  };

  if (path == "/artifacts/revision") {
    expect("GET");
    return {200, {{"revision", rev}, {"base_revision", store_.base_revision()}, {"digest", digest(a)}}};
  }
  if (path == "/ontology") {
    expect("GET");
    return {200, {{"revision", rev}, {"ontology", to_json(a.ontology)}, {"options", a.options}}};
  }
  if (path == "/schema") {
    expect("GET");
    return {200, {{"revision", rev}, {"schema", to_json(a.schema)}}};
  }
  if (path == "/qbafs") {
    expect("GET");
    json list = json::array();
    for (const auto& [_, g] : a.qbafs) list.push_back(to_json(g));
    return {200, {{"revision", rev}, {"qbafs", list}}};
  }
  if (path.starts_with("/qbafs/")) {
    expect("GET");
    const auto id = path.substr(7);
    auto it = a.qbafs.find(id);
    if (it == a.qbafs.end()) fail(404, "no framework for option '" + id + "'");
    return {200, {{"revision", rev}, {"qbaf", to_json(it->second)}}};
  }
  if (path == "/infer") {
    expect("POST");
    if (a.qbafs.empty()) fail(422, "no general frameworks have been built");
    const auto generals = a.frameworks();
    const auto overrides = params_field(body, "overrides", a.schema);
    InferenceResult result;
    if (body.contains("params")) {
      CaseParameters params = params_field(body, "params", a.schema);
      for (const auto& [k, v] : overrides.values) params.values[k] = v;
      result = infer_with_params(generals, params, options_.semantics);
    } else if (body.contains("case_text") && body.at("case_text").is_string()) {
      if (client_ == nullptr) fail(503, "no LLM backend configured; send \"params\" instead");
      result = infer_case(generals, a.schema, body.at("case_text").get<std::string>(), *client_, options_.semantics,
                          overrides, options_.max_attempts);
    } else {
      fail(400, "send either \"case_text\" or \"params\"");
    }
    return {200, {{"revision", rev}, {"result", to_json(result)}}};
  }
  if (path == "/contest") {
    expect("POST");
    const auto record = store_.contest(contestation_from_json(body));
    return {200, {{"revision", record.revision}, {"record", to_json(record)}}};
  }
  if (path == "/contest/log") {
    expect("GET");
    json log = json::array();
    for (const auto& r : store_.log()) log.push_back(to_json(r));
    return {200, {{"revision", rev}, {"base_revision", store_.base_revision()}, {"log", log}}};
  }
  if (path == "/contest/replay") {
    expect("POST");
    std::optional<std::uint64_t> to;
    if (body.contains("to_revision")) to = body.at("to_revision").get<std::uint64_t>();
    const Artifacts replayed = store_.replay(to);
    return {200, {{"revision", rev},
                  {"to_revision", to.value_or(rev)},
                  {"digest", digest(replayed)},
                  {"artifacts", artifacts_json(replayed)}}};
  }
  if (path == "/evaluate") {
    expect("POST");
    if (options_.datasets_root.empty()) fail(503, "no dataset directory configured");
    if (!body.contains("dataset") || !body.at("dataset").is_string()) fail(400, "\"dataset\" must be a path");
    const auto root = std::filesystem::weakly_canonical(options_.datasets_root);
    const auto dir = std::filesystem::weakly_canonical(root / body.at("dataset").get<std::string>());
    auto [r, _] = std::mismatch(root.begin(), root.end(), dir.begin(), dir.end());
    if (r != root.end()) fail(400, "dataset path leaves the dataset directory");
    if (!std::filesystem::is_directory(dir)) fail(404, "no dataset '" + body.at("dataset").get<std::string>() + "'");

    eval::Gains gains;
    if (body.contains("gains")) {
      const auto& g = body.at("gains");
      gains.recommended = g.value("recommended", gains.recommended);
      gains.maybe = g.value("maybe_recommended", gains.maybe);
      gains.not_recommended = g.value("not_recommended", gains.not_recommended);
    }
    gains.check();
    const auto dataset = eval::load_dataset(dir);
    const bool use_params = body.value("use_case_params", client_ == nullptr);
    const auto generals = a.frameworks();
    const auto results = eval::run_dataset(generals, a.schema, dataset, client_, use_params, options_.semantics);
    auto usage = store_.usage();
    if (client_ != nullptr) {
      llm::UsageAccumulator acc;
      acc.merge(usage);
      acc.merge(client_->usage().report());
      usage = acc.report();
    }
    const auto report = eval::evaluate_run(results, dataset, gains, usage);
    return {200, {{"revision", rev}, {"report", report.to_json()}}};
  }
  fail(404, "no route for " + method + " " + path);
}

bool Service::listen(const std::string& host, int port) { return server_->http.listen(host, port); }

int Service::bind_any_port(const std::string& host) { return server_->http.bind_to_any_port(host); }

bool Service::listen_after_bind() { return server_->http.listen_after_bind(); }

void Service::stop() { server_->http.stop(); }

}  // namespace argeval

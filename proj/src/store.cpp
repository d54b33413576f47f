#include "argeval/store.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace argeval {

namespace fs = std::filesystem;
using nlohmann::json;

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Artifacts read_artifacts(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const char* name : {"ontology.json", "options.json", "schema.json"}) files[name] = read_file(dir / name);
  if (fs::exists(dir / "qbafs")) {
    for (const auto& entry : fs::directory_iterator(dir / "qbafs")) {
      if (entry.path().extension() != ".json") continue;
      files["qbafs/" + entry.path().filename().string()] = read_file(entry.path());
    }
  }
  return deserialise(files);
}

}  // namespace

std::unique_ptr<ArtifactStore> ArtifactStore::open(const fs::path& root) {
  std::unique_ptr<ArtifactStore> store(new ArtifactStore(root));
  store->load();
  return store;
}

void ArtifactStore::load() {
  std::lock_guard lock(write_mutex_);
  if (!fs::exists(root_ / "revision.json")) {
    fs::create_directories(root_);
    auto snap = std::make_shared<Snapshot>();
    write_artifacts(root_ / "base", snap->artifacts);
    write_artifacts(root_, snap->artifacts);
    current_ = std::move(snap);
    write_log();
    write_revision();
    return;
  }
  const json rev = json::parse(read_file(root_ / "revision.json"));
  base_revision_ = rev.at("base_revision").get<std::uint64_t>();
  base_ = read_artifacts(root_ / "base");
  log_.clear();
  if (fs::exists(root_ / "contest_log.jsonl")) {
    std::istringstream in(read_file(root_ / "contest_log.jsonl"));
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) log_.push_back(contest_record_from_json(json::parse(line)));
    }
  }
  auto snap = std::make_shared<Snapshot>();
  snap->revision = rev.at("revision").get<std::uint64_t>();
  snap->artifacts = read_artifacts(root_);
  current_ = std::move(snap);
}

std::uint64_t ArtifactStore::revision() const { return snapshot()->revision; }

std::uint64_t ArtifactStore::base_revision() const {
  std::lock_guard lock(write_mutex_);
  return base_revision_;
}

std::shared_ptr<const Snapshot> ArtifactStore::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return current_;
}

void ArtifactStore::write_artifacts(const fs::path& dir, const Artifacts& artifacts) {
  const auto files = serialise(artifacts);
  for (const auto& [name, text] : files) write_file_atomic(dir / name, text);
  if (fs::exists(dir / "qbafs")) {
    for (const auto& entry : fs::directory_iterator(dir / "qbafs")) {
      if (!files.contains("qbafs/" + entry.path().filename().string())) fs::remove(entry.path());
    }
  }
}

void ArtifactStore::write_revision() {
  write_file_atomic(root_ / "revision.json",
                    canonical_json({{"revision", current_->revision}, {"base_revision", base_revision_}}));
}

void ArtifactStore::write_log() {
  std::string text;
  for (const auto& r : log_) text += canonical_json(to_json(r));
  write_file_atomic(root_ / "contest_log.jsonl", text);
}

std::uint64_t ArtifactStore::commit_build(Artifacts artifacts) {
  if (auto report = artifacts.validate(); !report.ok()) throw EditRejected("build output is invalid: " + report.summary());
  std::lock_guard lock(write_mutex_);
  auto snap = std::make_shared<Snapshot>();
  snap->revision = current_->revision + 1;
  snap->artifacts = std::move(artifacts);

  if (!log_.empty()) {
    write_file_atomic(root_ / "archive" /
                          ("contest_log." + std::to_string(base_revision_) + "-" +
                           std::to_string(current_->revision) + ".jsonl"),
                      read_file(root_ / "contest_log.jsonl"));
  }
  log_.clear();
  base_revision_ = snap->revision;
  base_ = snap->artifacts;
  write_artifacts(root_ / "base", base_);
  write_artifacts(root_, snap->artifacts);
  {
    std::lock_guard swap(snapshot_mutex_);
    current_ = snap;
  }
  write_log();
  write_revision();
  return snap->revision;
}

ContestRecord ArtifactStore::contest(const Contestation& contestation) {
  std::lock_guard lock(write_mutex_);
  auto snap = std::make_shared<Snapshot>();
  snap->artifacts = apply_contestation(current_->artifacts, contestation);
  snap->revision = current_->revision + 1;

  ContestRecord record{snap->revision, utc_now(), contestation};
  log_.push_back(record);
  write_artifacts(root_, snap->artifacts);
  {
    std::lock_guard swap(snapshot_mutex_);
    current_ = snap;
  }
  write_log();
  write_revision();
  return record;
}

std::vector<ContestRecord> ArtifactStore::log() const {
  std::lock_guard lock(write_mutex_);
  return log_;
}

Artifacts ArtifactStore::replay(std::optional<std::uint64_t> to_revision) const {
  std::lock_guard lock(write_mutex_);
  const std::uint64_t target = to_revision.value_or(current_->revision);
  if (target < base_revision_) {
    throw NotFound("revision " + std::to_string(target) + " predates the current build (revision " +
                   std::to_string(base_revision_) + ")");
  }
  if (target > current_->revision) throw NotFound("no revision " + std::to_string(target));
  Artifacts a = base_;
  for (const auto& r : log_) {
    if (r.revision > target) break;
    a = apply_contestation(a, r.contestation);
  }
  return a;
}

llm::UsageReport ArtifactStore::usage() const {
  std::lock_guard lock(write_mutex_);
  if (!fs::exists(root_ / "usage.json")) return llm::UsageAccumulator{}.report();
  return llm::usage_report_from_json(json::parse(read_file(root_ / "usage.json")));
}

void ArtifactStore::record_usage(const llm::UsageReport& usage) {
  std::lock_guard lock(write_mutex_);
  llm::UsageAccumulator acc;
  if (fs::exists(root_ / "usage.json")) acc.merge(llm::usage_report_from_json(json::parse(read_file(root_ / "usage.json"))));
  acc.merge(usage);
  write_file_atomic(root_ / "usage.json", canonical_json(acc.report().to_json()));
}

json ArtifactStore::build_info() const {
  std::lock_guard lock(write_mutex_);
  if (!fs::exists(root_ / "build.json")) return json::object();
  return json::parse(read_file(root_ / "build.json"));
}

void ArtifactStore::set_build_info(const json& info) {
  std::lock_guard lock(write_mutex_);
  write_file_atomic(root_ / "build.json", canonical_json(info));
}

fs::path ArtifactStore::write_report(const std::string& name, const std::string& contents) {
  if (name.empty() || name.find('/') != std::string::npos || name.starts_with(".")) {
    throw DomainError("invalid report name '" + name + "'");
  }
  std::lock_guard lock(write_mutex_);
  const fs::path path = root_ / "reports" / name;
  write_file_atomic(path, contents);
  return path;
}

}  // namespace argeval

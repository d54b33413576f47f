#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argeval/contest.hpp"
#include "argeval/llm.hpp"

namespace argeval {

/// Immutable view of the artifacts at one revision.
struct Snapshot {
  std::uint64_t revision = 0;
  Artifacts artifacts;
};

/// Versioned artifact directory.
///
///   revision.json        {"revision": n, "base_revision": b}
///   ontology.json, options.json, schema.json, qbafs/<option>.json
///   base/...             the same files as of `base_revision`
///   contest_log.jsonl    edits applied since `base_revision`
///   archive/             logs superseded by later builds
///   usage.json, build.json, reports/
///
/// Every file is replaced atomically (write to a temporary, then rename).
/// Readers take a snapshot and keep it for the whole request, so a
/// contestation landing mid-request never mixes revisions.
class ArtifactStore {
 public:
  /// Opens an existing store or initialises an empty one at revision 0.
  static std::unique_ptr<ArtifactStore> open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  std::uint64_t revision() const;
  std::uint64_t base_revision() const;
  std::shared_ptr<const Snapshot> snapshot() const;

  /// Replaces the artifacts wholesale (a fresh build). The result becomes the
  /// new replay base and the old contestation log is archived.
  std::uint64_t commit_build(Artifacts artifacts);

  /// Validates and applies one edit, appends it to the log and bumps the revision.
  ContestRecord contest(const Contestation& contestation);

  std::vector<ContestRecord> log() const;
  /// Base artifacts with the log applied up to and including `to_revision`
  /// (default: the whole log). Does not modify the store.
  Artifacts replay(std::optional<std::uint64_t> to_revision = std::nullopt) const;

  llm::UsageReport usage() const;
  /// Adds to the persisted per-stage token counts.
  void record_usage(const llm::UsageReport& usage);

  nlohmann::json build_info() const;
  void set_build_info(const nlohmann::json& info);

  std::filesystem::path write_report(const std::string& name, const std::string& contents);

 private:
  explicit ArtifactStore(std::filesystem::path root) : root_(std::move(root)) {}

  void load();
  void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts);
  void write_revision();
  void write_log();

  std::filesystem::path root_;
  mutable std::mutex write_mutex_;  // serialises writers
  mutable std::mutex snapshot_mutex_;  // guards the pointer swap only
  std::shared_ptr<const Snapshot> current_;
  std::uint64_t base_revision_ = 0;
  Artifacts base_;
  std::vector<ContestRecord> log_;
};

/// Writes `contents` to `path` via a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace argeval

#pragma once

#include <functional>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "argeval/qbaf.hpp"

namespace argeval {

struct Chunk {
  std::string id;
  std::string document_id;
  std::string text;
  int ordinal = 0;

  bool operator==(const Chunk&) const = default;
};

struct Document {
  std::string id;
  std::vector<Chunk> chunks;
};

struct Entity {
  std::string id;
  std::string name;
  std::string description;

  bool operator==(const Entity&) const = default;
};

struct HierarchyEdge {
  std::string parent;  // entity ids
  std::string child;

  bool operator==(const HierarchyEdge&) const = default;
};

struct ProvenanceLink {
  std::string entity;
  std::string chunk;

  bool operator==(const ProvenanceLink&) const = default;
};

/// Lowercased, whitespace-collapsed form used for entity identity.
std::string normalise_name(std::string_view name);
/// Lowercase ASCII slug, e.g. "Radiotherapy 60 Gy" -> "radiotherapy-60-gy".
std::string slugify(std::string_view name);

/// Decision ontology: entities, source chunks, a parent/child DAG and
/// entity-to-chunk provenance. Collections keep insertion order.
class Ontology {
 public:
  const std::vector<Entity>& entities() const { return entities_; }
  const std::vector<Chunk>& chunks() const { return chunks_; }
  const std::vector<HierarchyEdge>& hierarchy() const { return hierarchy_; }
  const std::vector<ProvenanceLink>& provenance() const { return provenance_; }

  const Entity* find_entity(const std::string& id) const;
  const Entity* find_by_name(std::string_view name) const;
  const Chunk* find_chunk(const std::string& id) const;

  std::vector<std::string> children(const std::string& id) const;
  std::vector<std::string> parents(const std::string& id) const;
  /// Ancestors without parents; an entity with no parents is its own root.
  std::vector<std::string> root_ancestors(const std::string& id) const;
  /// Distinct document ids of the chunks linked to `id`.
  std::vector<std::string> documents_mentioning(const std::string& id) const;
  /// True when adding parent->child would close a cycle (self-edges included).
  bool would_create_cycle(const std::string& parent, const std::string& child) const;

  /// Returns the entity with the same normalised name, or inserts a new one.
  const Entity& ensure_entity(std::string_view name, std::string_view description = {});
  /// Inserts an entity with a caller-chosen id; throws DomainError on id or name clashes.
  void add_entity(Entity entity);
  void add_chunk(Chunk chunk);
  /// Returns false (and leaves the hierarchy alone) for duplicates and cycles.
  bool add_edge(const std::string& parent, const std::string& child);
  void add_provenance(const std::string& entity, const std::string& chunk);

  /// Removes the entity with its hierarchy edges and provenance links.
  void remove_entity(const std::string& id);

  ValidationReport validate() const;

  bool operator==(const Ontology&) const = default;

 private:
  std::vector<Entity> entities_;
  std::vector<Chunk> chunks_;
  std::vector<HierarchyEdge> hierarchy_;
  std::vector<ProvenanceLink> provenance_;
};

nlohmann::json to_json(const Ontology& ontology);
Ontology ontology_from_json(const nlohmann::json& j);

/// What a miner reports for one chunk: every entity mentioned in it (new or
/// existing, by name) and any new hierarchy edges (parent name, child name).
struct MinedChunk {
  struct MinedEntity {
    std::string name;
    std::string description;
  };
  std::vector<MinedEntity> entities;
  std::vector<std::pair<std::string, std::string>> hierarchy;
};

using OntologyMiner = std::function<MinedChunk(const Ontology& current, const Chunk& chunk)>;
using ChunkFilter = std::function<bool(const Chunk&)>;

struct RejectedEdge {
  std::string parent;
  std::string child;
  std::string chunk;
  std::string reason;
};

struct ConstructionOptions {
  /// Relevance filter applied before mining; empty means keep everything.
  ChunkFilter relevance;
  /// Receives every hierarchy edge the construction drops.
  std::function<void(const RejectedEdge&)> on_rejected_edge;
};

class ConstructionError : public std::runtime_error {
 public:
  ConstructionError(const std::string& message, Ontology partial, std::string failed_chunk);
  const Ontology& partial() const { return partial_; }
  const std::string& failed_chunk() const { return failed_chunk_; }

 private:
  Ontology partial_;
  std::string failed_chunk_;
};

Ontology construct_ontology(const std::vector<Document>& documents, const OntologyMiner& miner,
                            const ConstructionOptions& options = {});

struct SelectionCriteria {
  int min_documents = 1;
  bool leaf_only = false;
  bool single_root_ancestor = false;
};

std::vector<Entity> select_options(const Ontology& ontology, const SelectionCriteria& criteria);

/// Throws DomainError for unknown entity ids.
std::vector<Chunk> chunks_for(const Ontology& ontology, const std::string& entity_id);

/// Reads `{"doc_id","chunk_id","ordinal","text"}` lines. Documents keep the
/// order of their first line; chunks within a document are ordered by ordinal.
std::vector<Document> read_corpus_jsonl(std::istream& in);
std::vector<Document> load_corpus(const std::string& path);

}  // namespace argeval

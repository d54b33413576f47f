#include "argeval/ontology.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <unordered_map>

namespace argeval {

std::string normalise_name(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string slugify(std::string_view name) {
  std::string out;
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out.push_back(static_cast<char>(std::tolower(u)));
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "entity" : out;
}

const Entity* Ontology::find_entity(const std::string& id) const {
  auto it = std::find_if(entities_.begin(), entities_.end(), [&](const Entity& e) { return e.id == id; });
  return it == entities_.end() ? nullptr : &*it;
}

const Entity* Ontology::find_by_name(std::string_view name) const {
  const auto key = normalise_name(name);
  auto it = std::find_if(entities_.begin(), entities_.end(),
                         [&](const Entity& e) { return normalise_name(e.name) == key; });
  return it == entities_.end() ? nullptr : &*it;
}

const Chunk* Ontology::find_chunk(const std::string& id) const {
  auto it = std::find_if(chunks_.begin(), chunks_.end(), [&](const Chunk& c) { return c.id == id; });
  return it == chunks_.end() ? nullptr : &*it;
}

std::vector<std::string> Ontology::children(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& e : hierarchy_) {
    if (e.parent == id) out.push_back(e.child);
  }
  return out;
}

std::vector<std::string> Ontology::parents(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& e : hierarchy_) {
    if (e.child == id) out.push_back(e.parent);
  }
  return out;
}

std::vector<std::string> Ontology::root_ancestors(const std::string& id) const {
  std::set<std::string> roots, visited;
  std::vector<std::string> stack{id};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (!visited.insert(cur).second) continue;
    auto ps = parents(cur);
    if (ps.empty()) roots.insert(cur);
    stack.insert(stack.end(), ps.begin(), ps.end());
  }
  return {roots.begin(), roots.end()};
}

std::vector<std::string> Ontology::documents_mentioning(const std::string& id) const {
  std::set<std::string> docs;
  for (const auto& p : provenance_) {
    if (p.entity != id) continue;
    if (const Chunk* c = find_chunk(p.chunk)) docs.insert(c->document_id);
  }
  return {docs.begin(), docs.end()};
}

bool Ontology::would_create_cycle(const std::string& parent, const std::string& child) const {
  if (parent == child) return true;
  // A cycle appears iff `parent` is already reachable downwards from `child`.
  std::set<std::string> visited;
  std::vector<std::string> stack{child};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (cur == parent) return true;
    if (!visited.insert(cur).second) continue;
    auto kids = children(cur);
    stack.insert(stack.end(), kids.begin(), kids.end());
  }
  return false;
}

const Entity& Ontology::ensure_entity(std::string_view name, std::string_view description) {
  if (const Entity* existing = find_by_name(name)) return *existing;
  std::string display;
  // Keep the miner's spelling but collapse stray whitespace.
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!display.empty() && display.back() != ' ') display.push_back(' ');
    } else {
      display.push_back(c);
    }
  }
  while (!display.empty() && display.back() == ' ') display.pop_back();
  if (display.empty()) throw DomainError("entity name is empty");

  const auto base = slugify(display);
  auto id = base;
  for (int n = 2; find_entity(id) != nullptr; ++n) id = base + "-" + std::to_string(n);
  entities_.push_back({std::move(id), std::move(display), std::string(description)});
  return entities_.back();
}

void Ontology::add_entity(Entity entity) {
  if (entity.id.empty() || normalise_name(entity.name).empty()) throw DomainError("entity id and name must be non-empty");
  if (find_entity(entity.id) != nullptr) throw DomainError("duplicate entity id '" + entity.id + "'");
  if (find_by_name(entity.name) != nullptr) throw DomainError("duplicate entity name '" + entity.name + "'");
  entities_.push_back(std::move(entity));
}

void Ontology::add_chunk(Chunk chunk) {
  if (find_chunk(chunk.id) != nullptr) return;
  chunks_.push_back(std::move(chunk));
}

bool Ontology::add_edge(const std::string& parent, const std::string& child) {
  if (std::find(hierarchy_.begin(), hierarchy_.end(), HierarchyEdge{parent, child}) != hierarchy_.end()) {
    return false;
  }
  if (would_create_cycle(parent, child)) return false;
  hierarchy_.push_back({parent, child});
  return true;
}

void Ontology::add_provenance(const std::string& entity, const std::string& chunk) {
  ProvenanceLink link{entity, chunk};
  if (std::find(provenance_.begin(), provenance_.end(), link) == provenance_.end()) {
    provenance_.push_back(std::move(link));
  }
}

void Ontology::remove_entity(const std::string& id) {
  std::erase_if(entities_, [&](const Entity& e) { return e.id == id; });
  std::erase_if(hierarchy_, [&](const HierarchyEdge& e) { return e.parent == id || e.child == id; });
  std::erase_if(provenance_, [&](const ProvenanceLink& p) { return p.entity == id; });
}

ValidationReport Ontology::validate() const {
  ValidationReport report;
  auto add = [&](std::string subject, std::string message) {
    report.violations.push_back({std::move(subject), std::move(message)});
  };
  std::set<std::string> ids, names;
  for (const auto& e : entities_) {
    if (!ids.insert(e.id).second) add(e.id, "duplicate entity id");
    if (!names.insert(normalise_name(e.name)).second) add(e.id, "duplicate entity name '" + e.name + "'");
  }
  std::set<std::string> chunk_ids;
  std::set<std::pair<std::string, int>> positions;
  for (const auto& c : chunks_) {
    if (c.text.empty()) add(c.id, "empty chunk text");
    if (!chunk_ids.insert(c.id).second) add(c.id, "duplicate chunk id");
    if (!positions.emplace(c.document_id, c.ordinal).second) add(c.id, "duplicate (document, ordinal)");
  }
  for (const auto& e : hierarchy_) {
    if (!ids.contains(e.parent) || !ids.contains(e.child)) {
      add(e.parent + "->" + e.child, "hierarchy edge references an unknown entity");
    }
  }
  for (const auto& p : provenance_) {
    if (!ids.contains(p.entity)) add(p.entity, "provenance references an unknown entity");
    if (!chunk_ids.contains(p.chunk)) add(p.chunk, "provenance references an unknown chunk");
  }
  // Kahn's algorithm: anything left over sits on a cycle.
  std::unordered_map<std::string, int> indegree;
  for (const auto& e : entities_) indegree[e.id] = 0;
  for (const auto& e : hierarchy_) ++indegree[e.child];
  std::vector<std::string> ready;
  for (const auto& [id, d] : indegree) {
    if (d == 0) ready.push_back(id);
  }
  std::size_t seen = 0;
  while (!ready.empty()) {
    auto cur = ready.back();
    ready.pop_back();
    ++seen;
    for (const auto& c : children(cur)) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  if (seen != indegree.size()) add("hierarchy", "cycle detected");
  return report;
}

nlohmann::json to_json(const Ontology& ontology) {
  nlohmann::json entities = nlohmann::json::array(), chunks = nlohmann::json::array(),
                 hierarchy = nlohmann::json::array(), provenance = nlohmann::json::array();
  for (const auto& e : ontology.entities()) {
    entities.push_back({{"id", e.id}, {"name", e.name}, {"description", e.description}});
  }
  for (const auto& c : ontology.chunks()) {
    chunks.push_back({{"chunk_id", c.id}, {"doc_id", c.document_id}, {"ordinal", c.ordinal}, {"text", c.text}});
  }
  for (const auto& h : ontology.hierarchy()) hierarchy.push_back({h.parent, h.child});
  for (const auto& p : ontology.provenance()) provenance.push_back({p.entity, p.chunk});
  return {{"entities", entities}, {"chunks", chunks}, {"hierarchy", hierarchy}, {"provenance", provenance}};
}

Ontology ontology_from_json(const nlohmann::json& j) {
  Ontology o;
  for (const auto& e : j.at("entities")) {
    o.add_entity({e.at("id").get<std::string>(), e.at("name").get<std::string>(), e.value("description", "")});
  }
  for (const auto& c : j.at("chunks")) {
    o.add_chunk({c.at("chunk_id").get<std::string>(), c.at("doc_id").get<std::string>(),
                 c.at("text").get<std::string>(), c.at("ordinal").get<int>()});
  }
  for (const auto& h : j.at("hierarchy")) {
    if (!o.add_edge(h.at(0).get<std::string>(), h.at(1).get<std::string>())) {
      throw DomainError("ontology hierarchy contains a duplicate edge or a cycle");
    }
  }
  for (const auto& p : j.at("provenance")) o.add_provenance(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  if (auto report = o.validate(); !report.ok()) throw DomainError("invalid ontology: " + report.summary());
  return o;
}

ConstructionError::ConstructionError(const std::string& message, Ontology partial, std::string failed_chunk)
    : std::runtime_error(message), partial_(std::move(partial)), failed_chunk_(std::move(failed_chunk)) {}

Ontology construct_ontology(const std::vector<Document>& documents, const OntologyMiner& miner,
                            const ConstructionOptions& options) {
  Ontology ontology;
  auto reject = [&](const RejectedEdge& edge) {
    if (options.on_rejected_edge) options.on_rejected_edge(edge);
  };
  for (const auto& doc : documents) {
    for (const auto& chunk : doc.chunks) {
      if (chunk.text.empty()) throw DomainError("chunk '" + chunk.id + "' has empty text");
      if (options.relevance && !options.relevance(chunk)) continue;

      MinedChunk mined;
      try {
        mined = miner(ontology, chunk);
      } catch (const std::exception& e) {
        throw ConstructionError(std::string("ontology miner failed on chunk '") + chunk.id + "': " + e.what(),
                                ontology, chunk.id);
      }

      std::vector<std::string> mentioned;
      for (const auto& m : mined.entities) {
        mentioned.push_back(ontology.ensure_entity(m.name, m.description).id);
      }
      ontology.add_chunk(chunk);
      for (const auto& [parent_name, child_name] : mined.hierarchy) {
        const Entity* parent = ontology.find_by_name(parent_name);
        const Entity* child = ontology.find_by_name(child_name);
        if (parent == nullptr || child == nullptr) {
          reject({parent_name, child_name, chunk.id, "unknown entity"});
          continue;
        }
        if (ontology.would_create_cycle(parent->id, child->id)) {
          reject({parent_name, child_name, chunk.id, "would create a cycle"});
          continue;
        }
        ontology.add_edge(parent->id, child->id);
      }
      for (const auto& id : mentioned) ontology.add_provenance(id, chunk.id);
    }
  }
  return ontology;
}

std::vector<Entity> select_options(const Ontology& ontology, const SelectionCriteria& criteria) {
  if (criteria.min_documents < 1) throw DomainError("min_documents must be at least 1");
  std::vector<Entity> out;
  for (const auto& e : ontology.entities()) {
    if (criteria.leaf_only && !ontology.children(e.id).empty()) continue;
    if (static_cast<int>(ontology.documents_mentioning(e.id).size()) < criteria.min_documents) continue;
    if (criteria.single_root_ancestor && ontology.root_ancestors(e.id).size() != 1) continue;
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const Entity& a, const Entity& b) {
    return std::pair(normalise_name(a.name), a.id) < std::pair(normalise_name(b.name), b.id);
  });
  return out;
}

std::vector<Chunk> chunks_for(const Ontology& ontology, const std::string& entity_id) {
  if (ontology.find_entity(entity_id) == nullptr) throw DomainError("unknown entity '" + entity_id + "'");
  std::vector<Chunk> out;
  for (const auto& p : ontology.provenance()) {
    if (p.entity != entity_id) continue;
    if (const Chunk* c = ontology.find_chunk(p.chunk)) out.push_back(*c);
  }
  return out;
}

std::vector<Document> read_corpus_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DomainError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
    Chunk c{j.at("chunk_id").get<std::string>(), j.at("doc_id").get<std::string>(),
            j.at("text").get<std::string>(), j.at("ordinal").get<int>()};
    if (c.text.empty()) throw DomainError("corpus line " + std::to_string(line_no) + ": empty chunk text");
    auto [it, inserted] = index.emplace(c.document_id, docs.size());
    if (inserted) docs.push_back({c.document_id, {}});
    docs[it->second].chunks.push_back(std::move(c));
  }
  for (auto& d : docs) {
    std::stable_sort(d.chunks.begin(), d.chunks.end(),
                     [](const Chunk& a, const Chunk& b) { return a.ordinal < b.ordinal; });
    for (std::size_t i = 1; i < d.chunks.size(); ++i) {
      if (d.chunks[i].ordinal == d.chunks[i - 1].ordinal) {
        throw DomainError("document '" + d.id + "' repeats ordinal " + std::to_string(d.chunks[i].ordinal));
      }
    }
  }
  return docs;
}

std::vector<Document> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("corpus not found: " + path);
  return read_corpus_jsonl(in);
}

}  // namespace argeval

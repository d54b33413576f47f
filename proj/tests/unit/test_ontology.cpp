#include <doctest.h>

#include <map>
#include <sstream>

#include "argeval/backends.hpp"
#include "argeval/ontology.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace argeval;
using nlohmann::json;

namespace {

// Miner that replays a fixed reply per chunk id.
OntologyMiner table_miner(std::map<std::string, MinedChunk> replies) {
  return [replies = std::move(replies)](const Ontology&, const Chunk& chunk) { return replies.at(chunk.id); };
}

std::vector<std::string> names(const std::vector<Entity>& es) {
  std::vector<std::string> out;
  for (const auto& e : es) out.push_back(e.name);
  return out;
}

}  // namespace

TEST_CASE("names and slugs") {
  CHECK(normalise_name("  Radiotherapy   60 Gy ") == "radiotherapy 60 gy");
  CHECK(slugify("Lomustine (CCNU) Chemotherapy") == "lomustine-ccnu-chemotherapy");
  CHECK(slugify("%%") == "entity");
}

TEST_CASE("entities are identified by normalised name") {
  Ontology o;
  const auto id = o.ensure_entity("Radiotherapy", "first").id;
  CHECK(o.ensure_entity("  radiotherapy ", "second").id == id);
  CHECK(o.entities().size() == 1);
  CHECK(o.entities()[0].description == "first");
  CHECK(o.ensure_entity("Radio-therapy").id == "radio-therapy");
  CHECK(o.ensure_entity("Radio therapy").id == "radio-therapy-2");
  CHECK_THROWS_AS(o.ensure_entity("   "), DomainError);
  CHECK_THROWS_AS(o.add_entity({"radiotherapy", "Other", ""}), DomainError);
  CHECK_THROWS_AS(o.add_entity({"x", "RADIOTHERAPY", ""}), DomainError);
}

TEST_CASE("hierarchy edges never close a cycle") {
  Ontology o;
  for (const char* n : {"a", "b", "c"}) o.ensure_entity(n);
  CHECK(o.add_edge("a", "b"));
  CHECK(o.add_edge("b", "c"));
  CHECK_FALSE(o.add_edge("c", "a"));
  CHECK_FALSE(o.add_edge("a", "a"));
  CHECK_FALSE(o.add_edge("a", "b"));  // duplicate
  CHECK(o.add_edge("a", "c"));        // a DAG, not a tree
  CHECK(o.root_ancestors("c") == std::vector<std::string>{"a"});
  CHECK(o.root_ancestors("a") == std::vector<std::string>{"a"});
  CHECK(o.validate().ok());
}

TEST_CASE("random edge sequences keep the hierarchy acyclic") {
  gen::Rng rng(17);
  for (int round = 0; round < 50; ++round) {
    Ontology o;
    for (int i = 0; i < 8; ++i) o.ensure_entity("e" + std::to_string(i));
    for (int k = 0; k < 30; ++k) {
      o.add_edge("e" + std::to_string(gen::uniform_int(rng, 0, 7)), "e" + std::to_string(gen::uniform_int(rng, 0, 7)));
    }
    CHECK(o.validate().ok());
  }
}

TEST_CASE("construction traces the three-chunk corpus") {
  std::vector<RejectedEdge> rejected;
  ConstructionOptions options;
  options.on_rejected_edge = [&](const RejectedEdge& e) { rejected.push_back(e); };
  const auto miner = table_miner({
      {"a-1", {{{"Chemotherapy", "Systemic"}, {"Temozolomide", "Oral"}}, {{"Chemotherapy", "Temozolomide"}}}},
      {"a-2", {{{"Lomustine", "Nitrosourea"}, {"chemotherapy", ""}}, {{"Chemotherapy", "Lomustine"}, {"Nope", "Lomustine"}}}},
      {"b-1", {{{"Temozolomide", ""}, {"Lomustine", ""}}, {{"Temozolomide", "Chemotherapy"}}}},
  });
  const auto o = construct_ontology(fixtures::trace_corpus(), miner, options);

  CHECK(o.entities() == std::vector<Entity>{{"chemotherapy", "Chemotherapy", "Systemic"},
                                            {"temozolomide", "Temozolomide", "Oral"},
                                            {"lomustine", "Lomustine", "Nitrosourea"}});
  CHECK(o.hierarchy() == std::vector<HierarchyEdge>{{"chemotherapy", "temozolomide"}, {"chemotherapy", "lomustine"}});
  CHECK(o.provenance() == std::vector<ProvenanceLink>{{"chemotherapy", "a-1"},
                                                      {"temozolomide", "a-1"},
                                                      {"lomustine", "a-2"},
                                                      {"chemotherapy", "a-2"},
                                                      {"temozolomide", "b-1"},
                                                      {"lomustine", "b-1"}});
  REQUIRE(rejected.size() == 2);
  CHECK(rejected[0].reason == "unknown entity");
  CHECK(rejected[1].parent == "Temozolomide");
  CHECK(rejected[1].chunk == "b-1");
  CHECK(rejected[1].reason == "would create a cycle");
  CHECK(o.documents_mentioning("lomustine") == std::vector<std::string>{"guideline-a", "guideline-b"});
  CHECK(chunks_for(o, "chemotherapy").size() == 2);
  CHECK_THROWS_AS(chunks_for(o, "nope"), DomainError);

  const auto selected = select_options(o, {2, true, true});
  CHECK(names(selected) == std::vector<std::string>{"Lomustine", "Temozolomide"});
  CHECK(select_options(o, {3, false, false}).empty());
  CHECK_THROWS_AS(select_options(o, {0, false, false}), DomainError);
}

TEST_CASE("relevance filter skips chunks before mining") {
  int calls = 0;
  ConstructionOptions options;
  options.relevance = [](const Chunk& c) { return c.document_id == "guideline-a"; };
  const auto o = construct_ontology(
      fixtures::trace_corpus(), [&](const Ontology&, const Chunk&) { ++calls; return MinedChunk{}; }, options);
  CHECK(calls == 2);
  CHECK(o.chunks().size() == 2);
}

TEST_CASE("a failing miner reports the partial ontology") {
  int calls = 0;
  const OntologyMiner miner = [&](const Ontology&, const Chunk&) {
    if (++calls == 2) throw std::runtime_error("boom");
    return MinedChunk{{{"X", ""}}, {}};
  };
  try {
    construct_ontology(fixtures::trace_corpus(), miner);
    FAIL("expected ConstructionError");
  } catch (const ConstructionError& e) {
    CHECK(e.failed_chunk() == "a-2");
    CHECK(e.partial().entities().size() == 1);
  }
}

TEST_CASE("model-backed miner over the treatment corpus") {
  const auto o = fixtures::treatment_ontology();
  CHECK(o.validate().ok());
  CHECK(o.chunks().size() == 12);
  const auto selected = select_options(o, fixtures::treatment_selection());
  CHECK(names(selected) == std::vector<std::string>{
                               "Alternating Electric Field Therapy", "Bevacizumab",
                               "Carmustine Polymer Wafer Implantation", "Lomustine (CCNU) Chemotherapy",
                               "PCV Chemotherapy", "Radiotherapy 40 Gy in 15 Fractions",
                               "Radiotherapy 60 Gy in 30 Fractions", "Surgical Tumour Resection",
                               "Temozolomide Chemotherapy"});
  const auto* combo = o.find_by_name("Temozolomide Chemoradiotherapy");
  REQUIRE(combo != nullptr);
  CHECK(o.root_ancestors(combo->id).size() == 2);
  const auto* proton = o.find_by_name("Proton Beam Therapy");
  REQUIRE(proton != nullptr);
  CHECK(o.documents_mentioning(proton->id).size() == 2);
  // The edge that would make the 60 Gy course a parent of Radiotherapy is dropped.
  CHECK(o.parents(o.find_by_name("Radiotherapy")->id).size() == 1);
}

TEST_CASE("model-backed miner retries replies that name unknown entities") {
  llm::MockBackend mock(json{{"sequences",
                              {{"mine_ontology",
                                json::array({json{{"json", {{"entities", json::array({{{"name", "A"}, {"description", ""}}})},
                                                            {"hierarchy", json::array({{{"parent", "A"}, {"child", "B"}}})}}}},
                                             json{{"json", {{"entities", json::array({{{"name", "A"}, {"description", ""}}})},
                                                            {"hierarchy", json::array()}}}}})}}}});
  llm::UsageAccumulator usage;
  llm::Client client(mock, usage);
  const std::vector<Document> docs{{"d", {{"c", "d", "text", 0}}}};
  const auto o = construct_ontology(docs, llm_ontology_miner(client));
  CHECK(mock.call_count("mine_ontology") == 2);
  CHECK(o.entities().size() == 1);
  CHECK(mock.captured()[1].user_prompt.find("B") != std::string::npos);
}

TEST_CASE("JSON round trip and removal") {
  auto o = fixtures::treatment_ontology();
  CHECK(ontology_from_json(to_json(o)) == o);
  CHECK(ontology_from_json(json::parse(to_json(o).dump())) == o);

  const auto id = o.find_by_name("Radiotherapy")->id;
  o.remove_entity(id);
  CHECK(o.find_entity(id) == nullptr);
  CHECK(o.validate().ok());
  for (const auto& e : o.hierarchy()) CHECK((e.parent != id && e.child != id));
  for (const auto& p : o.provenance()) CHECK(p.entity != id);

  auto bad = to_json(o);
  bad["hierarchy"].push_back(json::array({"nope", id}));
  CHECK_THROWS_AS(ontology_from_json(bad), DomainError);
}

TEST_CASE("corpus files") {
  std::istringstream in(R"({"doc_id":"d2","chunk_id":"x","ordinal":1,"text":"second"}
{"doc_id":"d1","chunk_id":"y","ordinal":0,"text":"only"}

{"doc_id":"d2","chunk_id":"z","ordinal":0,"text":"first"}
)");
  const auto docs = read_corpus_jsonl(in);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "d2");
  CHECK(docs[0].chunks[0].id == "z");
  CHECK(docs[1].chunks.size() == 1);

  std::istringstream dup(R"({"doc_id":"d","chunk_id":"a","ordinal":0,"text":"t"}
{"doc_id":"d","chunk_id":"b","ordinal":0,"text":"t"})");
  CHECK_THROWS_AS(read_corpus_jsonl(dup), DomainError);
  std::istringstream broken("{not json}");
  CHECK_THROWS_AS(read_corpus_jsonl(broken), DomainError);
  CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), DomainError);
}
